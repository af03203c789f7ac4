#include "kahlerflow/checkpoint.hpp"

#include <fstream>

#include "json.hpp"

namespace kahlerflow {

namespace {

using nlohmann::json;

json linear_to_json(const ComplexLinear& l) {
  json j;
  j["in"] = l.in;
  j["out"] = l.out;
  std::vector<double> A, B, br, bi;
  for (const Cx& w : l.w) {
    A.push_back(w.re);
    B.push_back(w.im);
  }
  for (const Cx& b : l.b) {
    br.push_back(b.re);
    bi.push_back(b.im);
  }
  j["A"] = A;
  j["B"] = B;
  j["bias_re"] = br;
  j["bias_im"] = bi;
  return j;
}

ComplexLinear linear_from_json(const json& j) {
  ComplexLinear l;
  l.in = j.at("in").get<int>();
  l.out = j.at("out").get<int>();
  const auto A = j.at("A").get<std::vector<double>>();
  const auto B = j.at("B").get<std::vector<double>>();
  const auto br = j.at("bias_re").get<std::vector<double>>();
  const auto bi = j.at("bias_im").get<std::vector<double>>();
  if (A.size() != static_cast<size_t>(l.in) * l.out || A.size() != B.size() ||
      br.size() != static_cast<size_t>(l.out) || bi.size() != br.size())
    throw std::invalid_argument("checkpoint: inconsistent linear layer shapes");
  l.w.resize(A.size());
  l.b.resize(br.size());
  for (size_t k = 0; k < A.size(); ++k) l.w[k] = {A[k], B[k]};
  for (size_t k = 0; k < br.size(); ++k) l.b[k] = {br[k], bi[k]};
  return l;
}

json subnet_to_json(const Subnet& s) {
  json j;
  j["l1"] = linear_to_json(s.l1);
  j["l2"] = linear_to_json(s.l2);
  j["activation"] = s.act == Activation::CGelu ? "cgelu" : "none";
  return j;
}

Subnet subnet_from_json(const json& j) {
  Subnet s;
  s.l1 = linear_from_json(j.at("l1"));
  s.l2 = linear_from_json(j.at("l2"));
  const std::string act = j.value("activation", "cgelu");
  if (act == "cgelu")
    s.act = Activation::CGelu;
  else if (act == "none")
    s.act = Activation::None;
  else
    throw std::invalid_argument("checkpoint: unknown activation " + act);
  return s;
}

json standardize_to_json(const Standardization& s) {
  return json{{"mean", s.mean}, {"scale", s.scale}};
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(NumErr::IoError, "checkpoint: cannot open " + path);
  out << j.dump(2) << "\n";
}

}  // namespace

void save_checkpoint(const std::string& path, const FlowStack& stack,
                     const std::optional<Standardization>& standardize) {
  json j;
  j["kind"] = "discrete";
  j["K"] = static_cast<int>(stack.layers.size());
  j["d"] = stack.d;
  j["base"] = "complex_unit_gaussian";
  json layers = json::array();
  for (const CouplingLayer& l : stack.layers) {
    json lj;
    lj["parity"] = l.parity;
    lj["s_net"] = subnet_to_json(l.s_net);
    lj["t_net"] = subnet_to_json(l.t_net);
    layers.push_back(lj);
  }
  j["layers"] = layers;
  if (standardize) j["standardize"] = standardize_to_json(*standardize);
  write_json(path, j);
}

void save_checkpoint(const std::string& path, const VelocityNet& net, int rk4_steps,
                     const std::optional<Standardization>& standardize) {
  json j;
  j["kind"] = "continuous";
  j["d"] = 2;
  j["base"] = "complex_unit_gaussian";
  j["rk4_steps"] = rk4_steps;
  j["net"] = {{"l1", linear_to_json(net.l1)},
              {"l2", linear_to_json(net.l2)},
              {"l3", linear_to_json(net.l3)}};
  if (standardize) j["standardize"] = standardize_to_json(*standardize);
  write_json(path, j);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(NumErr::IoError, "checkpoint: cannot open " + path);
  json j = json::parse(in);
  Checkpoint ck;
  ck.kind = j.at("kind").get<std::string>();
  if (j.contains("standardize")) {
    Standardization s;
    s.mean = j["standardize"].at("mean").get<std::vector<double>>();
    s.scale = j["standardize"].at("scale").get<std::vector<double>>();
    ck.standardize = s;
  }
  if (ck.kind == "discrete") {
    ck.stack.d = j.at("d").get<int>();
    for (const json& lj : j.at("layers")) {
      CouplingLayer l;
      l.parity = lj.at("parity").get<int>();
      if (l.parity != 0 && l.parity != 1)
        throw std::invalid_argument("checkpoint: parity must be 0 or 1");
      l.s_net = subnet_from_json(lj.at("s_net"));
      l.t_net = subnet_from_json(lj.at("t_net"));
      ck.stack.layers.push_back(std::move(l));
    }
    if (ck.stack.layers.empty()) throw std::invalid_argument("checkpoint: empty stack");
  } else if (ck.kind == "continuous") {
    ck.rk4_steps = j.value("rk4_steps", kDefaultRk4Steps);
    ck.net.l1 = linear_from_json(j.at("net").at("l1"));
    ck.net.l2 = linear_from_json(j.at("net").at("l2"));
    ck.net.l3 = linear_from_json(j.at("net").at("l3"));
  } else {
    throw std::invalid_argument("checkpoint: unknown kind " + ck.kind);
  }
  return ck;
}

}  // namespace kahlerflow
