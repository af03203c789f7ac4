// End-to-end checks of the command line binary: exit codes, artifact
// determinism, manifest integrity, checkpoint round trips.
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "kahlerflow/artifacts.hpp"
#include "kahlerflow/checkpoint.hpp"
#include "kahlerflow/training.hpp"

namespace fs = std::filesystem;
using namespace kahlerflow;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(KAHLERFLOW_BIN) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("kf_cli_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

}  // namespace

TEST_CASE("unknown flags and subcommands exit with code 1") {
  CHECK(run("--definitely-not-a-flag") == 1);
  CHECK(run("trainx") == 1);
  CHECK(run("train") == 1);  // missing required --dataset
}

TEST_CASE("dump-dataset: deterministic bytes, expected columns") {
  TempDir tmp;
  const fs::path a = tmp.path / "a.csv";
  const fs::path b = tmp.path / "b.csv";
  CHECK(run("dump-dataset --name two_moons --n 500 --noise 0.05 --seed 7 --out " + a.string()) == 0);
  CHECK(run("dump-dataset --name two_moons --n 500 --noise 0.05 --seed 7 --out " + b.string()) == 0);
  const std::string ca = slurp(a);
  CHECK(ca == slurp(b));
  CHECK(ca.substr(0, 16) == "re1,im1,re2,im2\n");
  CHECK(run("dump-dataset --name no_such_set --out " + (tmp.path / "c.csv").string()) == 1);
}

TEST_CASE("train with lr=0: exit 0, flat curve, valid manifest") {
  TempDir tmp;
  const fs::path cfg = tmp.path / "cfg.json";
  {
    std::ofstream out(cfg);
    out << R"({"lr": 0.0, "epochs": 5, "batch": 64, "n": 64, "seed": 3})" << "\n";
  }
  const fs::path ckpt = tmp.path / "ckpt.json";
  const fs::path loss = tmp.path / "loss.csv";
  CHECK(run("train --dataset two_moons --flow discrete --config " + cfg.string() + " --out " +
            ckpt.string() + " --losscsv " + loss.string()) == 0);

  // flat loss curve
  std::ifstream in(loss);
  std::string header;
  std::getline(in, header);
  CHECK(header == "epoch,nll");
  std::string first_val, line;
  int rows = 0;
  while (std::getline(in, line)) {
    const std::string val = line.substr(line.find(',') + 1);
    if (rows == 0) first_val = val;
    CHECK(val == first_val);
    ++rows;
  }
  CHECK(rows == 5);

  // checkpoint loads and the manifest hashes match the files on disk
  Checkpoint ck = load_checkpoint(ckpt.string());
  CHECK(ck.kind == "discrete");
  CHECK(ck.stack.layers.size() == 8);
  REQUIRE(fs::exists(tmp.path / "manifest.json"));
  CHECK_FALSE(fs::exists(tmp.path / ".failed"));
  nlohmann::json manifest = nlohmann::json::parse(slurp(tmp.path / "manifest.json"));
  REQUIRE(manifest.contains("files"));
  for (const auto& f : manifest["files"]) {
    const fs::path p = tmp.path / f.at("path").get<std::string>();
    CHECK(fs::exists(p));
    CHECK(sha256_file_hex(p.string()) == f.at("sha256").get<std::string>());
  }
}

TEST_CASE("train rejects unknown config keys with exit 1") {
  TempDir tmp;
  const fs::path cfg = tmp.path / "bad.json";
  {
    std::ofstream out(cfg);
    out << R"({"lr": 0.1, "learning_rate_typo": 5})" << "\n";
  }
  CHECK(run("train --dataset two_moons --config " + cfg.string() + " --out " +
            (tmp.path / "x.json").string()) == 1);
}

TEST_CASE("sample: deterministic output from a checkpoint") {
  TempDir tmp;
  const fs::path ckpt = tmp.path / "ckpt.json";
  FlowStack s = make_flow_stack(4, 8, 21, 0.15);
  save_checkpoint(ckpt.string(), s);

  const fs::path a = tmp.path / "sa.csv";
  const fs::path b = tmp.path / "sb.csv";
  CHECK(run("sample --checkpoint " + ckpt.string() + " --n 200 --seed 5 --out " + a.string()) == 0);
  CHECK(run("sample --checkpoint " + ckpt.string() + " --n 200 --seed 5 --out " + b.string()) == 0);
  CHECK(slurp(a) == slurp(b));
}

TEST_CASE("checkpoint round trip preserves every parameter bit") {
  TempDir tmp;
  FlowStack s = make_flow_stack(5, 8, 22, 0.3);
  const fs::path p = tmp.path / "rt.json";
  Standardization st;
  st.mean = {0.1, -0.2, 0.3, 0.0};
  st.scale = {1.0, 2.0, 0.5, 1.5};
  save_checkpoint(p.string(), s, st);
  Checkpoint ck = load_checkpoint(p.string());
  CHECK(get_params(ck.stack) == get_params(s));
  REQUIRE(ck.standardize.has_value());
  CHECK(ck.standardize->mean == st.mean);
  CHECK(ck.standardize->scale == st.scale);
  for (size_t k = 0; k < s.layers.size(); ++k)
    CHECK(ck.stack.layers[k].parity == s.layers[k].parity);

  VelocityNet net = make_velocity_net(23, 0.2);
  const fs::path pn = tmp.path / "rtn.json";
  save_checkpoint(pn.string(), net, 48);
  Checkpoint ckn = load_checkpoint(pn.string());
  CHECK(ckn.kind == "continuous");
  CHECK(ckn.rk4_steps == 48);
  CHECK(get_params(ckn.net) == get_params(net));
}

TEST_CASE("diagnose emits the full artifact set with a complete manifest") {
  TempDir tmp;
  const fs::path ckpt = tmp.path / "ckpt.json";
  FlowStack s = make_flow_stack(4, 8, 24, 0.15);
  save_checkpoint(ckpt.string(), s);
  const fs::path out = tmp.path / "diag";
  CHECK(run("diagnose --checkpoint " + ckpt.string() +
            " --dataset two_moons --grid 40 --sigma 1.0 --samples 20000 --out " + out.string()) ==
        0);
  for (const char* f : {"density.csv", "density.png", "kahler_R.csv", "kahler_R.png",
                        "score_proxy.csv", "score_proxy.png", "phi_grad.csv",
                        "holomorphy_layer_0.csv", "holomorphy_layer_3.csv", "data_density.csv",
                        "manifest.json"})
    CHECK(fs::exists(out / f));
  // manifest.json enumerates exactly the emitted files (everything except itself)
  nlohmann::json manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  std::size_t on_disk = 0;
  for (const auto& e : fs::directory_iterator(out))
    if (e.path().filename() != "manifest.json") ++on_disk;
  CHECK(manifest["files"].size() == on_disk);
}

TEST_CASE("surgery-demo produces before/after densities") {
  TempDir tmp;
  const fs::path out = tmp.path / "surgery";
  CHECK(run("surgery-demo --out " + out.string()) == 0);
  CHECK(fs::exists(out / "density_before.csv"));
  CHECK(fs::exists(out / "density_after.csv"));
  CHECK(fs::exists(out / "manifest.json"));
}

TEST_CASE("numerical failures exit with code 2") {
  TempDir tmp;
  // Corrupt checkpoint: enormous weights push the forward map to overflow.
  FlowStack s = make_flow_stack(2, 8, 25, 0.2);
  s.layers[0].t_net.l2.w[0] = {1e308, 0};
  s.layers[1].t_net.l2.w[0] = {1e308, 0};
  const fs::path ckpt = tmp.path / "bad.json";
  save_checkpoint(ckpt.string(), s);
  CHECK(run("sample --checkpoint " + ckpt.string() + " --n 50 --seed 1 --out " +
            (tmp.path / "s.csv").string()) == 2);
  CHECK(fs::exists(tmp.path / ".failed"));
}

TEST_CASE("diagnose artifacts are byte-identical across identical runs") {
  TempDir tmp;
  const fs::path ckpt = tmp.path / "ckpt.json";
  save_checkpoint(ckpt.string(), make_flow_stack(4, 8, 26, 0.15));
  const fs::path d1 = tmp.path / "d1";
  const fs::path d2 = tmp.path / "d2";
  const std::string args = " --dataset rings --grid 32 --sigma 1.0 --samples 10000 --seed 4 --out ";
  CHECK(run("diagnose --checkpoint " + ckpt.string() + args + d1.string()) == 0);
  CHECK(run("diagnose --checkpoint " + ckpt.string() + args + d2.string()) == 0);
  for (const auto& e : fs::directory_iterator(d1)) {
    const fs::path other = d2 / e.path().filename();
    REQUIRE(fs::exists(other));
    CHECK(slurp(e.path()) == slurp(other));
  }
}
