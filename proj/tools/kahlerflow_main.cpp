// kahlerflow command line: train / sample / diagnose / verify /
// surgery-demo / dump-dataset. JSON configs in, CSV/PNG/JSON artifacts out;
// every multi-file run writes a manifest.json (sha256 per file) last and
// leaves a .failed marker if it aborts. Exit codes: 0 success, 1 validation
// error, 2 numerical failure.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "kahlerflow/artifacts.hpp"
#include "kahlerflow/checkpoint.hpp"
#include "kahlerflow/diagnostics.hpp"
#include "kahlerflow/kahler_ricci_lab.hpp"
#include "kahlerflow/training.hpp"
#include "kahlerflow/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace kahlerflow;

namespace {

// Tracks emitted files; manifest.json is written last so its presence
// certifies a complete run.
class ArtifactSession {
 public:
  explicit ArtifactSession(const fs::path& dir) : dir_(dir) {
    fs::create_directories(dir_);
    std::error_code ec;
    fs::remove(dir_ / ".failed", ec);
  }

  void add(const fs::path& path) { files_.push_back(path); }

  fs::path path(const std::string& name) const { return dir_ / name; }

  void finish(const json& resolved_config) {
    json manifest;
    manifest["config"] = resolved_config;
    json files = json::array();
    for (const fs::path& p : files_)
      files.push_back({{"path", fs::relative(p, dir_).string()},
                       {"sha256", sha256_file_hex(p.string())}});
    manifest["files"] = files;
    std::ofstream out(dir_ / "manifest.json", std::ios::binary);
    out << manifest.dump(2) << "\n";
  }

  void mark_failed(const std::string& why) {
    std::ofstream out(dir_ / ".failed", std::ios::binary);
    out << why << "\n";
  }

 private:
  fs::path dir_;
  std::vector<fs::path> files_;
};

void reject_unknown_keys(const json& j, const std::vector<std::string>& allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const std::string& k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok) throw std::invalid_argument("config: unknown key '" + it.key() + "'");
  }
}

struct TrainRunConfig {
  TrainConfig opt;
  int n = 4000;
  double noise = 0.1;
  int depth = 6;
  int K = 8;
  int hidden = 8;
  double init_scale = 0.1;
  std::uint64_t data_seed = 7;

  static TrainRunConfig from_json(const json& j) {
    reject_unknown_keys(j, {"lr", "beta1", "beta2", "epochs", "batch", "seed", "clip_norm",
                            "rk4_steps", "n", "noise", "depth", "K", "hidden", "init_scale",
                            "data_seed"});
    TrainRunConfig c;
    c.opt.lr = j.value("lr", c.opt.lr);
    c.opt.beta1 = j.value("beta1", c.opt.beta1);
    c.opt.beta2 = j.value("beta2", c.opt.beta2);
    c.opt.epochs = j.value("epochs", c.opt.epochs);
    c.opt.batch = j.value("batch", c.opt.batch);
    c.opt.seed = j.value("seed", c.opt.seed);
    c.opt.clip_norm = j.value("clip_norm", c.opt.clip_norm);
    c.opt.rk4_steps = j.value("rk4_steps", c.opt.rk4_steps);
    c.n = j.value("n", c.n);
    c.noise = j.value("noise", c.noise);
    c.depth = j.value("depth", c.depth);
    c.K = j.value("K", c.K);
    c.hidden = j.value("hidden", c.hidden);
    c.init_scale = j.value("init_scale", c.init_scale);
    c.data_seed = j.value("data_seed", c.data_seed);
    return c;
  }

  json to_json() const {
    return json{{"lr", opt.lr},         {"beta1", opt.beta1},
                {"beta2", opt.beta2},   {"epochs", opt.epochs},
                {"batch", opt.batch},   {"seed", opt.seed},
                {"clip_norm", opt.clip_norm}, {"rk4_steps", opt.rk4_steps},
                {"n", n},               {"noise", noise},
                {"depth", depth},       {"K", K},
                {"hidden", hidden},     {"init_scale", init_scale},
                {"data_seed", data_seed}};
  }
};

void write_loss_csv(const std::vector<double>& curve, const std::string& path) {
  CsvWriter csv(path);
  csv.header({"epoch", "nll"});
  for (size_t e = 0; e < curve.size(); ++e)
    csv.row({static_cast<double>(e), curve[e]});
}

int cmd_train(const std::string& dataset, const std::string& flow, const std::string& config_path,
              const std::string& out_path, const std::string& losscsv_path) {
  json cfg_json = json::object();
  if (!config_path.empty()) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw std::invalid_argument("train: cannot open config " + config_path);
    cfg_json = json::parse(in);
  }
  TrainRunConfig cfg = TrainRunConfig::from_json(cfg_json);

  ArtifactSession session(fs::path(out_path).parent_path().empty()
                              ? fs::path(".")
                              : fs::path(out_path).parent_path());
  try {
    Dataset raw = make_dataset(dataset, cfg.n, cfg.noise, cfg.depth, cfg.data_seed);
    Standardization st = fit_standardization(raw);
    Dataset data = apply_standardization(raw, st);

    json resolved = cfg.to_json();
    resolved["dataset"] = dataset;
    resolved["flow"] = flow;

    if (flow == "discrete") {
      FlowStack stack = make_flow_stack(cfg.K, cfg.hidden, cfg.opt.seed, cfg.init_scale);
      TrainResult result = train(stack, data, cfg.opt);
      save_checkpoint(out_path, stack, st);
      session.add(out_path);
      if (!losscsv_path.empty()) {
        write_loss_csv(result.loss_curve, losscsv_path);
        session.add(losscsv_path);
      }
      std::fprintf(stderr, "train: final NLL %.6f (initial %.6f)\n", result.loss_curve.back(),
                   result.loss_curve.front());
    } else if (flow == "continuous") {
      VelocityNet net = make_velocity_net(cfg.opt.seed, cfg.init_scale);
      TrainResult result = train(net, data, cfg.opt);
      save_checkpoint(out_path, net, cfg.opt.rk4_steps, st);
      session.add(out_path);
      if (!losscsv_path.empty()) {
        write_loss_csv(result.loss_curve, losscsv_path);
        session.add(losscsv_path);
      }
      std::fprintf(stderr, "train: final NLL %.6f (initial %.6f)\n", result.loss_curve.back(),
                   result.loss_curve.front());
    } else {
      throw std::invalid_argument("train: unknown flow kind " + flow);
    }
    session.finish(resolved);
  } catch (...) {
    session.mark_failed("train aborted");
    throw;
  }
  return 0;
}

int cmd_sample(const std::string& checkpoint_path, int n, std::uint64_t seed,
               const std::string& out_path, const std::string& traj_path, int traj_count) {
  Checkpoint ck = load_checkpoint(checkpoint_path);
  ArtifactSession session(fs::path(out_path).parent_path().empty()
                              ? fs::path(".")
                              : fs::path(out_path).parent_path());
  try {
    Dataset samples;
    if (ck.kind == "discrete")
      samples = sample(ck.stack, n, seed);
    else
      samples = cnf_sample(ck.net, n, seed, ck.rk4_steps);
    dataset_to_csv(samples, out_path);
    session.add(out_path);

    if (!traj_path.empty()) {
      if (ck.kind != "continuous")
        throw std::invalid_argument("sample: --traj needs a continuous checkpoint");
      CsvWriter csv(traj_path);
      csv.header({"sample", "t", "re1", "im1", "re2", "im2", "logq"});
      Dataset base = sample_complex_gaussian(traj_count, 2, seed + 1);
      VField field = net_field(ck.net);
      for (int s = 0; s < traj_count; ++s) {
        AugmentedState st{base.points[s], base_log_density(base.points[s]), 0.0};
        csv.row({static_cast<double>(s), 0.0, st.z[0].re, st.z[0].im, st.z[1].re, st.z[1].im,
                 st.logq});
        const int steps = ck.rk4_steps;
        for (int k = 0; k < steps; ++k) {
          const double t0 = static_cast<double>(k) / steps;
          const double t1 = static_cast<double>(k + 1) / steps;
          st = integrate(field, st.z, t0, t1, 1, st.logq);
          csv.row({static_cast<double>(s), t1, st.z[0].re, st.z[0].im, st.z[1].re, st.z[1].im,
                   st.logq});
        }
      }
      csv.close();
      session.add(traj_path);
    }
    session.finish(json{{"checkpoint", checkpoint_path}, {"n", n}, {"seed", seed}});
  } catch (...) {
    session.mark_failed("sample aborted");
    throw;
  }
  return 0;
}

int cmd_diagnose(const std::string& checkpoint_path, const std::string& dataset, int grid_n,
                 double sigma, const std::string& out_dir, int n_samples, std::uint64_t seed) {
  Checkpoint ck = load_checkpoint(checkpoint_path);
  ArtifactSession session(out_dir);
  try {
    Dataset samples = ck.kind == "discrete" ? sample(ck.stack, n_samples, seed)
                                            : cnf_sample(ck.net, n_samples, seed, ck.rk4_steps);

    // Grid over the central mass of the samples.
    double extent = 0.0;
    for (const ComplexVec& p : samples.points)
      extent = std::max({extent, std::abs(p[0].re), std::abs(p[0].im)});
    extent = std::min(extent, 4.0) + 0.5;
    GridSpec g{grid_n, grid_n, -extent, -extent, 2 * extent / grid_n};

    DensityField density = histogram_density(samples, g, sigma);
    density_to_csv(density, session.path("density.csv").string());
    session.add(session.path("density.csv"));
    render_heatmap(density, session.path("density.png").string());
    session.add(session.path("density.png"));

    CurvatureMap kahler = fig1_scalar_curvature(density);
    curvature_map_to_csv(kahler, session.path("kahler_R.csv").string());
    session.add(session.path("kahler_R.csv"));
    render_heatmap(kahler, session.path("kahler_R.png").string());
    session.add(session.path("kahler_R.png"));

    CurvatureMap proxy = score_curvature_proxy(density);
    curvature_map_to_csv(proxy, session.path("score_proxy.csv").string());
    session.add(session.path("score_proxy.csv"));
    render_heatmap(proxy, session.path("score_proxy.png").string());
    session.add(session.path("score_proxy.png"));

    PhiGradientField grad = phi_gradient_field(density);
    {
      CsvWriter csv(session.path("phi_grad.csv").string());
      csv.header({"x", "y", "dphidx", "dphidy"});
      for (int i = 0; i < grad.g.nx; ++i)
        for (int j = 0; j < grad.g.ny; ++j)
          csv.row({grad.g.x(i), grad.g.y(j), grad.dx[grad.g.index(i, j)],
                   grad.dy[grad.g.index(i, j)]});
    }
    session.add(session.path("phi_grad.csv"));

    if (ck.kind == "discrete") {
      auto stats = holomorphy_probe(ck.stack, 5000, seed + 2);
      for (size_t k = 0; k < stats.size(); ++k) {
        const std::string name = "holomorphy_layer_" + std::to_string(k) + ".csv";
        CsvWriter csv(session.path(name).string());
        csv.header({"dz_norm", "dzbar_norm"});
        for (size_t i = 0; i < stats[k].dz_norm.size(); ++i)
          csv.row({stats[k].dz_norm[i], stats[k].dzbar_norm[i]});
        csv.close();
        session.add(session.path(name));
      }
    }

    // Reference histogram of the named dataset for side-by-side reading.
    if (!dataset.empty()) {
      Dataset ref = make_dataset(dataset, n_samples, 0.1, 6, seed + 3);
      Standardization st = ck.standardize ? *ck.standardize : fit_standardization(ref);
      Dataset std_ref = apply_standardization(ref, st);
      DensityField ref_density = histogram_density(std_ref, g, sigma);
      density_to_csv(ref_density, session.path("data_density.csv").string());
      session.add(session.path("data_density.csv"));
      render_heatmap(ref_density, session.path("data_density.png").string());
      session.add(session.path("data_density.png"));
    }

    session.finish(json{{"checkpoint", checkpoint_path},
                        {"dataset", dataset},
                        {"grid", grid_n},
                        {"sigma", sigma},
                        {"n_samples", n_samples},
                        {"seed", seed}});
  } catch (...) {
    session.mark_failed("diagnose aborted");
    throw;
  }
  return 0;
}

int cmd_verify(const std::string& suite, const std::string& out_csv) {
  if (suite != "identities") throw std::invalid_argument("verify: unknown suite " + suite);
  std::vector<CheckResult> results = run_identity_suite();
  write_check_csv(results, out_csv);
  int failures = 0;
  for (const CheckResult& r : results) {
    std::printf("%-28s %-4s measured=%.3e threshold=%.3e (%.2fs)\n", r.name.c_str(),
                r.pass ? "PASS" : "FAIL", r.measured, r.threshold, r.runtime_s);
    if (!r.pass) ++failures;
  }
  std::printf("%d/%zu checks passed; table written to %s\n",
              static_cast<int>(results.size()) - failures, results.size(), out_csv.c_str());
  return failures == 0 ? 0 : 2;
}

int cmd_surgery_demo(const std::string& out_dir) {
  ArtifactSession session(out_dir);
  try {
    FlowStack s = make_flow_stack(6, 8, 2024, 0.2);
    s.layers[3].s_net.l2.w.assign(s.layers[3].s_net.l2.w.size(), Cx{0, 0});
    s.layers[3].s_net.l2.b[0] = {-30.0, 0};
    Dataset batch = sample_complex_gaussian(128, 2, 2025);
    auto ev = singularity_monitor(s, batch, 1e-12);
    if (!ev) fail(NumErr::Singular, "surgery-demo: constructed collapse did not trigger");
    std::fprintf(stderr, "surgery-demo: collapse at layer %d (mean det %.3e)\n",
                 ev->trigger_layer, ev->batch_mean_det);

    const TorusGrid& g = ev->probe_grid;
    TorusField logq(g.size(), kLogqClipFloor);
    TorusField ones(g.size(), 1.0);

    {
      CsvWriter csv(session.path("density_before.csv").string());
      csv.header({"x", "y", "q"});
      for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
          csv.row({g.x(i), g.y(j), std::exp(logq[g.index(i, j)])});
    }
    session.add(session.path("density_before.csv"));

    TorusDensity rescued = surgery_rescue(g, logq, ev->phi, ones);
    {
      CsvWriter csv(session.path("density_after.csv").string());
      csv.header({"x", "y", "q"});
      for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) csv.row({g.x(i), g.y(j), rescued.q[g.index(i, j)]});
    }
    session.add(session.path("density_after.csv"));

    session.finish(json{{"trigger_layer", ev->trigger_layer},
                        {"batch_mean_det", ev->batch_mean_det},
                        {"rescued_Z", rescued.Z}});
  } catch (...) {
    session.mark_failed("surgery-demo aborted");
    throw;
  }
  return 0;
}

int cmd_dump_dataset(const std::string& name, int n, double noise, int depth, std::uint64_t seed,
                     const std::string& out) {
  Dataset ds = name == "gaussian" ? sample_complex_gaussian(n, 2, seed)
                                  : make_dataset(name, n, noise, depth, seed);
  dataset_to_csv(ds, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"complex normalizing flows with Kahler curvature diagnostics"};
  app.require_subcommand(1);

  // train
  auto* train_cmd = app.add_subcommand("train", "fit a flow by maximum likelihood");
  std::string tr_dataset, tr_flow = "discrete", tr_config, tr_out = "checkpoint.json", tr_loss;
  train_cmd->add_option("--dataset", tr_dataset, "two_moons|rings|fractal_tree")->required();
  train_cmd->add_option("--flow", tr_flow, "discrete|continuous");
  train_cmd->add_option("--config", tr_config, "JSON training config");
  train_cmd->add_option("--out", tr_out, "checkpoint path");
  train_cmd->add_option("--losscsv", tr_loss, "per-epoch NLL curve CSV");

  // sample
  auto* sample_cmd = app.add_subcommand("sample", "draw samples from a checkpoint");
  std::string sm_ckpt, sm_out = "samples.csv", sm_traj;
  int sm_n = 1000, sm_traj_count = 8;
  std::uint64_t sm_seed = 0;
  sample_cmd->add_option("--checkpoint", sm_ckpt)->required();
  sample_cmd->add_option("--n", sm_n);
  sample_cmd->add_option("--seed", sm_seed);
  sample_cmd->add_option("--out", sm_out);
  sample_cmd->add_option("--traj", sm_traj, "trajectory CSV (continuous checkpoints)");
  sample_cmd->add_option("--traj-count", sm_traj_count);

  // diagnose
  auto* diag_cmd = app.add_subcommand("diagnose", "density and curvature maps");
  std::string dg_ckpt, dg_dataset, dg_out = "diagnostics";
  int dg_grid = 100, dg_samples = 200000;
  double dg_sigma = 1.0;
  std::uint64_t dg_seed = 0;
  diag_cmd->add_option("--checkpoint", dg_ckpt)->required();
  diag_cmd->add_option("--dataset", dg_dataset, "reference dataset name");
  diag_cmd->add_option("--grid", dg_grid);
  diag_cmd->add_option("--sigma", dg_sigma, "histogram smoothing (grid cells)");
  diag_cmd->add_option("--out", dg_out, "output directory");
  diag_cmd->add_option("--samples", dg_samples);
  diag_cmd->add_option("--seed", dg_seed);

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "run the identity suite");
  std::string vf_suite = "identities", vf_out = "verify_results.csv";
  verify_cmd->add_option("--suite", vf_suite);
  verify_cmd->add_option("--out", vf_out);

  // surgery-demo
  auto* surgery_cmd = app.add_subcommand("surgery-demo", "collapse and rescue walkthrough");
  std::string sg_out = "surgery_demo";
  surgery_cmd->add_option("--out", sg_out, "output directory");

  // dump-dataset
  auto* dump_cmd = app.add_subcommand("dump-dataset", "write a dataset CSV");
  std::string dd_name, dd_out = "dataset.csv";
  int dd_n = 4000, dd_depth = 6;
  double dd_noise = 0.1;
  std::uint64_t dd_seed = 7;
  dump_cmd->add_option("--name", dd_name, "two_moons|rings|fractal_tree|gaussian")->required();
  dump_cmd->add_option("--n", dd_n);
  dump_cmd->add_option("--noise", dd_noise);
  dump_cmd->add_option("--depth", dd_depth);
  dump_cmd->add_option("--seed", dd_seed);
  dump_cmd->add_option("--out", dd_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*train_cmd) return cmd_train(tr_dataset, tr_flow, tr_config, tr_out, tr_loss);
    if (*sample_cmd) return cmd_sample(sm_ckpt, sm_n, sm_seed, sm_out, sm_traj, sm_traj_count);
    if (*diag_cmd)
      return cmd_diagnose(dg_ckpt, dg_dataset, dg_grid, dg_sigma, dg_out, dg_samples, dg_seed);
    if (*verify_cmd) return cmd_verify(vf_suite, vf_out);
    if (*surgery_cmd) return cmd_surgery_demo(sg_out);
    if (*dump_cmd) return cmd_dump_dataset(dd_name, dd_n, dd_noise, dd_depth, dd_seed, dd_out);
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
