// Acceptance runner: one line per criterion, PASS/FAIL with the measured
// values and runtimes; exit code is the number of failed criteria.
#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "kahlerflow/diagnostics.hpp"
#include "kahlerflow/training.hpp"
#include "kahlerflow/verify.hpp"

using namespace kahlerflow;

namespace {

using Clock = std::chrono::steady_clock;

struct Criterion {
  std::string name;
  bool pass = false;
  double runtime_s = 0;
  double runtime_limit_s = 0;
  std::string detail;
};

std::vector<Criterion> g_results;

void report(const std::string& name, bool pass, double runtime_s, double limit_s,
            const std::string& detail) {
  Criterion c{name, pass && runtime_s < limit_s, runtime_s, limit_s, detail};
  g_results.push_back(c);
  std::printf("[%s] %s: %s (%.1fs / limit %.0fs)\n", c.pass ? "PASS" : "FAIL", name.c_str(),
              detail.c_str(), runtime_s, limit_s);
  std::fflush(stdout);
}

const CheckResult& find(const std::vector<CheckResult>& rs, const std::string& name) {
  for (const CheckResult& r : rs)
    if (r.name == name) return r;
  std::fprintf(stderr, "missing check %s\n", name.c_str());
  std::abort();
}

std::string meas(const std::vector<CheckResult>& rs, const std::string& name) {
  const CheckResult& r = find(rs, name);
  char buf[128];
  std::snprintf(buf, sizeof buf, "%s=%.3e", name.c_str(), r.measured);
  return buf;
}

struct TrainOutcome {
  FlowStack stack;
  double initial = 0, final_nll = 0, held = 0;
  double runtime_s = 0;
  bool pass = false;
  std::string detail;
};

TrainOutcome train_criterion(const std::string& name) {
  TrainOutcome out;
  const auto t0 = Clock::now();
  Dataset raw = make_dataset(name, 4000, 0.15, 6, 7);
  Dataset train_set, held_set;
  train_set.d = held_set.d = 2;
  train_set.points.assign(raw.points.begin(), raw.points.begin() + 3200);
  held_set.points.assign(raw.points.begin() + 3200, raw.points.end());
  Standardization st = fit_standardization(train_set);
  train_set = apply_standardization(train_set, st);
  held_set = apply_standardization(held_set, st);

  out.stack = make_flow_stack(8, 8, 7, 0.1);
  out.initial = nll_loss(out.stack, train_set);
  TrainConfig cfg;
  cfg.epochs = 2000;
  cfg.batch = 256;
  cfg.seed = 7;
  cfg.lr = 2e-3;
  cfg.clip_norm = 0.0;
  train(out.stack, train_set, cfg);
  out.final_nll = nll_loss(out.stack, train_set);
  out.held = nll_loss(out.stack, held_set);
  out.runtime_s = std::chrono::duration<double>(Clock::now() - t0).count();

  const bool decreased = out.final_nll <= 0.7 * out.initial;
  const bool generalizes = std::abs(out.held - out.final_nll) <= 0.1 * std::abs(out.final_nll);
  out.pass = decreased && generalizes;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s init=%.3f final=%.3f (ratio %.3f <= 0.7) held=%.3f (gap %.1f%% <= 10%%)",
                name.c_str(), out.initial, out.final_nll, out.final_nll / out.initial, out.held,
                100.0 * std::abs(out.held - out.final_nll) / std::abs(out.final_nll));
  out.detail = buf;
  return out;
}

}  // namespace

int main() {
  std::printf("acceptance suite\n================\n");

  const auto suite_t0 = Clock::now();
  std::vector<CheckResult> rs = run_identity_suite();
  (void)suite_t0;

  auto rt = [&](std::initializer_list<const char*> names) {
    double s = 0;
    for (const char* n : names) s += find(rs, n).runtime_s;
    return s;
  };
  auto ok = [&](std::initializer_list<const char*> names) {
    for (const char* n : names)
      if (!find(rs, n).pass) return false;
    return true;
  };

  report("criterion-1 change-of-variables exactness", ok({"change_of_variables_affine"}),
         rt({"change_of_variables_affine"}), 1.0, meas(rs, "change_of_variables_affine") + " <= 1e-9");
  report("criterion-2 fisher-pullback identity", ok({"fisher_pullback", "fisher_pullback_rate"}),
         rt({"fisher_pullback", "fisher_pullback_rate"}), 10.0,
         meas(rs, "fisher_pullback") + " <= 1e-4, halving-rate deficit " +
             meas(rs, "fisher_pullback_rate"));
  report("criterion-3 ricci oracle", ok({"ricci_fubini_study", "ricci_flat"}),
         rt({"ricci_fubini_study", "ricci_flat"}), 5.0,
         meas(rs, "ricci_fubini_study") + " <= 1e-3, " + meas(rs, "ricci_flat") + " <= 1e-8");
  report("criterion-4 jacobi formula", ok({"jacobi_formula"}), rt({"jacobi_formula"}), 1.0,
         meas(rs, "jacobi_formula") + " <= 1e-5");
  report("criterion-5 normalized-KRF recursion", ok({"nkrf_nu0_bitexact", "nkrf_cancellation"}),
         rt({"nkrf_nu0_bitexact", "nkrf_cancellation"}), 1.0,
         meas(rs, "nkrf_nu0_bitexact") + " and " + meas(rs, "nkrf_cancellation") + " exactly 0");
  report("criterion-6 KL dissipation", ok({"kl_dissipation_identity", "kl_monotone"}),
         rt({"kl_dissipation_identity", "kl_monotone"}), 30.0,
         meas(rs, "kl_dissipation_identity") + " <= 5e-3, max lhs " + meas(rs, "kl_monotone") +
             " <= 1e-6");
  report("criterion-7 perelman lab", ok({"perelman_stationary", "perelman_dt_sign"}),
         rt({"perelman_stationary", "perelman_dt_sign"}), 30.0,
         meas(rs, "perelman_stationary") + " <= 1e-10, dt-sign flip " +
             meas(rs, "perelman_dt_sign"));
  report("criterion-8 surgery",
         ok({"surgery_trigger", "surgery_mass", "surgery_monge_ampere"}),
         rt({"surgery_trigger", "surgery_mass", "surgery_monge_ampere"}), 10.0,
         meas(rs, "surgery_mass") + " <= 1e-6, trigger + positivity verified");

  // criterion 9: training end-to-end on the three datasets
  TrainOutcome moons = train_criterion("two_moons");
  report("criterion-9a training two_moons", moons.pass, moons.runtime_s, 600.0, moons.detail);
  TrainOutcome rings = train_criterion("rings");
  report("criterion-9b training rings", rings.pass, rings.runtime_s, 600.0, rings.detail);
  TrainOutcome tree = train_criterion("fractal_tree");
  report("criterion-9c training fractal_tree", tree.pass, tree.runtime_s, 600.0, tree.detail);

  // criterion 10: holomorphic bias of the fractal-tree run
  {
    const auto t0 = Clock::now();
    auto stats = holomorphy_probe(tree.stack, 5000, 1234);
    bool pass = true;
    double worst_ratio = 0.0;
    for (const auto& st : stats) {
      if (!(st.median_dzbar < st.median_dz)) pass = false;
      worst_ratio = std::max(worst_ratio, st.median_dzbar / st.median_dz);
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "per-layer median |df/dzbar| < median |df/dz| over 5000 samples (worst ratio %.3f)",
                  worst_ratio);
    report("criterion-10 holomorphic bias", pass, secs, 60.0, buf);
  }

  report("criterion-11 gradient correctness", ok({"gradient_correctness"}),
         rt({"gradient_correctness"}), 30.0, meas(rs, "gradient_correctness") + " <= 1e-4");
  report("criterion-12 diagnostics pipeline", ok({"diagnostics_gaussian_zero"}),
         rt({"diagnostics_gaussian_zero"}), 5.0,
         meas(rs, "diagnostics_gaussian_zero") + " <= 1e-6");

  int failures = 0;
  for (const Criterion& c : g_results)
    if (!c.pass) ++failures;
  std::printf("================\n%zu criteria, %d failed\n", g_results.size(), failures);
  return failures;
}
