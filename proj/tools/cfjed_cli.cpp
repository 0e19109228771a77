#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cfjed/channel.hpp"
#include "cfjed/config.hpp"
#include "cfjed/constellation.hpp"
#include "cfjed/frames.hpp"
#include "cfjed/harness.hpp"
#include "cfjed/init.hpp"
#include "cfjed/jed.hpp"

namespace {

cfjed::SystemConfig resolve_scenario(const std::string& name) {
  if (cfjed::has_preset(name)) return cfjed::preset(name);
  return cfjed::load_config(name);
}

struct CommonFlags {
  std::int64_t seed = -1;
  int trials = 0;
  int workers = -1;
  std::string out_dir = "out";
  std::string perm;

  void apply(cfjed::SystemConfig& c) const {
    if (seed >= 0) c.seed = static_cast<std::uint64_t>(seed);
    if (trials > 0) c.trials = trials;
    if (workers >= 0) c.workers = workers;
    if (!perm.empty()) c.perm = cfjed::perm_from_string(perm);
  }
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--seed", f.seed, "RNG seed (overrides scenario)");
  cmd->add_option("--trials", f.trials, "Monte-Carlo trials (overrides scenario)");
  cmd->add_option("--out-dir", f.out_dir, "output directory");
  cmd->add_option("--workers", f.workers, "worker threads (0 = all cores)");
  cmd->add_option("--perm", f.perm, "permutation mode: none, csi, phy")
      ->check(CLI::IsMember({"none", "csi", "phy"}));
}

int selftest() {
  int failures = 0;
  auto check = [&](bool ok, const char* what) {
    std::printf("[%s] %s\n", ok ? "ok" : "FAIL", what);
    if (!ok) ++failures;
  };
  try {
    cfjed::Rng rng = cfjed::make_rng(1, 1);
    const cfjed::FrameMatrix mub = cfjed::build_mub(8, 2);
    check(cfjed::check_ambiguity(mub.F), "MUB frame passes the ambiguity guard");
    const cfjed::FrameMatrix etf = cfjed::build_etf(7, 14, rng);
    check(cfjed::coherence(etf.F) <= 1.1 * cfjed::welch_bound(7, 14),
          "ETF coherence near the Welch bound");

    cfjed::SystemConfig c = cfjed::preset("smoke");
    c.trials = 2;
    c.workers = 1;
    const cfjed::MetricsReport rep = cfjed::run_scenario(c, "", "selftest");
    check(rep.failed_trials == 0, "smoke scenario runs all trials");
    check(rep.ber.minCoeff() >= 0.0 && rep.ber.maxCoeff() <= 1.0, "BER in [0,1]");
    const int n_q = cfjed::make_constellation(c.modulation).bits_per_symbol;
    check(rep.mi.maxCoeff() <= n_q * double(c.K - c.T) / c.K + 1e-9,
          "MI below the rate ceiling");
  } catch (const std::exception& e) {
    std::printf("[FAIL] selftest aborted: %s\n", e.what());
    ++failures;
  }
  std::printf("selftest: %s\n", failures == 0 ? "pass" : "fail");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cell-free massive MU-MIMO joint channel estimation and detection"};
  app.require_subcommand(1);

  std::string scenario;
  CommonFlags run_flags;
  CLI::App* run = app.add_subcommand("run", "run a Monte-Carlo scenario");
  run->add_option("scenario", scenario, "preset name (" + cfjed::preset_names() +
                                            ") or config file path")
      ->required();
  add_common(run, run_flags);

  std::string sweep_scenario = "fig4";
  std::vector<int> T_list;
  CommonFlags sweep_flags;
  CLI::App* sweep = app.add_subcommand("sweep", "pilot-overhead trade-off sweep");
  sweep->add_option("--scenario", sweep_scenario, "base preset or config file");
  sweep->add_option("--T", T_list, "pilot counts to sweep");
  add_common(sweep, sweep_flags);

  CLI::App* frames = app.add_subcommand("frames", "frame utilities");
  int frame_T = 8, frame_N = 2, frame_U = 0;
  std::string frame_kind = "mub", frame_out = "frame.csv";
  std::int64_t frame_seed = 0;
  CLI::App* fbuild = frames->add_subcommand("build", "construct and export a frame");
  fbuild->add_option("--kind", frame_kind, "mub or etf")
      ->check(CLI::IsMember({"mub", "etf"}));
  fbuild->add_option("--T", frame_T, "pilot length");
  fbuild->add_option("--N", frame_N, "MUB blocks");
  fbuild->add_option("--U", frame_U, "ETF columns");
  fbuild->add_option("--seed", frame_seed, "ETF search seed");
  fbuild->add_option("--out", frame_out, "output CSV path");
  frames->require_subcommand(1);

  app.add_subcommand("selftest", "quick end-to-end sanity checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      cfjed::SystemConfig c = resolve_scenario(scenario);
      run_flags.apply(c);
      const std::string name = cfjed::has_preset(scenario) ? scenario : "custom";
      const cfjed::MetricsReport rep = cfjed::run_scenario(c, run_flags.out_dir, name);
      std::printf("scenario %s: %d/%d trials ok, median RMSSE %.4f, "
                  "median BER %.2e, median MI %.3f bits/symbol\n",
                  name.c_str(), rep.trials - rep.failed_trials, rep.trials,
                  cfjed::vector_median(rep.rmsse), cfjed::vector_median(rep.ber),
                  cfjed::vector_median(rep.mi));
      std::printf("outputs written to %s\n", run_flags.out_dir.c_str());
      return 0;
    }
    if (sweep->parsed()) {
      cfjed::SystemConfig c = resolve_scenario(sweep_scenario);
      sweep_flags.apply(c);
      if (T_list.empty()) T_list = {16, 32, 48, 64, 96, 128};
      const auto rows = cfjed::sweep_overhead(c, T_list, sweep_flags.out_dir);
      std::printf("T,overhead,mi_jed_p10,mi_lmmse_p10,mi_ceiling\n");
      for (const auto& r : rows)
        std::printf("%d,%.3f,%.4f,%.4f,%.4f\n", r.T, r.overhead, r.mi_jed_p10,
                    r.mi_lmmse_p10, r.mi_ceiling);
      return 0;
    }
    if (fbuild->parsed()) {
      cfjed::FrameMatrix fm;
      if (frame_kind == "mub") {
        fm = cfjed::build_mub(frame_T, frame_N);
      } else {
        if (frame_U <= 0) throw std::invalid_argument("etf needs --U");
        cfjed::Rng rng = cfjed::make_rng(static_cast<std::uint64_t>(frame_seed), 0);
        fm = cfjed::build_etf(frame_T, frame_U, rng);
      }
      cfjed::export_frame_csv(fm, frame_out);
      std::printf("%s frame %dx%d, coherence %.6f (Welch %.6f), wrote %s\n",
                  frame_kind.c_str(), fm.T(), fm.U(), cfjed::coherence(fm.F),
                  cfjed::welch_bound(fm.T(), fm.U()), frame_out.c_str());
      return 0;
    }
    return selftest();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
