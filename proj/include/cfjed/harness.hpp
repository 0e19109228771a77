#pragma once

#include <string>
#include <vector>

#include "cfjed/config.hpp"
#include "cfjed/eval.hpp"

namespace cfjed {

// Full Monte-Carlo campaign for one scenario. Each trial draws a channel,
// permutes, transmits pilots and payload, initializes, runs the joint solver
// and the baselines, and reports per-UE metrics. Deterministic given
// (config, seed); failed trials are excluded from aggregates and counted.
// When out_dir is nonempty, writes metrics.json, cdf_<metric>.csv, and
// trace_<trial>.csv there.
MetricsReport run_scenario(const SystemConfig& config, const std::string& out_dir,
                           const std::string& scenario_name = "custom");

// Pilot-overhead trade-off: per T, the per-UE MI achieved by 90% of UEs
// (10th percentile) for the joint solver and the L-MMSE baseline, next to
// the rate ceiling n_q * (K - T) / K.
struct SweepRow {
  int T = 0;
  double overhead = 0.0;   // T / K
  double mi_jed_p10 = 0.0;
  double mi_lmmse_p10 = 0.0;
  double mi_ceiling = 0.0;
};

std::vector<SweepRow> sweep_overhead(const SystemConfig& base,
                                     const std::vector<int>& T_list,
                                     const std::string& out_dir);

double percentile(Eigen::VectorXd v, double p);

}  // namespace cfjed
