#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cfjed/constellation.hpp"
#include "cfjed/fbs.hpp"

namespace cfjed {

// Pilot-only l1-regularized LS channel estimate (baseline):
//   min 1/2 ||Y_T - H S_T||_F^2 + mu1 ||H||_1.
Eigen::MatrixXcd l1_chest(const Eigen::MatrixXcd& Y_T, const Eigen::MatrixXcd& S_T,
                          double mu1, const SolverOptions& opts = {});

// L-MMSE equalizer (H^H H + reg I)^{-1} H^H Y_D with an explicit regularizer.
Eigen::MatrixXcd lmmse_detect(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& Y_D,
                              double noise_reg);

// Genie-aided SIMO bound: cancel every other UE's contribution with perfect
// knowledge, then matched-filter s_u = h_u^H y_u / ||h_u||^2.
Eigen::MatrixXcd simo_bound(const Eigen::MatrixXcd& H_true,
                            const Eigen::MatrixXcd& Y_D,
                            const Eigen::MatrixXcd& S_D_true);

// Per-UE root-mean-squared symbol error of soft payload estimates,
// sqrt(sum_k |s_hat - s|^2 / sum_k |s|^2) over the D payload slots.
Eigen::VectorXd rmsse_per_ue(const Eigen::MatrixXcd& S_D_hat,
                             const Eigen::MatrixXcd& S_D_true);

// Per-UE bit error rate; rows are UEs, columns the n_q * D payload bits.
Eigen::VectorXd ber_per_ue(const Eigen::MatrixXi& bits_hat,
                           const Eigen::MatrixXi& bits_true);

// Per-UE plug-in mutual information (bits/symbol) between transmitted and
// quantized detected constellation indices, scaled by the payload fraction
// (K - T)/K. Rows are UEs; columns may pool payload slots from many trials.
Eigen::VectorXd mi_per_ue(const Eigen::MatrixXi& symbols_true,
                          const Eigen::MatrixXi& symbols_hat, int K, int T);

// Per-UE channel estimation error ||h_hat_u - h_u||^2 / B.
Eigen::VectorXd mse_per_ue(const Eigen::MatrixXcd& H_hat,
                           const Eigen::MatrixXcd& H_true);

// Empirical CDF support points: sorted values x_i with P(X <= x_i) = i/n.
struct Cdf {
  std::vector<double> values;
  std::vector<double> probs;
};
Cdf make_cdf(const Eigen::VectorXd& samples);
void write_cdf_csv(const Cdf& cdf, const std::string& metric, const std::string& path);

double vector_median(Eigen::VectorXd v);
double fraction_below(const Eigen::VectorXd& v, double threshold);

// Aggregated per-scenario metrics; the per-UE vectors concatenate one entry
// per UE per trial, mi is one pooled entry per UE rank.
struct MetricsReport {
  std::string scenario;
  int trials = 0;
  int failed_trials = 0;
  Eigen::VectorXd rmsse, ber, mse, mi;
  Eigen::VectorXd rmsse_l1, ber_l1, mse_l1, mi_l1;
  Eigen::VectorXd rmsse_simo, ber_simo;
  double median_iterations = 0.0;

  void write_json(const std::string& path) const;
  void write_cdfs(const std::string& dir) const;
};

}  // namespace cfjed
