#pragma once

#include <Eigen/Dense>

#include "cfjed/constellation.hpp"
#include "cfjed/fbs.hpp"

namespace cfjed {

// Relaxed MAP joint channel estimation and data detection problem:
//   min 1/2 ||Y - H [S_T | S_D]||_F^2 + mu ||H||_1 - gamma/2 ||S_D||_F^2
// over H and box-constrained S_D; pilot columns are constants.
struct JedProblem {
  Eigen::MatrixXcd Y;    // B x K
  Eigen::MatrixXcd S_T;  // U x T
  Constellation constellation;
  double mu = 0.0;
  double gamma = 0.0;

  int B() const { return static_cast<int>(Y.rows()); }
  int K() const { return static_cast<int>(Y.cols()); }
  int U() const { return static_cast<int>(S_T.rows()); }
  int T() const { return static_cast<int>(S_T.cols()); }
  int D() const { return K() - T(); }
};

struct JedResult {
  Eigen::MatrixXcd H;
  Eigen::MatrixXcd S_D;  // soft estimates
  Trace trace;
};

double jed_objective(const JedProblem& p, const Eigen::MatrixXcd& H,
                     const Eigen::MatrixXcd& S_D);

// Real-gradient blocks of the smooth term; pilot columns are not variables
// and carry no gradient.
void jed_gradient(const JedProblem& p, const Eigen::MatrixXcd& H,
                  const Eigen::MatrixXcd& S_D, Eigen::MatrixXcd& grad_H,
                  Eigen::MatrixXcd& grad_SD);

// Entrywise complex soft threshold; 0/|0| is taken as 0.
Eigen::MatrixXcd prox_H(const Eigen::MatrixXcd& H, double mu_tau);

// Scale by 1/(1 - tau*gamma) then clamp real and imaginary parts to the
// constellation box. Requires tau*gamma in [0, 1).
Eigen::MatrixXcd prox_S(const Eigen::MatrixXcd& S_D, double tau, double gamma,
                        const Constellation& c);

// Biconvexity condition: smallest eigenvalue of H^H H at least gamma.
bool biconvexity_check(const Eigen::MatrixXcd& H, double gamma);

JedResult run_jed(const JedProblem& p, const Eigen::MatrixXcd& H0,
                  const Eigen::MatrixXcd& SD0, const SolverOptions& opts);

struct QuantizedData {
  Eigen::MatrixXi symbols;  // constellation indices
  Eigen::MatrixXi bits;     // rows x (bits_per_symbol * cols), Gray labels
};

QuantizedData quantize(const Eigen::MatrixXcd& soft, const Constellation& c);
Eigen::MatrixXi symbols_to_bits(const Constellation& c, const Eigen::MatrixXi& idx);

}  // namespace cfjed
