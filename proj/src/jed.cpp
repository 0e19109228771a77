#include "cfjed/jed.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cfjed {

namespace {

bool inside_box(const Eigen::MatrixXcd& S_D, const Constellation& c, double slack) {
  for (Eigen::Index j = 0; j < S_D.cols(); ++j)
    for (Eigen::Index i = 0; i < S_D.rows(); ++i) {
      if (std::abs(S_D(i, j).real()) > c.alpha_re + slack) return false;
      if (std::abs(S_D(i, j).imag()) > c.alpha_im + slack) return false;
    }
  return true;
}

Eigen::VectorXcd pack(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& S_D) {
  Eigen::VectorXcd z(H.size() + S_D.size());
  z.head(H.size()) = H.reshaped();
  z.tail(S_D.size()) = S_D.reshaped();
  return z;
}

}  // namespace

double jed_objective(const JedProblem& p, const Eigen::MatrixXcd& H,
                     const Eigen::MatrixXcd& S_D) {
  if (!inside_box(S_D, p.constellation, 1e-9))
    return std::numeric_limits<double>::infinity();
  Eigen::MatrixXcd S(p.U(), p.K());
  S.leftCols(p.T()) = p.S_T;
  S.rightCols(p.D()) = S_D;
  return 0.5 * (p.Y - H * S).squaredNorm() + p.mu * H.cwiseAbs().sum() -
         0.5 * p.gamma * S_D.squaredNorm();
}

void jed_gradient(const JedProblem& p, const Eigen::MatrixXcd& H,
                  const Eigen::MatrixXcd& S_D, Eigen::MatrixXcd& grad_H,
                  Eigen::MatrixXcd& grad_SD) {
  Eigen::MatrixXcd S(p.U(), p.K());
  S.leftCols(p.T()) = p.S_T;
  S.rightCols(p.D()) = S_D;
  const Eigen::MatrixXcd residual = H * S - p.Y;
  grad_H = residual * S.adjoint();
  grad_SD = H.adjoint() * residual.rightCols(p.D());
}

Eigen::MatrixXcd prox_H(const Eigen::MatrixXcd& H, double mu_tau) {
  if (mu_tau < 0) throw std::invalid_argument("prox_H needs mu_tau >= 0");
  if (mu_tau == 0) return H;
  return H.unaryExpr([mu_tau](std::complex<double> v) {
    const double mag = std::abs(v);
    if (mag <= mu_tau) return std::complex<double>(0.0, 0.0);
    return v * ((mag - mu_tau) / mag);
  });
}

Eigen::MatrixXcd prox_S(const Eigen::MatrixXcd& S_D, double tau, double gamma,
                        const Constellation& c) {
  const double rho = tau * gamma;
  if (rho < 0 || rho >= 1) throw std::invalid_argument("prox_S needs tau*gamma in [0,1)");
  const double scale = 1.0 / (1.0 - rho);
  return S_D.unaryExpr([&](std::complex<double> v) {
    v *= scale;
    return std::complex<double>(std::clamp(v.real(), -c.alpha_re, c.alpha_re),
                                std::clamp(v.imag(), -c.alpha_im, c.alpha_im));
  });
}

bool biconvexity_check(const Eigen::MatrixXcd& H, double gamma) {
  if (H.size() == 0) throw std::invalid_argument("biconvexity_check needs nonempty H");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H.adjoint() * H);
  return es.eigenvalues().minCoeff() >= gamma;
}

JedResult run_jed(const JedProblem& p, const Eigen::MatrixXcd& H0,
                  const Eigen::MatrixXcd& SD0, const SolverOptions& opts) {
  if (H0.rows() != p.B() || H0.cols() != p.U() || SD0.rows() != p.U() ||
      SD0.cols() != p.D())
    throw std::invalid_argument("run_jed: initializer shape mismatch");

  const Eigen::Index nh = H0.size();
  const Eigen::Index nd = SD0.size();
  auto unpack_H = [&](const Eigen::VectorXcd& z) {
    return Eigen::MatrixXcd(z.head(nh).reshaped(p.B(), p.U()));
  };
  auto unpack_SD = [&](const Eigen::VectorXcd& z) {
    return Eigen::MatrixXcd(z.tail(nd).reshaped(p.U(), p.D()));
  };

  SplitProblem<Eigen::VectorXcd> sp;
  sp.smooth = [&](const Eigen::VectorXcd& z) {
    Eigen::MatrixXcd S(p.U(), p.K());
    S.leftCols(p.T()) = p.S_T;
    S.rightCols(p.D()) = unpack_SD(z);
    return 0.5 * (p.Y - unpack_H(z) * S).squaredNorm();
  };
  sp.gradient = [&](const Eigen::VectorXcd& z) {
    Eigen::MatrixXcd gh, gs;
    jed_gradient(p, unpack_H(z), unpack_SD(z), gh, gs);
    return pack(gh, gs);
  };
  sp.prox = [&](const Eigen::VectorXcd& z, double tau) {
    return pack(prox_H(unpack_H(z), p.mu * tau),
                prox_S(unpack_SD(z), tau, p.gamma, p.constellation));
  };
  sp.nonsmooth = [&](const Eigen::VectorXcd& z) {
    if (!inside_box(unpack_SD(z), p.constellation, 1e-9))
      return std::numeric_limits<double>::infinity();
    return p.mu * z.head(nh).cwiseAbs().sum() - 0.5 * p.gamma * z.tail(nd).squaredNorm();
  };

  SolverOptions o = opts;
  if (p.gamma > 0) o.tau_max = std::min(o.tau_max, 0.99 / p.gamma);

  // Project the data initializer into the box before starting.
  auto [z, trace] =
      fbs_solve(sp, pack(H0, prox_S(SD0, 0.0, 0.0, p.constellation)), o);
  return {unpack_H(z), unpack_SD(z), std::move(trace)};
}

QuantizedData quantize(const Eigen::MatrixXcd& soft, const Constellation& c) {
  QuantizedData q;
  q.symbols.resize(soft.rows(), soft.cols());
  for (Eigen::Index j = 0; j < soft.cols(); ++j)
    for (Eigen::Index i = 0; i < soft.rows(); ++i)
      q.symbols(i, j) = c.nearest(soft(i, j));
  q.bits = symbols_to_bits(c, q.symbols);
  return q;
}

Eigen::MatrixXi symbols_to_bits(const Constellation& c, const Eigen::MatrixXi& idx) {
  const int nq = c.bits_per_symbol;
  Eigen::MatrixXi bits(idx.rows(), idx.cols() * nq);
  for (Eigen::Index j = 0; j < idx.cols(); ++j)
    for (Eigen::Index i = 0; i < idx.rows(); ++i) {
      const std::uint32_t label = c.labels[idx(i, j)];
      for (int b = 0; b < nq; ++b) bits(i, j * nq + b) = (label >> b) & 1;
    }
  return bits;
}

}  // namespace cfjed
