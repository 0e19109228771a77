#pragma once

#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <limits>
#include <utility>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cfjed {

// Real inner product Re{a^H b}; coincides with the Euclidean inner product
// for real vectors.
template <typename Vec>
double real_inner(const Vec& a, const Vec& b) {
  if constexpr (std::is_same_v<typename Vec::Scalar, double>) {
    return a.dot(b);
  } else {
    return a.dot(b).real();
  }
}

// Split problem min f(z) + g(z); the gradient oracle returns the real
// gradient of f packed into the variable's layout (for complex variables
// this is 2 * df/dz*, so first-order changes are Re<grad, dz>).
template <typename Vec>
struct SplitProblem {
  std::function<double(const Vec&)> smooth;
  std::function<Vec(const Vec&)> gradient;
  std::function<Vec(const Vec&, double)> prox;
  std::function<double(const Vec&)> nonsmooth;
};

struct SolverOptions {
  int max_iter = 5000;
  double tol = 1e-6;          // gradient-norm ratio
  double tau0 = 0.0;          // <= 0: estimate from a probe step
  double tau_max = std::numeric_limits<double>::infinity();
  double shrink = 0.5;        // backtracking factor
  double tau_floor = 1e-12;
};

struct Trace {
  std::vector<double> objective;  // h = f + g, including the initial point
  std::vector<double> stepsize;
  std::vector<double> grad_norm;
  int iterations = 0;
  bool converged = false;

  void to_csv(const std::string& path) const;
};

inline void Trace::to_csv(const std::string& path) const {
  FILE* out = std::fopen(path.c_str(), "w");
  if (!out) throw std::runtime_error("cannot open " + path);
  std::fprintf(out, "iteration,objective,stepsize,grad_norm\n");
  for (std::size_t t = 0; t < objective.size(); ++t)
    std::fprintf(out, "%zu,%.17g,%.17g,%.17g\n", t, objective[t],
                 t < stepsize.size() ? stepsize[t] : 0.0,
                 t < grad_norm.size() ? grad_norm[t] : 0.0);
  std::fclose(out);
}

// Backtracking line search condition on the smooth part.
template <typename Vec>
bool line_search_ok(const Vec& z_new, const Vec& z_old, const Vec& grad_old,
                    double f_new, double f_old, double tau) {
  if (tau <= 0) throw std::invalid_argument("line_search_ok needs tau > 0");
  const Vec dz = z_new - z_old;
  const double rhs = f_old + real_inner(dz, grad_old) + dz.squaredNorm() / (2.0 * tau);
  return f_new <= rhs + 1e-12 * (1.0 + std::abs(rhs));
}

template <typename Vec>
std::pair<Vec, Trace> fbs_solve(const SplitProblem<Vec>& problem, const Vec& z0,
                                const SolverOptions& opts) {
  if (opts.tol <= 0 || opts.tol >= 1) throw std::invalid_argument("tol must be in (0,1)");
  if (opts.tau_max <= 0) throw std::invalid_argument("tau_max must be positive");

  Vec z = z0;
  Vec grad = problem.gradient(z);
  double f = problem.smooth(z);
  double h = f + problem.nonsmooth(z);
  if (!std::isfinite(f) || !grad.allFinite())
    throw std::runtime_error("fbs: non-finite objective or gradient at start");

  Trace trace;
  trace.objective.push_back(h);
  const double gnorm = grad.norm();
  // Termination uses the estimated composite gradient (z - z_new)/tau +
  // grad_new - grad, which vanishes at fixed points of the prox iteration
  // even when the raw smooth gradient cannot (e.g. at a constraint boundary).
  double rmax = 0.0;

  double tau = opts.tau0;
  if (tau <= 0) {
    // Local curvature probe along the negative gradient.
    if (gnorm > 0) {
      const Vec z1 = z - (1e-3 / gnorm) * grad;
      const Vec g1 = problem.gradient(z1);
      const double lip = (g1 - grad).norm() / (z1 - z).norm();
      tau = (lip > 0) ? 1.0 / lip : 1.0;
    } else {
      tau = 1.0;
    }
    tau = std::min(tau, opts.tau_max);
  }

  for (int t = 0; t < opts.max_iter; ++t) {
    Vec z_new;
    double f_new = 0.0, h_new = 0.0;
    bool accepted = false;
    while (tau >= opts.tau_floor) {
      z_new = problem.prox(z - tau * grad, tau);
      f_new = problem.smooth(z_new);
      h_new = f_new + problem.nonsmooth(z_new);
      if (!std::isfinite(f_new) || !std::isfinite(h_new))
        throw std::runtime_error("fbs: non-finite objective at iteration " +
                                 std::to_string(t));
      if (line_search_ok(z_new, z, grad, f_new, f, tau) && h_new <= h) {
        accepted = true;
        break;
      }
      tau *= opts.shrink;
    }
    if (!accepted) {
      // No descent step exists above the stepsize floor; treat as stationary.
      trace.converged = true;
      break;
    }

    const Vec dz = z_new - z;
    Vec grad_new = problem.gradient(z_new);
    if (!grad_new.allFinite())
      throw std::runtime_error("fbs: non-finite gradient at iteration " +
                               std::to_string(t));
    trace.objective.push_back(h_new);
    trace.stepsize.push_back(tau);
    const Vec dg = grad_new - grad;
    const double rnorm = Vec(dg - dz / tau).norm();  // estimated gradient
    trace.grad_norm.push_back(rnorm);
    trace.iterations = t + 1;

    const double step_norm = dz.norm();
    // Spectral (Barzilai-Borwein) stepsize from the last secant pair.
    const double num = dz.squaredNorm();
    const double den = real_inner(dz, dg);
    z = std::move(z_new);
    grad = std::move(grad_new);
    f = f_new;
    h = h_new;
    if (den > 0) tau = std::min(num / den, opts.tau_max);
    else tau = std::min(tau * 2.0, opts.tau_max);

    rmax = std::max(rmax, rnorm);
    if (rmax > 0 && rnorm / rmax < opts.tol) {
      trace.converged = true;
      break;
    }
    if (step_norm == 0.0) {
      trace.converged = true;
      break;
    }
  }
  return {z, trace};
}

// Central-difference check of a gradient oracle at z; returns the relative
// error over independent real and imaginary perturbations.
template <typename Vec>
double gradient_check(const std::function<double(const Vec&)>& f,
                      const std::function<Vec(const Vec&)>& gradient, const Vec& z,
                      double eps = 1e-6) {
  using Scalar = typename Vec::Scalar;
  const Vec grad = gradient(z);
  const bool is_complex = !std::is_same_v<Scalar, double>;
  const int comps = is_complex ? 2 : 1;
  Eigen::VectorXd numeric(z.size() * comps), analytic(z.size() * comps);
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    for (int c = 0; c < comps; ++c) {
      Vec zp = z, zm = z;
      Scalar delta;
      if constexpr (std::is_same_v<Scalar, double>) {
        delta = eps;
      } else {
        delta = (c == 0) ? Scalar(eps, 0) : Scalar(0, eps);
      }
      zp(i) += delta;
      zm(i) -= delta;
      numeric(comps * i + c) = (f(zp) - f(zm)) / (2.0 * eps);
      if constexpr (std::is_same_v<Scalar, double>) {
        analytic(comps * i + c) = grad(i);
      } else {
        analytic(comps * i + c) = (c == 0) ? grad(i).real() : grad(i).imag();
      }
    }
  }
  return (numeric - analytic).norm() / std::max(numeric.norm(), 1e-300);
}

}  // namespace cfjed
