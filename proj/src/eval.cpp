#include "cfjed/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include "json.hpp"

namespace cfjed {

Eigen::MatrixXcd l1_chest(const Eigen::MatrixXcd& Y_T, const Eigen::MatrixXcd& S_T,
                          double mu1, const SolverOptions& opts) {
  if (mu1 < 0) throw std::invalid_argument("l1_chest needs mu1 >= 0");
  if (Y_T.cols() != S_T.cols()) throw std::invalid_argument("l1_chest: shape mismatch");
  const auto B = Y_T.rows();
  const auto U = S_T.rows();

  SplitProblem<Eigen::VectorXcd> sp;
  auto mat = [&](const Eigen::VectorXcd& z) {
    return Eigen::MatrixXcd(z.reshaped(B, U));
  };
  sp.smooth = [&](const Eigen::VectorXcd& z) {
    return 0.5 * (Y_T - mat(z) * S_T).squaredNorm();
  };
  sp.gradient = [&](const Eigen::VectorXcd& z) {
    return Eigen::VectorXcd(((mat(z) * S_T - Y_T) * S_T.adjoint()).reshaped());
  };
  sp.prox = [&](const Eigen::VectorXcd& z, double tau) {
    const double thr = mu1 * tau;
    if (thr == 0) return z;
    return Eigen::VectorXcd(z.unaryExpr([thr](std::complex<double> v) {
      const double mag = std::abs(v);
      if (mag <= thr) return std::complex<double>(0.0, 0.0);
      return v * ((mag - thr) / mag);
    }));
  };
  sp.nonsmooth = [&](const Eigen::VectorXcd& z) { return mu1 * z.cwiseAbs().sum(); };

  auto [z, trace] =
      fbs_solve(sp, Eigen::VectorXcd(Eigen::VectorXcd::Zero(B * U)), opts);
  (void)trace;
  return mat(z);
}

Eigen::MatrixXcd lmmse_detect(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& Y_D,
                              double noise_reg) {
  if (H.rows() != Y_D.rows()) throw std::invalid_argument("lmmse_detect: shape mismatch");
  if (noise_reg < 0) throw std::invalid_argument("lmmse_detect needs noise_reg >= 0");
  const auto U = H.cols();
  const Eigen::MatrixXcd gram =
      H.adjoint() * H + noise_reg * Eigen::MatrixXcd::Identity(U, U);
  return gram.ldlt().solve(H.adjoint() * Y_D);
}

Eigen::MatrixXcd simo_bound(const Eigen::MatrixXcd& H_true,
                            const Eigen::MatrixXcd& Y_D,
                            const Eigen::MatrixXcd& S_D_true) {
  const auto U = H_true.cols();
  const auto D = Y_D.cols();
  if (S_D_true.rows() != U || S_D_true.cols() != D || H_true.rows() != Y_D.rows())
    throw std::invalid_argument("simo_bound: shape mismatch");
  const Eigen::MatrixXcd clean = Y_D - H_true * S_D_true;
  Eigen::MatrixXcd out(U, D);
  for (Eigen::Index u = 0; u < U; ++u) {
    const Eigen::VectorXcd h = H_true.col(u);
    const double energy = h.squaredNorm();
    if (energy <= 0) throw std::invalid_argument("simo_bound: zero channel column");
    // Add this UE's own contribution back to the interference-free residual.
    out.row(u) = (h.adjoint() * (clean + h * S_D_true.row(u))) / energy;
  }
  return out;
}

Eigen::VectorXd rmsse_per_ue(const Eigen::MatrixXcd& S_D_hat,
                             const Eigen::MatrixXcd& S_D_true) {
  if (S_D_hat.rows() != S_D_true.rows() || S_D_hat.cols() != S_D_true.cols())
    throw std::invalid_argument("rmsse_per_ue: shape mismatch");
  if (S_D_true.cols() < 1) throw std::invalid_argument("rmsse_per_ue needs D >= 1");
  Eigen::VectorXd out(S_D_true.rows());
  for (Eigen::Index u = 0; u < S_D_true.rows(); ++u) {
    const double energy = S_D_true.row(u).squaredNorm();
    if (energy <= 0) throw std::invalid_argument("rmsse_per_ue: zero-energy truth row");
    out(u) = std::sqrt((S_D_hat.row(u) - S_D_true.row(u)).squaredNorm() / energy);
  }
  return out;
}

Eigen::VectorXd ber_per_ue(const Eigen::MatrixXi& bits_hat,
                           const Eigen::MatrixXi& bits_true) {
  if (bits_hat.rows() != bits_true.rows() || bits_hat.cols() != bits_true.cols())
    throw std::invalid_argument("ber_per_ue: shape mismatch");
  Eigen::VectorXd out(bits_true.rows());
  for (Eigen::Index u = 0; u < bits_true.rows(); ++u) {
    int errors = 0;
    for (Eigen::Index k = 0; k < bits_true.cols(); ++k)
      errors += bits_hat(u, k) != bits_true(u, k);
    out(u) = double(errors) / double(bits_true.cols());
  }
  return out;
}

namespace {

double entropy_bits(const std::map<int, int>& counts, int total) {
  double h = 0.0;
  for (const auto& [sym, cnt] : counts) {
    const double p = double(cnt) / total;
    h -= p * std::log2(p);
  }
  return h;
}

}  // namespace

Eigen::VectorXd mi_per_ue(const Eigen::MatrixXi& symbols_true,
                          const Eigen::MatrixXi& symbols_hat, int K, int T) {
  if (symbols_true.rows() != symbols_hat.rows() ||
      symbols_true.cols() != symbols_hat.cols())
    throw std::invalid_argument("mi_per_ue: shape mismatch");
  if (symbols_true.cols() < 1) throw std::invalid_argument("mi_per_ue: empty sample");
  if (K <= 0 || T < 0 || T >= K) throw std::invalid_argument("mi_per_ue: bad K, T");
  const double fraction = double(K - T) / double(K);
  const int n = static_cast<int>(symbols_true.cols());

  Eigen::VectorXd out(symbols_true.rows());
  for (Eigen::Index u = 0; u < symbols_true.rows(); ++u) {
    std::map<int, int> src, det;
    std::map<std::pair<int, int>, int> joint;
    for (int k = 0; k < n; ++k) {
      ++src[symbols_true(u, k)];
      ++det[symbols_hat(u, k)];
      ++joint[{symbols_true(u, k), symbols_hat(u, k)}];
    }
    // I(S; S_hat) = H(S) + H(S_hat) - H(S, S_hat), plug-in estimates.
    double hj = 0.0;
    for (const auto& [pair, cnt] : joint) {
      const double p = double(cnt) / n;
      hj -= p * std::log2(p);
    }
    const double mi = entropy_bits(src, n) + entropy_bits(det, n) - hj;
    out(u) = fraction * std::max(0.0, mi);
  }
  return out;
}

Eigen::VectorXd mse_per_ue(const Eigen::MatrixXcd& H_hat,
                           const Eigen::MatrixXcd& H_true) {
  if (H_hat.rows() != H_true.rows() || H_hat.cols() != H_true.cols())
    throw std::invalid_argument("mse_per_ue: shape mismatch");
  return (H_hat - H_true).colwise().squaredNorm().transpose() / double(H_true.rows());
}

Cdf make_cdf(const Eigen::VectorXd& samples) {
  if (samples.size() == 0) throw std::invalid_argument("make_cdf needs samples");
  Cdf cdf;
  cdf.values.assign(samples.data(), samples.data() + samples.size());
  std::sort(cdf.values.begin(), cdf.values.end());
  cdf.probs.resize(cdf.values.size());
  for (std::size_t i = 0; i < cdf.probs.size(); ++i)
    cdf.probs[i] = double(i + 1) / double(cdf.probs.size());
  return cdf;
}

void write_cdf_csv(const Cdf& cdf, const std::string& metric, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "metric,x,p\n";
  for (std::size_t i = 0; i < cdf.values.size(); ++i)
    out << metric << "," << cdf.values[i] << "," << cdf.probs[i] << "\n";
}

double vector_median(Eigen::VectorXd v) {
  if (v.size() == 0) throw std::invalid_argument("median of empty vector");
  const auto mid = v.data() + v.size() / 2;
  std::nth_element(v.data(), mid, v.data() + v.size());
  double m = *mid;
  if (v.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(v.data(), mid));
  }
  return m;
}

double fraction_below(const Eigen::VectorXd& v, double threshold) {
  if (v.size() == 0) throw std::invalid_argument("fraction_below of empty vector");
  return double((v.array() < threshold).count()) / double(v.size());
}

namespace {

nlohmann::json vec_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

void MetricsReport::write_json(const std::string& path) const {
  nlohmann::json j;
  j["scenario"] = scenario;
  j["trials"] = trials;
  j["failed_trials"] = failed_trials;
  j["median_iterations"] = median_iterations;
  j["note"] = "mi pools payload symbols across trials per UE rank";
  j["jed"] = {{"rmsse", vec_json(rmsse)}, {"ber", vec_json(ber)},
              {"mse", vec_json(mse)},     {"mi", vec_json(mi)}};
  j["l1_lmmse"] = {{"rmsse", vec_json(rmsse_l1)}, {"ber", vec_json(ber_l1)},
                   {"mse", vec_json(mse_l1)},     {"mi", vec_json(mi_l1)}};
  j["simo"] = {{"rmsse", vec_json(rmsse_simo)}, {"ber", vec_json(ber_simo)}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << j.dump(2) << "\n";
}

void MetricsReport::write_cdfs(const std::string& dir) const {
  const std::pair<const char*, const Eigen::VectorXd*> metrics[] = {
      {"rmsse", &rmsse}, {"ber", &ber}, {"mse", &mse}, {"mi", &mi},
      {"rmsse_l1", &rmsse_l1}, {"ber_l1", &ber_l1}};
  for (const auto& [name, v] : metrics) {
    if (v->size() == 0) continue;
    write_cdf_csv(make_cdf(*v), name, dir + "/cdf_" + name + ".csv");
  }
}

}  // namespace cfjed
