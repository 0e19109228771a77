#include "cfjed/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace cfjed {

namespace {

constexpr double kCarrierMHz = 1900.0;
constexpr double kApHeight = 15.0;
constexpr double kUeHeight = 1.65;
constexpr double kBreak0Km = 0.010;  // 10 m
constexpr double kBreak1Km = 0.050;  // 50 m

// Hata-COST231 propagation constant L at 1.9 GHz with the antenna heights above.
double hata_constant() {
  const double lf = std::log10(kCarrierMHz);
  return 46.3 + 33.9 * lf - 13.82 * std::log10(kApHeight) -
         (1.1 * lf - 0.7) * kUeHeight + (1.56 * lf - 0.8);
}

}  // namespace

double uplink_snr() {
  const double ptx_dbm = 10.0 * std::log10(100.0);  // 100 mW
  const double noise_dbm = -174.0 + 10.0 * std::log10(20e6) + 9.0;
  return std::pow(10.0, (ptx_dbm - noise_dbm) / 10.0);
}

Geometry place_nodes(const SystemConfig& config, Rng& rng) {
  if (config.area_m <= 0) throw std::invalid_argument("area_m must be positive");
  std::uniform_real_distribution<double> coord(0.0, config.area_m);
  Geometry g;
  g.area_side = config.area_m;
  g.ap_height = kApHeight;
  g.ue_height = kUeHeight;
  g.ap_positions.resize(config.B, 2);
  g.ue_positions.resize(config.U, 2);
  for (int b = 0; b < config.B; ++b) {
    g.ap_positions(b, 0) = coord(rng);
    g.ap_positions(b, 1) = coord(rng);
  }
  for (int u = 0; u < config.U; ++u) {
    g.ue_positions(u, 0) = coord(rng);
    g.ue_positions(u, 1) = coord(rng);
  }
  return g;
}

double path_loss_linear(double distance_m) {
  if (distance_m <= 0) throw std::invalid_argument("nonpositive distance");
  const double l = hata_constant();
  const double d_km = std::max(distance_m / 1000.0, kBreak0Km);
  double pl_db;
  if (d_km > kBreak1Km) {
    pl_db = -l - 35.0 * std::log10(d_km);
  } else {
    pl_db = -l - 15.0 * std::log10(kBreak1Km) - 20.0 * std::log10(d_km);
  }
  return std::pow(10.0, pl_db / 10.0);
}

Eigen::MatrixXd large_scale(const Geometry& geometry, double sigma_sh_db, Rng& rng) {
  const auto B = geometry.ap_positions.rows();
  const auto U = geometry.ue_positions.rows();
  const double dh = geometry.ap_height - geometry.ue_height;
  std::normal_distribution<double> shadow(0.0, 1.0);
  Eigen::MatrixXd beta(B, U);
  for (Eigen::Index u = 0; u < U; ++u) {
    for (Eigen::Index b = 0; b < B; ++b) {
      const double dx = geometry.ap_positions(b, 0) - geometry.ue_positions(u, 0);
      const double dy = geometry.ap_positions(b, 1) - geometry.ue_positions(u, 1);
      const double d = std::sqrt(dx * dx + dy * dy + dh * dh);
      const double z = shadow(rng);
      beta(b, u) = path_loss_linear(d) * std::pow(10.0, sigma_sh_db * z / 10.0);
    }
  }
  return beta;
}

Eigen::VectorXd power_control(const Eigen::MatrixXcd& G, double P_db) {
  const auto U = G.cols();
  Eigen::VectorXd norms(U);
  for (Eigen::Index u = 0; u < U; ++u) {
    norms(u) = G.col(u).squaredNorm();
    if (norms(u) <= 0) throw std::invalid_argument("zero column in G");
  }
  const double cap = std::pow(10.0, P_db / 10.0) * norms.minCoeff();
  Eigen::VectorXd lambda(U);
  for (Eigen::Index u = 0; u < U; ++u)
    lambda(u) = std::sqrt(std::min(norms(u), cap) / norms(u));
  return lambda;
}

ChannelRealization make_channel(const SystemConfig& config, Rng& rng) {
  ChannelRealization ch;
  ch.geometry = place_nodes(config, rng);
  ch.beta = large_scale(ch.geometry, config.sigma_sh_db, rng);
  ch.G = ch.beta.cwiseSqrt().cast<std::complex<double>>().cwiseProduct(
      randn_cmat(rng, config.B, config.U));
  ch.Lambda = power_control(ch.G, config.P_db);
  ch.rho_u = uplink_snr();
  ch.H = std::sqrt(ch.rho_u) * ch.G * ch.Lambda.asDiagonal();
  return ch;
}

Eigen::MatrixXcd transmit(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& S,
                          double N0, Rng& rng) {
  if (H.cols() != S.rows()) throw std::invalid_argument("H/S dimension mismatch");
  Eigen::MatrixXcd Y = H * S;
  if (N0 > 0) Y += randn_cmat(rng, Y.rows(), Y.cols(), N0);
  return Y;
}

}  // namespace cfjed
