#pragma once

#include <Eigen/Dense>

#include "cfjed/config.hpp"
#include "cfjed/rng.hpp"

namespace cfjed {

struct Geometry {
  Eigen::MatrixX2d ap_positions;  // B x 2, meters
  Eigen::MatrixX2d ue_positions;  // U x 2, meters
  double area_side = 0.0;
  double ap_height = 15.0;
  double ue_height = 1.65;
};

struct ChannelRealization {
  Geometry geometry;
  Eigen::MatrixXd beta;    // B x U large-scale gains, linear
  Eigen::MatrixXcd G;      // B x U cell-free channel
  Eigen::VectorXd Lambda;  // U power-control coefficients lambda_u
  Eigen::MatrixXcd H;      // B x U effective channel, sqrt(rho)*G*diag(Lambda)
  double rho_u = 0.0;      // normalized uplink SNR
};

struct Frame {
  Eigen::MatrixXcd S;  // U x K, [S_T | S_D]
  Eigen::MatrixXcd Y;  // B x K
  double N0 = 1.0;
};

// Normalized uplink SNR: 100 mW transmit power over thermal noise in 20 MHz
// with a 9 dB noise figure; the receive noise is then rescaled to N0 = 1.
double uplink_snr();

Geometry place_nodes(const SystemConfig& config, Rng& rng);

// Three-slope path loss at 1.9 GHz (Hata-COST231 constant, breakpoints at
// 10 m and 50 m) in linear scale; distance is 3-D including antenna heights.
double path_loss_linear(double distance_m);

Eigen::MatrixXd large_scale(const Geometry& geometry, double sigma_sh_db, Rng& rng);

Eigen::VectorXd power_control(const Eigen::MatrixXcd& G, double P_db);

ChannelRealization make_channel(const SystemConfig& config, Rng& rng);

Eigen::MatrixXcd transmit(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& S,
                          double N0, Rng& rng);

}  // namespace cfjed
