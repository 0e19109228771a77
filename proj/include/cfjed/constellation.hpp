#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "cfjed/config.hpp"
#include "cfjed/rng.hpp"

namespace cfjed {

// Unit-energy constellation with Gray bit labels. The convex hull is a box
// with per-axis radii (alpha_re, alpha_im); BPSK degenerates to a segment.
struct Constellation {
  Modulation kind = Modulation::BPSK;
  std::vector<std::complex<double>> points;
  std::vector<std::uint32_t> labels;  // Gray label of points[i]
  int bits_per_symbol = 1;
  double alpha_re = 1.0;
  double alpha_im = 0.0;

  int size() const { return static_cast<int>(points.size()); }
  // Nearest point in Euclidean distance; ties break toward the smaller index.
  int nearest(std::complex<double> z) const;
};

Constellation make_constellation(Modulation m);

Eigen::MatrixXi draw_symbols(const Constellation& c, Eigen::Index rows,
                             Eigen::Index cols, Rng& rng);
Eigen::MatrixXcd symbols_to_values(const Constellation& c, const Eigen::MatrixXi& idx);

}  // namespace cfjed
