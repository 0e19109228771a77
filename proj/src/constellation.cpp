#include "cfjed/constellation.hpp"

#include <cmath>

namespace cfjed {

namespace {

// 2-bit Gray code over amplitude levels {-3,-1,1,3}.
constexpr double kLevels4[4] = {-3.0, -1.0, 1.0, 3.0};
constexpr std::uint32_t kGray4[4] = {0b00, 0b01, 0b11, 0b10};

}  // namespace

int Constellation::nearest(std::complex<double> z) const {
  int best = 0;
  double best_d = std::norm(z - points[0]);
  for (int i = 1; i < size(); ++i) {
    const double d = std::norm(z - points[i]);
    if (d < best_d - 1e-15 * (1.0 + best_d)) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

Constellation make_constellation(Modulation m) {
  Constellation c;
  c.kind = m;
  switch (m) {
    case Modulation::BPSK:
      c.points = {{1.0, 0.0}, {-1.0, 0.0}};
      c.labels = {0, 1};
      c.bits_per_symbol = 1;
      c.alpha_re = 1.0;
      c.alpha_im = 0.0;
      break;
    case Modulation::QPSK: {
      const double a = 1.0 / std::sqrt(2.0);
      // bit0 = Re sign, bit1 = Im sign; one bit flips between neighbors.
      c.points = {{a, a}, {-a, a}, {a, -a}, {-a, -a}};
      c.labels = {0b00, 0b01, 0b10, 0b11};
      c.bits_per_symbol = 2;
      c.alpha_re = a;
      c.alpha_im = a;
      break;
    }
    case Modulation::QAM16: {
      const double s = 1.0 / std::sqrt(10.0);
      for (int i = 0; i < 4; ++i) {
        for (int q = 0; q < 4; ++q) {
          c.points.emplace_back(kLevels4[i] * s, kLevels4[q] * s);
          c.labels.push_back(kGray4[i] | (kGray4[q] << 2));
        }
      }
      c.bits_per_symbol = 4;
      c.alpha_re = 3.0 * s;
      c.alpha_im = 3.0 * s;
      break;
    }
  }
  return c;
}

Eigen::MatrixXi draw_symbols(const Constellation& c, Eigen::Index rows,
                             Eigen::Index cols, Rng& rng) {
  std::uniform_int_distribution<int> pick(0, c.size() - 1);
  Eigen::MatrixXi idx(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) idx(i, j) = pick(rng);
  return idx;
}

Eigen::MatrixXcd symbols_to_values(const Constellation& c, const Eigen::MatrixXi& idx) {
  Eigen::MatrixXcd v(idx.rows(), idx.cols());
  for (Eigen::Index j = 0; j < idx.cols(); ++j)
    for (Eigen::Index i = 0; i < idx.rows(); ++i) v(i, j) = c.points[idx(i, j)];
  return v;
}

}  // namespace cfjed
