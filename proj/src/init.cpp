#include "cfjed/init.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace cfjed {

Eigen::MatrixXcd ls_block_chest(const Eigen::MatrixXcd& Y_T_perm,
                                const Eigen::MatrixXcd& pilot_blocks, int n_cells) {
  const auto B = Y_T_perm.rows();
  const auto U = pilot_blocks.rows();
  const auto T = Y_T_perm.cols();
  if (pilot_blocks.cols() != T) throw std::invalid_argument("pilot/observation mismatch");
  if (n_cells < 1 || B % n_cells != 0 || U % n_cells != 0)
    throw std::invalid_argument("n_cells must divide B and U");
  if (U / n_cells != T)
    throw std::invalid_argument("block LS needs square pilot blocks (U/N == T)");

  const auto Bn = B / n_cells;
  const auto Un = U / n_cells;
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(B, U);
  for (int n = 0; n < n_cells; ++n) {
    const Eigen::MatrixXcd Tn = pilot_blocks.middleRows(n * Un, Un);
    const Eigen::MatrixXcd gram = Tn * Tn.adjoint();
    if ((gram - double(T) * Eigen::MatrixXcd::Identity(Un, Un)).norm() > 1e-6 * T)
      throw std::invalid_argument("pilot block is not orthogonal (T_n T_n^H != T I)");
    // T_n^{-1} = (1/T) T_n^H for orthogonal blocks.
    H.block(n * Bn, n * Un, Bn, Un) =
        Y_T_perm.middleRows(n * Bn, Bn) * Tn.adjoint() / double(T);
  }
  return H;
}

double mad_noise_var(const Eigen::VectorXcd& v) {
  if (v.size() == 0) throw std::invalid_argument("mad_noise_var needs a nonempty vector");
  std::vector<double> mags(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) mags[i] = std::norm(v(i));
  const auto mid = mags.begin() + mags.size() / 2;
  std::nth_element(mags.begin(), mid, mags.end());
  double median = *mid;
  if (mags.size() % 2 == 0) {
    const double lower = *std::max_element(mags.begin(), mid);
    median = 0.5 * (median + lower);
  }
  return median / std::log(2.0);
}

Eigen::VectorXcd james_stein(const Eigen::VectorXcd& h_ls, double N0_bar, int B) {
  if (B <= 1) throw std::invalid_argument("james_stein needs B > 1");
  const double energy = h_ls.squaredNorm();
  if (energy <= 0) throw std::invalid_argument("james_stein needs a nonzero input");
  const double factor = std::max(0.0, 1.0 - (B - 1) * N0_bar / energy);
  return factor * h_ls;
}

Eigen::MatrixXcd lmmse_data_init(const Eigen::MatrixXcd& H_hat,
                                 const Eigen::MatrixXcd& Y_D) {
  if (H_hat.squaredNorm() <= 0) throw std::invalid_argument("lmmse needs nonzero H");
  const double reg = mad_noise_var(H_hat.reshaped());
  const auto U = H_hat.cols();
  const Eigen::MatrixXcd gram =
      H_hat.adjoint() * H_hat + reg * Eigen::MatrixXcd::Identity(U, U);
  return gram.ldlt().solve(H_hat.adjoint() * Y_D);
}

InitPair assemble_init(const Eigen::MatrixXcd& Y_perm,
                       const Eigen::MatrixXcd& pilots_perm, int n_cells, int T) {
  const auto B = Y_perm.rows();
  InitPair out;
  out.H = ls_block_chest(Y_perm.leftCols(T), pilots_perm, n_cells);
  // Column-wise James-Stein within each virtual cell's LS block.
  const auto Bn = B / n_cells;
  const auto Un = pilots_perm.rows() / n_cells;
  for (int n = 0; n < n_cells; ++n) {
    for (Eigen::Index u = 0; u < Un; ++u) {
      Eigen::VectorXcd col = out.H.block(n * Bn, n * Un + u, Bn, 1);
      if (col.squaredNorm() <= 0) continue;
      const double n0 = mad_noise_var(col);
      out.H.block(n * Bn, n * Un + u, Bn, 1) =
          james_stein(col, n0, static_cast<int>(Bn));
    }
  }
  out.S_D = lmmse_data_init(out.H, Y_perm.rightCols(Y_perm.cols() - T));
  return out;
}

}  // namespace cfjed
