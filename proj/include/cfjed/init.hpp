#pragma once

#include <Eigen/Dense>

namespace cfjed {

// Per-virtual-cell least-squares channel estimate from orthogonal MUB pilot
// blocks (T_n T_n^H = T I); off-diagonal blocks of the estimate are zero.
// Y_T_perm is the permuted B x T training observation, pilot_blocks the
// permuted U x T pilot matrix, n_cells the number of virtual cells.
Eigen::MatrixXcd ls_block_chest(const Eigen::MatrixXcd& Y_T_perm,
                                const Eigen::MatrixXcd& pilot_blocks, int n_cells);

// Robust noise-variance estimate for sparse signals in complex Gaussian
// noise: median(|v|^2) / ln 2.
double mad_noise_var(const Eigen::VectorXcd& v);

// Positive-part James-Stein shrinkage of an LS channel column.
Eigen::VectorXcd james_stein(const Eigen::VectorXcd& h_ls, double N0_bar, int B);

// L-MMSE payload estimate (H^H H + N_hat I)^{-1} H^H Y_D with the
// regularizer taken from mad_noise_var(vec(H)).
Eigen::MatrixXcd lmmse_data_init(const Eigen::MatrixXcd& H_hat,
                                 const Eigen::MatrixXcd& Y_D);

struct InitPair {
  Eigen::MatrixXcd H;
  Eigen::MatrixXcd S_D;
};

// Block LS, then column-wise James-Stein with MAD-estimated noise, then
// L-MMSE data initialization; all in the permuted domain.
InitPair assemble_init(const Eigen::MatrixXcd& Y_perm,
                       const Eigen::MatrixXcd& pilots_perm, int n_cells, int T);

}  // namespace cfjed
