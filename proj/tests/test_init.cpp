#include <cmath>

#include "doctest.h"

#include "cfjed/channel.hpp"
#include "cfjed/constellation.hpp"
#include "cfjed/frames.hpp"
#include "cfjed/init.hpp"

using namespace cfjed;

namespace {

// U x T pilot matrix with two orthogonal blocks (T_n T_n^H = T I).
Eigen::MatrixXcd two_block_pilots(int T) {
  const FrameMatrix f = build_mub(T, 2);
  return make_pilots(f);
}

}  // namespace

TEST_SUITE("init") {

TEST_CASE("block LS recovers a block-diagonal channel exactly") {
  const int T = 8, N = 2;
  const Eigen::MatrixXcd pilots = two_block_pilots(T);
  Rng rng = make_rng(1, 0);
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(6, 16);
  H.block(0, 0, 3, 8) = randn_cmat(rng, 3, 8);
  H.block(3, 8, 3, 8) = randn_cmat(rng, 3, 8);
  const Eigen::MatrixXcd Y_T = H * pilots;
  const Eigen::MatrixXcd H_hat = ls_block_chest(Y_T, pilots, N);
  CHECK((H_hat - H).norm() < 1e-10 * H.norm());
}

TEST_CASE("off-diagonal leakage matches the cross-block closed form") {
  const int T = 8, N = 2;
  const Eigen::MatrixXcd pilots = two_block_pilots(T);
  Rng rng = make_rng(2, 0);
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(4, 16);
  H.block(0, 0, 2, 8) = randn_cmat(rng, 2, 8);
  const Eigen::MatrixXcd H12 = randn_cmat(rng, 2, 8);
  H.block(0, 8, 2, 8) = H12;  // interference into cell 1's APs
  const Eigen::MatrixXcd Y_T = H * pilots;
  const Eigen::MatrixXcd H_hat = ls_block_chest(Y_T, pilots, N);
  const Eigen::MatrixXcd T1 = pilots.topRows(8);
  const Eigen::MatrixXcd T2 = pilots.bottomRows(8);
  const Eigen::MatrixXcd leak = H12 * T2 * T1.adjoint() / double(T);
  CHECK((H_hat.block(0, 0, 2, 8) - H.block(0, 0, 2, 8) - leak).norm() < 1e-10);
  // Mutually unbiased blocks spread the leakage uniformly at level 1/sqrt(T).
  CHECK(((T2 * T1.adjoint() / double(T)).cwiseAbs().array() - 1.0 / std::sqrt(8.0))
            .abs()
            .maxCoeff() < 1e-10);
}

TEST_CASE("pure noise observations estimate with variance 1/T") {
  const int T = 8, N = 2;
  const Eigen::MatrixXcd pilots = two_block_pilots(T);
  Rng rng = make_rng(3, 0);
  double acc = 0.0;
  const int reps = 200;  // 200 * (8*16)/2 nonzero entries ~ 1.3e4 samples
  Eigen::Index count = 0;
  for (int r = 0; r < reps; ++r) {
    const Eigen::MatrixXcd noise = randn_cmat(rng, 8, T);
    const Eigen::MatrixXcd H_hat = ls_block_chest(noise, pilots, N);
    acc += H_hat.block(0, 0, 4, 8).squaredNorm() +
           H_hat.block(4, 8, 4, 8).squaredNorm();
    count += 2 * 4 * 8;
  }
  CHECK(acc / count == doctest::Approx(1.0 / T).epsilon(0.10));
}

TEST_CASE("block LS validates its pilot structure") {
  Rng rng = make_rng(4, 0);
  const Eigen::MatrixXcd bad = randn_cmat(rng, 16, 8);
  CHECK_THROWS_AS(ls_block_chest(randn_cmat(rng, 4, 8), bad, 2), std::invalid_argument);
  const Eigen::MatrixXcd pilots = two_block_pilots(8);
  CHECK_THROWS_AS(ls_block_chest(randn_cmat(rng, 4, 8), pilots, 3),
                  std::invalid_argument);
}

TEST_CASE("MAD noise estimate closed form and consistency") {
  Eigen::VectorXcd v(4);
  const double mag = std::sqrt(std::log(2.0));
  v << mag, -mag, std::complex<double>(0, mag), std::complex<double>(0, -mag);
  CHECK(mad_noise_var(v) == doctest::Approx(1.0).epsilon(1e-12));

  Rng rng = make_rng(5, 0);
  const double sigma2 = 2.7;
  const Eigen::VectorXcd noise = randn_cmat(rng, 10000, 1, sigma2);
  CHECK(mad_noise_var(noise) == doctest::Approx(sigma2).epsilon(0.10));

  // Robust under a 10%-sparse signal component.
  Eigen::VectorXcd mixed = randn_cmat(rng, 128, 1, 1.0);
  for (int k = 0; k < 13; ++k) mixed(k * 9) += std::complex<double>(5.0, -3.0);
  CHECK(mad_noise_var(mixed) == doctest::Approx(1.0).epsilon(0.25));

  // Scale equivariance is exact.
  CHECK(mad_noise_var(3.0 * mixed) == doctest::Approx(9.0 * mad_noise_var(mixed))
                                          .epsilon(1e-12));
}

TEST_CASE("James-Stein shrinkage limits") {
  Rng rng = make_rng(6, 0);
  Eigen::VectorXcd h = randn_cmat(rng, 8, 1);
  CHECK((james_stein(h, 0.0, 8) - h).norm() == 0.0);
  const double n0 = h.squaredNorm() / 7.0;  // factor exactly zero
  CHECK(james_stein(h, n0, 8).norm() < 1e-12);
  // Positive-part clamp: an even larger noise estimate still yields zero.
  CHECK(james_stein(h, 10.0 * n0, 8).norm() == 0.0);
  CHECK(james_stein(h, 1.0, 8).norm() <= h.norm());
  CHECK_THROWS_AS(james_stein(h, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(james_stein(Eigen::VectorXcd::Zero(4), 1.0, 4),
                  std::invalid_argument);
}

TEST_CASE("James-Stein dominates LS in mean squared error") {
  const int B = 64, trials = 500;
  double mse_ls = 0.0, mse_js = 0.0;
  for (int t = 0; t < trials; ++t) {
    Rng rng = make_rng(7, t);
    Eigen::VectorXcd h = Eigen::VectorXcd::Zero(B);
    for (int k = 0; k < 6; ++k) h(k * 10) = randn_c(rng, 4.0);
    const Eigen::VectorXcd h_ls = h + randn_cmat(rng, B, 1, 1.0);
    const double n0 = mad_noise_var(h_ls);
    const Eigen::VectorXcd h_js = james_stein(h_ls, n0, B);
    mse_ls += (h_ls - h).squaredNorm() / trials;
    mse_js += (h_js - h).squaredNorm() / trials;
  }
  CHECK(mse_js <= mse_ls);
}

TEST_CASE("L-MMSE data initialization matches an independent solve") {
  Rng rng = make_rng(8, 0);
  const Eigen::MatrixXcd H = randn_cmat(rng, 8, 4);
  const Eigen::MatrixXcd Y_D = randn_cmat(rng, 8, 5);
  const Eigen::MatrixXcd S = lmmse_data_init(H, Y_D);
  const double reg = mad_noise_var(H.reshaped());
  const Eigen::MatrixXcd gram =
      H.adjoint() * H + reg * Eigen::MatrixXcd::Identity(4, 4);
  const Eigen::MatrixXcd oracle = gram.fullPivLu().solve(H.adjoint() * Y_D);
  CHECK((S - oracle).norm() < 1e-10);
}

TEST_CASE("assembled initializer reduces to LS plus shrinkage for one cell") {
  const int T = 8;
  const FrameMatrix f = build_mub(T, 1);
  const Eigen::MatrixXcd pilots = make_pilots(f);
  Rng rng = make_rng(9, 0);
  // Sparse columns: most entries are zero, so the noiseless per-column MAD
  // estimate vanishes and shrinkage becomes the identity.
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(6, T);
  for (int j = 0; j < T; ++j)
    for (int i = 0; i < 6; ++i)
      if ((i + j) % 4 == 0) H(i, j) = randn_c(rng);
  Eigen::MatrixXcd Y(6, T + 4);
  Y.leftCols(T) = H * pilots;
  Y.rightCols(4) = randn_cmat(rng, 6, 4);
  const InitPair ip = assemble_init(Y, pilots, 1, T);
  CHECK((ip.H - H).norm() < 1e-8 * H.norm());

  // With noise present, the result equals the manual LS -> JS composition.
  Y.leftCols(T) += randn_cmat(rng, 6, T);
  const InitPair noisy = assemble_init(Y, pilots, 1, T);
  const Eigen::MatrixXcd H_ls = ls_block_chest(Y.leftCols(T), pilots, 1);
  for (int j = 0; j < T; ++j) {
    const Eigen::VectorXcd col = H_ls.col(j);
    const Eigen::VectorXcd expect = james_stein(col, mad_noise_var(col), 6);
    CHECK((noisy.H.col(j) - expect).norm() < 1e-12);
  }
}

TEST_CASE("block-diagonal noiseless channel yields quantizable data init") {
  const int T = 8, N = 2;
  const Eigen::MatrixXcd pilots = two_block_pilots(T);
  const Constellation c = make_constellation(Modulation::QPSK);
  Rng rng = make_rng(10, 0);
  // Sparse full-rank diagonal blocks keep the column-wise MAD estimates at 0.
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(16, 16);
  for (int n = 0; n < 2; ++n)
    for (int j = 0; j < 8; ++j)
      for (int d = 0; d < 3; ++d)
        H(n * 8 + (j + d) % 8, n * 8 + j) = randn_c(rng);
  const Eigen::MatrixXi tx = draw_symbols(c, 16, 6, rng);
  Eigen::MatrixXcd Y(16, T + 6);
  Y.leftCols(T) = H * pilots;
  Y.rightCols(6) = H * symbols_to_values(c, tx);
  const InitPair ip = assemble_init(Y, pilots, N, T);
  int errors = 0;
  for (int j = 0; j < 6; ++j)
    for (int i = 0; i < 16; ++i)
      errors += c.nearest(ip.S_D(i, j)) != tx(i, j);
  CHECK(errors == 0);
}

TEST_CASE("shrunken block estimate beats naive LS on clustered channels") {
  // Paired comparison in the post-permutation regime: each UE's strong links
  // sit inside its own virtual cell, off-cell links are weak.
  const int B = 64, U = 128, T = 64, K = 128, N = 2;
  const Eigen::MatrixXcd pilots = two_block_pilots(T);
  int wins = 0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    Rng rng = make_rng(11, t);
    Eigen::MatrixXcd H = randn_cmat(rng, B, U, 0.01);
    std::uniform_int_distribution<int> row(0, B / N - 1);
    for (int u = 0; u < U; ++u) {
      const int cell = u / (U / N);
      for (int k = 0; k < 5; ++k)
        H(cell * (B / N) + row(rng), u) += randn_c(rng, 8.0);
    }
    const Eigen::MatrixXcd Y_T = H * pilots + randn_cmat(rng, B, T);
    Eigen::MatrixXcd Y(B, K);
    Y.leftCols(T) = Y_T;
    Y.rightCols(K - T) = randn_cmat(rng, B, K - T);
    const InitPair ip = assemble_init(Y, pilots, N, T);
    // Naive full LS with the same pilots: Y_T S_T^+ with S_T^+ = S_T^H / U.
    const Eigen::MatrixXcd H_ls = Y_T * pilots.adjoint() / double(U);
    if ((ip.H - H).squaredNorm() < (H_ls - H).squaredNorm()) ++wins;
  }
  CHECK(wins >= 90);
}

}  // TEST_SUITE
