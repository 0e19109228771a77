#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"

#include "cfjed/constellation.hpp"
#include "cfjed/eval.hpp"

using namespace cfjed;

TEST_SUITE("eval") {

TEST_CASE("unregularized channel estimator solves overdetermined LS") {
  Rng rng = make_rng(1, 0);
  const Eigen::MatrixXcd H = randn_cmat(rng, 3, 4);
  const Eigen::MatrixXcd S_T = randn_cmat(rng, 4, 8);  // T >= U, full rank
  const Eigen::MatrixXcd Y_T = H * S_T;
  SolverOptions opts;
  opts.tol = 1e-10;
  const Eigen::MatrixXcd H_hat = l1_chest(Y_T, S_T, 0.0, opts);
  CHECK((H_hat - H).norm() < 1e-6);
}

TEST_CASE("overwhelming sparsity weight zeroes the estimate") {
  Rng rng = make_rng(2, 0);
  const Eigen::MatrixXcd S_T = randn_cmat(rng, 4, 6);
  const Eigen::MatrixXcd Y_T = randn_cmat(rng, 3, 6);
  const Eigen::MatrixXcd H_hat = l1_chest(Y_T, S_T, 1e6, {});
  CHECK(H_hat.norm() == 0.0);
  CHECK_THROWS_AS(l1_chest(Y_T, S_T, -1.0, {}), std::invalid_argument);
}

TEST_CASE("sparse channel estimator matches support enumeration") {
  // Overdetermined pilots so the weakly regularized minimizer is unique and
  // coincides with the sparse truth found by the brute-force oracle.
  Rng rng = make_rng(3, 0);
  const int B = 4, U = 6, T = 8;
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(B, U);
  H(0, 1) = {1.0, 0.4};
  H(0, 4) = {-0.8, 0.3};
  H(1, 0) = {0.9, -0.2};
  H(1, 2) = {0.5, 0.5};
  H(2, 3) = {1.2, 0.0};
  H(3, 5) = {0.0, -1.1};
  H(3, 1) = {0.6, 0.1};
  const Eigen::MatrixXcd S_T = randn_cmat(rng, U, T);
  const Eigen::MatrixXcd Y_T = H * S_T;
  SolverOptions opts;
  opts.tol = 1e-10;
  const Eigen::MatrixXcd H_hat = l1_chest(Y_T, S_T, 1e-5, opts);

  // Row-separable brute force over supports of size <= 2.
  for (int b = 0; b < B; ++b) {
    const Eigen::VectorXcd y = Y_T.row(b).transpose();
    const Eigen::MatrixXcd A = S_T.transpose();  // y = A h_b
    Eigen::VectorXcd best = Eigen::VectorXcd::Zero(U);
    double best_res = y.squaredNorm();
    for (int i = 0; i < U; ++i)
      for (int j = i; j < U; ++j) {
        Eigen::MatrixXcd As(T, i == j ? 1 : 2);
        As.col(0) = A.col(i);
        if (i != j) As.col(1) = A.col(j);
        const Eigen::VectorXcd xs = As.completeOrthogonalDecomposition().solve(y);
        const double res = (y - As * xs).squaredNorm();
        if (res < best_res - 1e-12) {
          best_res = res;
          best.setZero();
          best(i) = xs(0);
          if (i != j) best(j) = xs(1);
        }
      }
    CHECK((H_hat.row(b).transpose() - best).norm() < 1e-3);
  }
}

TEST_CASE("lmmse detection closed forms") {
  Rng rng = make_rng(4, 0);
  const Eigen::MatrixXcd Y_D = randn_cmat(rng, 3, 5);
  CHECK((lmmse_detect(Eigen::MatrixXcd::Identity(3, 3), Y_D, 1.0) - 0.5 * Y_D).norm() <
        1e-12);

  const Eigen::MatrixXcd H = randn_cmat(rng, 8, 4);
  const double reg = 0.7;
  const Eigen::MatrixXcd out = lmmse_detect(H, randn_cmat(rng, 8, 5), reg);
  CHECK(out.rows() == 4);
  CHECK_THROWS_AS(lmmse_detect(H, Y_D, 0.1), std::invalid_argument);
}

TEST_CASE("genie-aided bound reduces to a matched filter") {
  Rng rng = make_rng(5, 0);
  // Single UE: identical to the matched filter on the raw observation.
  const Eigen::MatrixXcd h = randn_cmat(rng, 6, 1);
  const Eigen::MatrixXcd s = randn_cmat(rng, 1, 4);
  const Eigen::MatrixXcd Y = h * s + 0.1 * randn_cmat(rng, 6, 4);
  const Eigen::MatrixXcd est = simo_bound(h, Y, s);
  CHECK((est - (h.adjoint() * Y) / h.squaredNorm()).norm() < 1e-12);

  // Noiseless multiuser case recovers the symbols exactly.
  const Eigen::MatrixXcd H = randn_cmat(rng, 6, 3);
  const Eigen::MatrixXcd S = randn_cmat(rng, 3, 4);
  CHECK((simo_bound(H, H * S, S) - S).norm() < 1e-10);

  Eigen::MatrixXcd H0 = H;
  H0.col(1).setZero();
  CHECK_THROWS_AS(simo_bound(H0, H * S, S), std::invalid_argument);
}

TEST_CASE("symbol error closed forms") {
  const Constellation c = make_constellation(Modulation::QPSK);
  Rng rng = make_rng(6, 0);
  const Eigen::MatrixXcd S = symbols_to_values(c, draw_symbols(c, 3, 5, rng));
  CHECK(rmsse_per_ue(S, S).maxCoeff() == 0.0);
  CHECK((rmsse_per_ue(Eigen::MatrixXcd::Zero(3, 5), S).array() - 1.0)
            .abs()
            .maxCoeff() < 1e-12);

  Eigen::MatrixXcd truth(1, 2), est(1, 2);
  truth << 1.0, 1.0;
  est << 1.0, std::complex<double>(1.0, 1.0);
  CHECK(rmsse_per_ue(est, truth)(0) ==
        doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  CHECK_THROWS_AS(rmsse_per_ue(Eigen::MatrixXcd::Zero(1, 2),
                               Eigen::MatrixXcd::Zero(1, 2)),
                  std::invalid_argument);
}

TEST_CASE("bit error rate counts flips") {
  Eigen::MatrixXi a(2, 8);
  a.setZero();
  CHECK(ber_per_ue(a, a).maxCoeff() == 0.0);
  Eigen::MatrixXi b = 1 - a.array();
  CHECK(ber_per_ue(b, a).minCoeff() == 1.0);
  Eigen::MatrixXi one = a;
  one(0, 3) = 1;  // QPSK, D=4: one wrong bit out of 8
  CHECK(ber_per_ue(one, a)(0) == doctest::Approx(1.0 / 8.0));
  CHECK(ber_per_ue(one, a)(1) == 0.0);
}

TEST_CASE("mutual information of clean, shuffled, and relabeled detections") {
  const Constellation c = make_constellation(Modulation::QPSK);
  Rng rng = make_rng(7, 0);
  const int n = 10000;
  const Eigen::MatrixXi tx = draw_symbols(c, 2, n, rng);
  // Perfect detection reaches the rate ceiling.
  const Eigen::VectorXd perfect = mi_per_ue(tx, tx, 128, 32);
  CHECK(perfect(0) == doctest::Approx(0.75 * 2.0).epsilon(0.02));

  // Independent detections carry no information.
  const Eigen::MatrixXi shuffled = draw_symbols(c, 2, n, rng);
  CHECK(mi_per_ue(tx, shuffled, 128, 32).maxCoeff() < 0.05);

  // A deterministic relabeling is information-preserving.
  Eigen::MatrixXi rotated = tx;
  for (int k = 0; k < n; ++k)
    for (int u = 0; u < 2; ++u) rotated(u, k) = (tx(u, k) + 1) % 4;
  CHECK(mi_per_ue(tx, rotated, 128, 32)(0) ==
        doctest::Approx(perfect(0)).epsilon(1e-12));
  CHECK_THROWS_AS(mi_per_ue(tx, shuffled, 32, 32), std::invalid_argument);
}

TEST_CASE("channel error metric closed forms and noise level") {
  Rng rng = make_rng(8, 0);
  const Eigen::MatrixXcd H = randn_cmat(rng, 8, 3);
  CHECK(mse_per_ue(H, H).maxCoeff() == 0.0);
  const Eigen::VectorXd zero_est = mse_per_ue(Eigen::MatrixXcd::Zero(8, 3), H);
  for (int u = 0; u < 3; ++u)
    CHECK(zero_est(u) == doctest::Approx(H.col(u).squaredNorm() / 8.0).epsilon(1e-12));

  double mean = 0.0;
  for (int r = 0; r < 42; ++r) {
    const Eigen::MatrixXcd n = randn_cmat(rng, 8, 3, 1.0);
    mean += mse_per_ue(H + n, H).sum() / (42.0 * 3);
  }
  CHECK(mean == doctest::Approx(1.0).epsilon(0.10));
}

TEST_CASE("empirical CDFs agree with a sort-and-count oracle") {
  Eigen::VectorXd single(1);
  single << 4.2;
  const Cdf step = make_cdf(single);
  CHECK(step.values == std::vector<double>{4.2});
  CHECK(step.probs == std::vector<double>{1.0});

  Eigen::VectorXd three(3);
  three << 3.0, 1.0, 2.0;
  const Cdf cdf3 = make_cdf(three);
  CHECK(cdf3.values[1] == 2.0);
  CHECK(cdf3.probs[1] == doctest::Approx(2.0 / 3.0));

  Rng rng = make_rng(9, 0);
  std::normal_distribution<double> g;
  Eigen::VectorXd samples(1000);
  for (int i = 0; i < 1000; ++i) samples(i) = g(rng);
  const Cdf cdf = make_cdf(samples);
  std::vector<double> sorted(samples.data(), samples.data() + 1000);
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 1000; ++i) {
    CHECK(cdf.values[i] == sorted[i]);
    const auto below = std::count_if(sorted.begin(), sorted.end(),
                                     [&](double v) { return v <= cdf.values[i]; });
    CHECK(cdf.probs[i] <= double(below) / 1000 + 1e-12);
    if (i > 0) CHECK(cdf.probs[i] >= cdf.probs[i - 1]);
  }
  CHECK(cdf.probs.front() > 0.0);
  CHECK(cdf.probs.back() == doctest::Approx(1.0));
}

TEST_CASE("summary helpers") {
  Eigen::VectorXd v(5);
  v << 5.0, 1.0, 3.0, 2.0, 4.0;
  CHECK(vector_median(v) == 3.0);
  Eigen::VectorXd w(4);
  w << 1.0, 2.0, 3.0, 4.0;
  CHECK(vector_median(w) == doctest::Approx(2.5));
  CHECK(fraction_below(v, 3.5) == doctest::Approx(3.0 / 5.0));
}

}  // TEST_SUITE
