#pragma once

#include <string>

#include <Eigen/Dense>

#include "cfjed/rng.hpp"

namespace cfjed {

enum class FrameKind { ETF, MUB };

// T x U synthesis frame with orthonormal rows and uniform column norms
// ||f_u||^2 = T/U. MUB frames additionally carry N orthogonal T x T blocks.
struct FrameMatrix {
  Eigen::MatrixXcd F;
  FrameKind kind = FrameKind::ETF;
  int n_blocks = 1;

  int T() const { return static_cast<int>(F.rows()); }
  int U() const { return static_cast<int>(F.cols()); }
  double nu() const { return static_cast<double>(F.rows()) / F.cols(); }
};

double welch_bound(int T, int U);

double coherence(const Eigen::MatrixXcd& F);

// Phase-permutation ambiguity guard: true iff coherence < nu. Requires
// uniform column norms.
bool check_ambiguity(const Eigen::MatrixXcd& F);

// Near-equiangular tight frame by alternating projections; accepts coherence
// within 10% of the Welch bound, throws if the iteration budget is exhausted.
FrameMatrix build_etf(int T, int U, Rng& rng);

// Mutually unbiased bases for odd prime T (quadratic chirps) or T = 2^m
// (Galois-ring construction). U = N*T columns, N <= T+1 blocks.
FrameMatrix build_mub(int T, int N);

// Pilot matrix S_T = sqrt(U) * F^H, U x T.
Eigen::MatrixXcd make_pilots(const FrameMatrix& frame);

void export_frame_csv(const FrameMatrix& frame, const std::string& path);
FrameMatrix import_frame_csv(const std::string& path);

}  // namespace cfjed
