#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cfjed/fbs.hpp"

namespace cfjed {

// Virtual-cell reindexing. ap[i] / ue[j] give the original index that lands
// at permuted position i / j.
struct PermutationPair {
  std::vector<int> ap;
  std::vector<int> ue;

  static PermutationPair identity(int B, int U);
  PermutationPair inverse() const;
  bool valid() const;
};

// Block-diagonal 0/1 mask with N blocks of size (B/N) x (U/N).
Eigen::MatrixXd block_mask(int B, int U, int N);

// Masked block energy 1^T [M o (P_AP A P_UE)] 1 after reindexing by `pair`.
double block_energy(const Eigen::MatrixXd& A, const PermutationPair& pair,
                    const Eigen::MatrixXd& mask);

// Maximum-weight assignment on X (Hungarian algorithm); perm[i] = assigned
// column of row i.
std::vector<int> round_to_permutation(const Eigen::MatrixXd& X);

// Euclidean projection onto doubly-stochastic matrices, by Dykstra
// alternating projections between the row/column-sum affine set and the
// nonnegative orthant.
Eigen::MatrixXd project_doubly_stochastic(const Eigen::MatrixXd& X);

// Projection onto {X >= 0, X 1 = row_sums, X^T 1 = col_sums}; the
// doubly-stochastic case with general margins (used for balanced clustering).
Eigen::MatrixXd project_transport_polytope(const Eigen::MatrixXd& X,
                                           const Eigen::VectorXd& row_sums,
                                           const Eigen::VectorXd& col_sums);

struct PermuteOptions {
  int fbs_iters = 50;         // FBS iterations per annealing stage
  int anneal_stages = 5;      // concave-push doublings
  double tol = 1e-6;
};

// CSI-based permutation: relax the block-energy maximization over
// doubly-stochastic matrices, anneal the concave push, round by assignment.
// Never returns a pair worse than the identity.
PermutationPair csi_permute(const Eigen::MatrixXd& A, int N, double varrho,
                            const PermuteOptions& opts = {});

// Location-based permutation: balanced clustering of APs (assignment +
// centroid update), UEs assigned once against the final centroids.
PermutationPair location_cluster(const Eigen::MatrixX2d& ap_pos,
                                 const Eigen::MatrixX2d& ue_pos, int N, double omega,
                                 const PermuteOptions& opts = {});

// Row-permute Y, conjugate H by both permutations, row-permute S.
Eigen::MatrixXcd apply_row_perm(const Eigen::MatrixXcd& M, const std::vector<int>& p);
Eigen::MatrixXcd apply_pair(const Eigen::MatrixXcd& H, const PermutationPair& pair);

void export_permutation_json(const PermutationPair& pair, const std::string& path);

}  // namespace cfjed
