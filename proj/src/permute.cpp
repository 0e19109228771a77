#include "cfjed/permute.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace cfjed {

PermutationPair PermutationPair::identity(int B, int U) {
  PermutationPair p;
  p.ap.resize(B);
  p.ue.resize(U);
  std::iota(p.ap.begin(), p.ap.end(), 0);
  std::iota(p.ue.begin(), p.ue.end(), 0);
  return p;
}

PermutationPair PermutationPair::inverse() const {
  PermutationPair inv;
  inv.ap.resize(ap.size());
  inv.ue.resize(ue.size());
  for (std::size_t i = 0; i < ap.size(); ++i) inv.ap[ap[i]] = static_cast<int>(i);
  for (std::size_t j = 0; j < ue.size(); ++j) inv.ue[ue[j]] = static_cast<int>(j);
  return inv;
}

bool PermutationPair::valid() const {
  auto check = [](const std::vector<int>& p) {
    std::vector<char> seen(p.size(), 0);
    for (int v : p) {
      if (v < 0 || v >= static_cast<int>(p.size()) || seen[v]) return false;
      seen[v] = 1;
    }
    return true;
  };
  return check(ap) && check(ue);
}

Eigen::MatrixXd block_mask(int B, int U, int N) {
  if (N < 1 || B % N != 0 || U % N != 0)
    throw std::invalid_argument("block_mask: N must divide B and U");
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(B, U);
  for (int n = 0; n < N; ++n)
    M.block(n * (B / N), n * (U / N), B / N, U / N).setOnes();
  return M;
}

double block_energy(const Eigen::MatrixXd& A, const PermutationPair& pair,
                    const Eigen::MatrixXd& mask) {
  if (A.rows() != mask.rows() || A.cols() != mask.cols())
    throw std::invalid_argument("block_energy: shape mismatch");
  double e = 0.0;
  for (Eigen::Index j = 0; j < A.cols(); ++j)
    for (Eigen::Index i = 0; i < A.rows(); ++i)
      if (mask(i, j) != 0.0) e += A(pair.ap[i], pair.ue[j]);
  return e;
}

// Hungarian algorithm (Jonker-style shortest augmenting paths) on a cost
// matrix; returns row -> column of a minimum-cost perfect matching.
static std::vector<int> hungarian_min(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> match(n);
  for (int j = 1; j <= n; ++j) match[p[j] - 1] = j - 1;
  return match;
}

std::vector<int> round_to_permutation(const Eigen::MatrixXd& X) {
  if (X.rows() != X.cols() || X.rows() == 0)
    throw std::invalid_argument("round_to_permutation needs a square matrix");
  return hungarian_min(-X);
}

Eigen::MatrixXd project_transport_polytope(const Eigen::MatrixXd& X,
                                           const Eigen::VectorXd& row_sums,
                                           const Eigen::VectorXd& col_sums) {
  const auto m = X.rows();
  const auto n = X.cols();
  if (row_sums.size() != m || col_sums.size() != n)
    throw std::invalid_argument("transport projection: margin size mismatch");
  if (std::abs(row_sums.sum() - col_sums.sum()) > 1e-9 * (1.0 + row_sums.sum()))
    throw std::invalid_argument("transport projection: inconsistent margins");
  const double total = row_sums.sum();

  // Dykstra between the margin-affine set (closed-form projection) and the
  // nonnegative orthant.
  Eigen::MatrixXd Z = X;
  Eigen::MatrixXd inc = Eigen::MatrixXd::Zero(m, n);  // orthant correction
  for (int sweep = 0; sweep < 200; ++sweep) {
    const Eigen::VectorXd r = Z.rowwise().sum();
    const Eigen::VectorXd c = Z.colwise().sum().transpose();
    const double s = r.sum();
    Eigen::MatrixXd A = Z;
    A.colwise() += (row_sums - r) / double(n);
    A.rowwise() += ((col_sums - c) / double(m)).transpose();
    A.array() += (s - total) / double(m * n);
    Eigen::MatrixXd W = A + inc;
    Eigen::MatrixXd P = W.cwiseMax(0.0);
    inc = W - P;
    const double drift = (P - Z).norm();
    Z = P;
    if (drift < 1e-8 * (1.0 + total)) break;
  }
  return Z;
}

Eigen::MatrixXd project_doubly_stochastic(const Eigen::MatrixXd& X) {
  if (X.rows() != X.cols()) throw std::invalid_argument("needs a square matrix");
  const auto n = X.rows();
  return project_transport_polytope(X, Eigen::VectorXd::Ones(n),
                                    Eigen::VectorXd::Ones(n));
}

PermutationPair csi_permute(const Eigen::MatrixXd& A, int N, double varrho,
                            const PermuteOptions& opts) {
  const int B = static_cast<int>(A.rows());
  const int U = static_cast<int>(A.cols());
  const Eigen::MatrixXd M = block_mask(B, U, N);
  const PermutationPair ident = PermutationPair::identity(B, U);
  if (N == 1) return ident;

  // Maximize 1^T [M o (P A Q^T)] 1 + rho/2 (||P||^2 + ||Q||^2) over the
  // doubly-stochastic relaxation; FBS on the negated objective with the
  // concave push annealed upward so the iterate is driven to a vertex.
  // The exactly uniform matrix is a saddle point of the relaxation (the
  // gradient there has identical rows), so break the symmetry with a tiny
  // deterministic tilt before projecting back onto the feasible set.
  Eigen::MatrixXd P = Eigen::MatrixXd::Constant(B, B, 1.0 / B);
  Eigen::MatrixXd Q = Eigen::MatrixXd::Constant(U, U, 1.0 / U);
  {
    std::mt19937_64 tilt(0x5eedc51u);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (Eigen::Index i = 0; i < P.size(); ++i)
      P.reshaped()(i) += 1e-3 / B * unif(tilt);
    for (Eigen::Index i = 0; i < Q.size(); ++i)
      Q.reshaped()(i) += 1e-3 / U * unif(tilt);
    P = project_doubly_stochastic(P);
    Q = project_doubly_stochastic(Q);
  }

  double rho = varrho;
  const double scale = A.cwiseAbs().maxCoeff() + 1e-300;
  for (int stage = 0; stage < opts.anneal_stages; ++stage) {
    double tau = 0.5 / (scale * std::max(B, U) + rho);
    for (int it = 0; it < opts.fbs_iters; ++it) {
      const Eigen::MatrixXd gP = -(M * (A * Q.transpose()).transpose()) - rho * P;
      const Eigen::MatrixXd gQ = -((P * A).transpose() * M).transpose() - rho * Q;
      const Eigen::MatrixXd Pn = project_doubly_stochastic(P - tau * gP);
      const Eigen::MatrixXd Qn = project_doubly_stochastic(Q - tau * gQ);
      const double step = (Pn - P).norm() + (Qn - Q).norm();
      P = Pn;
      Q = Qn;
      if (step < opts.tol * (1.0 + P.norm() + Q.norm())) break;
    }
    rho *= 2.0;
  }

  PermutationPair out;
  const std::vector<int> p_row = round_to_permutation(P);  // row i of P -> col p_row[i]
  const std::vector<int> q_row = round_to_permutation(Q);
  out.ap = p_row;  // (P A)_{i,:} = A_{p_row[i],:}
  out.ue = q_row;  // (A Q^T)_{:,j} = A_{:, q_row[j]}

  // Alternating pairwise-swap refinement until no improving move on either
  // permutation.
  auto refine = [&](bool is_ap) {
    bool any = false;
    bool improved = true;
    while (improved) {
      improved = false;
      std::vector<int>& p = is_ap ? out.ap : out.ue;
      double base = block_energy(A, out, M);
      for (std::size_t i = 0; i + 1 < p.size(); ++i)
        for (std::size_t j = i + 1; j < p.size(); ++j) {
          std::swap(p[i], p[j]);
          const double trial = block_energy(A, out, M);
          if (trial > base + 1e-12 * (1.0 + std::abs(base))) {
            base = trial;
            improved = true;
            any = true;
          } else {
            std::swap(p[i], p[j]);
          }
        }
    }
    return any;
  };
  while (refine(true) | refine(false)) {
  }

  if (block_energy(A, out, M) < block_energy(A, ident, M)) return ident;
  return out;
}

PermutationPair location_cluster(const Eigen::MatrixX2d& ap_pos,
                                 const Eigen::MatrixX2d& ue_pos, int N, double omega,
                                 const PermuteOptions& opts) {
  const int B = static_cast<int>(ap_pos.rows());
  const int U = static_cast<int>(ue_pos.rows());
  if (N < 1 || B % N != 0 || U % N != 0)
    throw std::invalid_argument("location_cluster: N must divide B and U");
  if (N == 1) return PermutationPair::identity(B, U);
  const int Bn = B / N;
  const int Un = U / N;

  // Balanced k-means on the APs: each cell gets exactly Bn members, so the
  // assignment step replicates every centroid Bn times and solves a perfect
  // matching on the replicated squared-distance cost, tempered by omega.
  (void)opts;
  Eigen::MatrixX2d centers(N, 2);
  for (int n = 0; n < N; ++n) centers.row(n) = ap_pos.row((n * B) / N);

  std::vector<int> ap_cell(B, 0);
  for (int outer = 0; outer < 100; ++outer) {
    Eigen::MatrixXd D(B, N);
    for (int i = 0; i < B; ++i)
      for (int n = 0; n < N; ++n)
        D(i, n) = (ap_pos.row(i) - centers.row(n)).squaredNorm();
    Eigen::MatrixXd cost(B, B);
    for (int i = 0; i < B; ++i)
      for (int c = 0; c < B; ++c) cost(i, c) = omega * D(i, c / Bn);
    const std::vector<int> match = hungarian_min(cost);
    std::vector<int> new_cell(B);
    for (int i = 0; i < B; ++i) new_cell[i] = match[i] / Bn;

    Eigen::MatrixX2d new_centers = Eigen::MatrixX2d::Zero(N, 2);
    for (int i = 0; i < B; ++i) new_centers.row(new_cell[i]) += ap_pos.row(i);
    new_centers /= double(Bn);
    const bool moved = (new_centers - centers).norm() > 1e-9 * (1.0 + centers.norm());
    centers = new_centers;
    ap_cell = new_cell;
    if (!moved) break;
  }

  // UEs: one balanced assignment against the final centroids.
  Eigen::MatrixXd cost_ue(U, U);
  for (int j = 0; j < U; ++j)
    for (int c = 0; c < U; ++c)
      cost_ue(j, c) = (ue_pos.row(j) - centers.row(c / Un)).squaredNorm();
  const std::vector<int> match_ue = hungarian_min(cost_ue);
  std::vector<int> ue_cell(U);
  for (int j = 0; j < U; ++j) ue_cell[j] = match_ue[j] / Un;

  PermutationPair out;
  out.ap.reserve(B);
  out.ue.reserve(U);
  for (int n = 0; n < N; ++n)
    for (int i = 0; i < B; ++i)
      if (ap_cell[i] == n) out.ap.push_back(i);
  for (int n = 0; n < N; ++n)
    for (int j = 0; j < U; ++j)
      if (ue_cell[j] == n) out.ue.push_back(j);
  return out;
}

Eigen::MatrixXcd apply_row_perm(const Eigen::MatrixXcd& Mmat,
                                const std::vector<int>& p) {
  if (static_cast<Eigen::Index>(p.size()) != Mmat.rows())
    throw std::invalid_argument("apply_row_perm: size mismatch");
  Eigen::MatrixXcd out(Mmat.rows(), Mmat.cols());
  for (Eigen::Index i = 0; i < Mmat.rows(); ++i) out.row(i) = Mmat.row(p[i]);
  return out;
}

Eigen::MatrixXcd apply_pair(const Eigen::MatrixXcd& H, const PermutationPair& pair) {
  if (static_cast<Eigen::Index>(pair.ap.size()) != H.rows() ||
      static_cast<Eigen::Index>(pair.ue.size()) != H.cols())
    throw std::invalid_argument("apply_pair: size mismatch");
  Eigen::MatrixXcd out(H.rows(), H.cols());
  for (Eigen::Index j = 0; j < H.cols(); ++j)
    for (Eigen::Index i = 0; i < H.rows(); ++i) out(i, j) = H(pair.ap[i], pair.ue[j]);
  return out;
}

void export_permutation_json(const PermutationPair& pair, const std::string& path) {
  nlohmann::json j;
  j["ap"] = pair.ap;
  j["ue"] = pair.ue;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << j.dump(2) << "\n";
}

}  // namespace cfjed
