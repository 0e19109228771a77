#include "cfjed/frames.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace cfjed {

namespace {

using std::complex;
constexpr complex<double> kI{0.0, 1.0};

bool is_power_of_two(int x) { return x > 0 && (x & (x - 1)) == 0; }

bool is_odd_prime(int x) {
  if (x < 3 || x % 2 == 0) return false;
  for (int d = 3; d * d <= x; d += 2)
    if (x % d == 0) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Galois ring GR(4, m) arithmetic, used for the power-of-two MUB construction.
// Elements are polynomials over Z4 modulo a basic primitive polynomial h,
// obtained from a primitive GF(2) polynomial via the Graeffe lift
// h(x^2) = (-1)^m f(x) f(-x) mod 4.
// ---------------------------------------------------------------------------

constexpr int kMaxM = 7;

// Primitive polynomials over GF(2), bit k = coefficient of x^k.
constexpr unsigned kPrimitivePoly[kMaxM + 1] = {0,    0b11,     0b111,    0b1011,
                                                0b10011, 0b100101, 0b1000011,
                                                0b10000011};

struct GaloisRing {
  int m;
  std::array<int, kMaxM> h;  // h monic of degree m; h[k] = coeff of x^k, mod 4
  using Elem = std::array<int, kMaxM>;  // degree < m, coeffs mod 4
  std::vector<Elem> teichmuller;        // {0, 1, xi, xi^2, ...}, size 2^m
  std::vector<Elem> frobenius_pow;      // xi^{2k} for k < m

  explicit GaloisRing(int m_in) : m(m_in) {
    if (m < 1 || m > kMaxM) throw std::invalid_argument("unsupported GR degree");
    hensel_lift();
    Elem xi{};
    if (m == 1) {
      xi[0] = (4 - h[0]) % 4;  // root of the linear h
    } else {
      xi[1] = 1;
    }
    // Teichmuller set: zero plus the powers of xi.
    const int n = (1 << m) - 1;
    teichmuller.assign(1, Elem{});
    Elem p{};
    p[0] = 1;
    for (int j = 0; j < n; ++j) {
      teichmuller.push_back(p);
      p = mul(p, xi);
    }
    frobenius_pow.resize(m);
    for (int k = 0; k < m; ++k) frobenius_pow[k] = pow_elem(xi, 2 * k);
  }

  void hensel_lift() {
    const unsigned f = kPrimitivePoly[m];
    std::vector<int> a(m + 1, 0), b(m + 1, 0);
    for (int k = 0; k <= m; ++k) {
      const int c = (f >> k) & 1;
      a[k] = c;
      b[k] = (k % 2 == 0) ? c : (4 - c) % 4;  // f(-x)
    }
    std::vector<int> prod(2 * m + 1, 0);
    for (int i = 0; i <= m; ++i)
      for (int j = 0; j <= m; ++j) prod[i + j] = (prod[i + j] + a[i] * b[j]) % 4;
    const int sign = (m % 2 == 0) ? 1 : 3;
    h.fill(0);
    std::array<int, kMaxM + 1> full{};
    for (int k = 0; k <= m; ++k) full[k] = (sign * prod[2 * k]) % 4;
    if (full[m] != 1) throw std::logic_error("Graeffe lift not monic");
    for (int k = 0; k < m; ++k) h[k] = full[k];
  }

  Elem mul(const Elem& x, const Elem& y) const {
    std::array<int, 2 * kMaxM> prod{};
    for (int i = 0; i < m; ++i) {
      if (x[i] == 0) continue;
      for (int j = 0; j < m; ++j) prod[i + j] = (prod[i + j] + x[i] * y[j]) % 4;
    }
    for (int k = 2 * m - 2; k >= m; --k) {
      const int c = prod[k];
      if (c == 0) continue;
      prod[k] = 0;
      for (int j = 0; j < m; ++j)
        prod[k - m + j] = (prod[k - m + j] + (4 - c % 4) * h[j]) % 4;
    }
    Elem out{};
    for (int k = 0; k < m; ++k) out[k] = prod[k];
    return out;
  }

  Elem add(const Elem& x, const Elem& y) const {
    Elem out{};
    for (int k = 0; k < m; ++k) out[k] = (x[k] + y[k]) % 4;
    return out;
  }

  Elem scale(int c, const Elem& x) const {
    Elem out{};
    for (int k = 0; k < m; ++k) out[k] = (c * x[k]) % 4;
    return out;
  }

  Elem pow_elem(Elem x, int e) const {
    Elem r{};
    r[0] = 1;
    while (e > 0) {
      if (e & 1) r = mul(r, x);
      x = mul(x, x);
      e >>= 1;
    }
    return r;
  }

  // Frobenius phi(xi) = xi^2, extended Z4-linearly over the power basis.
  Elem frobenius(const Elem& x) const {
    Elem out{};
    for (int k = 0; k < m; ++k)
      if (x[k] != 0) out = add(out, scale(x[k], frobenius_pow[k]));
    return out;
  }

  // Trace into Z4: sum of the m Frobenius conjugates.
  int trace(const Elem& x) const {
    Elem s{};
    Elem c = x;
    for (int j = 0; j < m; ++j) {
      s = add(s, c);
      c = frobenius(c);
    }
    for (int k = 1; k < m; ++k)
      if (s[k] != 0) throw std::logic_error("trace did not land in Z4");
    return s[0];
  }
};

// One unbiased basis per Teichmuller element a: columns indexed by b with
// entries i^{tr((a + 2b) x)} / sqrt(d) over x in the Teichmuller set.
std::vector<Eigen::MatrixXcd> galois_mub_bases(int T, int count) {
  int m = 0;
  while ((1 << m) < T) ++m;
  const GaloisRing ring(m);
  std::vector<Eigen::MatrixXcd> bases;
  bases.push_back(Eigen::MatrixXcd::Identity(T, T));
  for (int ai = 0; ai < count - 1; ++ai) {
    const auto& a = ring.teichmuller[ai];
    Eigen::MatrixXcd basis(T, T);
    for (int bi = 0; bi < T; ++bi) {
      const auto r = ring.add(a, ring.scale(2, ring.teichmuller[bi]));
      for (int xi = 0; xi < T; ++xi) {
        const int t = ring.trace(ring.mul(r, ring.teichmuller[xi]));
        basis(xi, bi) = std::pow(kI, t) / std::sqrt(double(T));
      }
    }
    bases.push_back(basis);
  }
  return bases;
}

// Quadratic chirp bases for odd prime T; any two distinct chirps are unbiased.
std::vector<Eigen::MatrixXcd> chirp_mub_bases(int T, int count) {
  std::vector<Eigen::MatrixXcd> bases;
  const double w = 2.0 * std::numbers::pi / T;
  for (int n = 0; n < std::min(count, T); ++n) {
    Eigen::MatrixXcd basis(T, T);
    for (int col = 0; col < T; ++col)
      for (int k = 0; k < T; ++k) {
        const long long phase = (1LL * n * k * k + 1LL * col * k) % T;
        basis(k, col) = std::exp(kI * (w * double(phase))) / std::sqrt(double(T));
      }
    bases.push_back(basis);
  }
  if (count == T + 1) bases.push_back(Eigen::MatrixXcd::Identity(T, T));
  return bases;
}

// Column normalization to sqrt(T/U) alternated with the polar factor; fixes
// both frame invariants to high accuracy near a unit-norm tight frame.
void polish_tight_frame(Eigen::MatrixXcd& F, int max_sweeps = 500) {
  const double nu = double(F.rows()) / F.cols();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    for (Eigen::Index u = 0; u < F.cols(); ++u) F.col(u) *= std::sqrt(nu) / F.col(u).norm();
    Eigen::MatrixXcd gram = F * F.adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram);
    const Eigen::VectorXd inv_sqrt = es.eigenvalues().cwiseSqrt().cwiseInverse();
    F = es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().adjoint() * F;
    double col_err = 0.0;
    for (Eigen::Index u = 0; u < F.cols(); ++u)
      col_err = std::max(col_err, std::abs(F.col(u).squaredNorm() - nu));
    const double row_err =
        (F * F.adjoint() - Eigen::MatrixXcd::Identity(F.rows(), F.rows())).norm();
    if (col_err < 1e-11 && row_err < 1e-11) return;
  }
}

}  // namespace

double welch_bound(int T, int U) {
  if (T < 1 || T > U) throw std::invalid_argument("welch_bound needs 1 <= T <= U");
  if (T == U) return 0.0;
  const double nu = double(T) / U;
  return nu * std::sqrt(double(U - T) / (double(T) * (U - 1)));
}

double coherence(const Eigen::MatrixXcd& F) {
  if (F.cols() < 2) throw std::invalid_argument("coherence needs >= 2 columns");
  const Eigen::MatrixXcd gram = F.adjoint() * F;
  double kappa = 0.0;
  for (Eigen::Index i = 0; i < F.cols(); ++i)
    for (Eigen::Index j = i + 1; j < F.cols(); ++j)
      kappa = std::max(kappa, std::abs(gram(i, j)));
  return kappa;
}

bool check_ambiguity(const Eigen::MatrixXcd& F) {
  const double nu = F.col(0).squaredNorm();
  for (Eigen::Index u = 1; u < F.cols(); ++u)
    if (std::abs(F.col(u).squaredNorm() - nu) > 1e-8)
      throw std::invalid_argument("check_ambiguity needs uniform column norms");
  // Relative slack so the kappa == nu boundary (duplicated column) is
  // classified as ambiguous regardless of rounding in the Gram product.
  return coherence(F) < nu * (1.0 - 1e-12);
}

FrameMatrix build_etf(int T, int U, Rng& rng) {
  if (T > U) throw std::invalid_argument("build_etf needs T <= U");
  FrameMatrix frame;
  frame.kind = FrameKind::ETF;
  frame.n_blocks = 1;
  if (T == U) {
    // Orthonormal basis: coherence zero, trivially tight.
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(randn_cmat(rng, T, T));
    frame.F = qr.householderQ();
    return frame;
  }

  const double nu = double(T) / U;
  const double target = welch_bound(T, U);
  const double accept = 1.1 * target;
  constexpr int kMaxIter = 2000;
  constexpr int kRestarts = 8;

  double best_coh = std::numeric_limits<double>::infinity();
  Eigen::MatrixXcd best;
  for (int restart = 0; restart < kRestarts && best_coh > accept; ++restart) {
    Eigen::MatrixXcd F;
    if (restart == 0 && U % T == 0 && U / T >= 2 &&
        (is_power_of_two(T) || is_odd_prime(T)) && U / T <= T) {
      F = build_mub(T, U / T).F;  // good low-coherence seed when available
    } else {
      F = randn_cmat(rng, T, U);
      polish_tight_frame(F, 50);
    }
    for (int it = 0; it < kMaxIter; ++it) {
      Eigen::MatrixXcd gram = F.adjoint() * F;
      for (Eigen::Index i = 0; i < U; ++i) {
        gram(i, i) = nu;
        for (Eigen::Index j = 0; j < U; ++j) {
          if (i == j) continue;
          const double mag = std::abs(gram(i, j));
          if (mag > target) gram(i, j) *= target / mag;
        }
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram);
      // Nearest Gram of a row-orthonormal frame: top-T eigenvectors.
      F = es.eigenvectors().rightCols(T).adjoint();
      if ((it + 1) % 25 == 0 || it + 1 == kMaxIter) {
        Eigen::MatrixXcd cand = F;
        polish_tight_frame(cand, 100);
        const double coh = coherence(cand);
        if (coh < best_coh) {
          best_coh = coh;
          best = cand;
        }
        if (best_coh <= accept) break;
      }
    }
  }
  if (best_coh > accept) {
    std::ostringstream msg;
    msg << "build_etf(" << T << ", " << U << "): coherence " << best_coh
        << " did not reach 1.1 * Welch = " << accept;
    throw std::runtime_error(msg.str());
  }
  frame.F = best;
  return frame;
}

FrameMatrix build_mub(int T, int N) {
  if (N < 1 || N > T + 1) throw std::invalid_argument("build_mub needs 1 <= N <= T+1");
  std::vector<Eigen::MatrixXcd> bases;
  if (T == 1) {
    bases.assign(N, Eigen::MatrixXcd::Ones(1, 1));
  } else if (is_power_of_two(T)) {
    bases = galois_mub_bases(T, N);
  } else if (is_odd_prime(T)) {
    bases = chirp_mub_bases(T, N);
  } else {
    throw std::invalid_argument("build_mub supports prime or power-of-two T only");
  }
  const int U = N * T;
  FrameMatrix frame;
  frame.kind = FrameKind::MUB;
  frame.n_blocks = N;
  frame.F.resize(T, U);
  const double scale = std::sqrt(double(T) / U);
  for (int n = 0; n < N; ++n) frame.F.middleCols(n * T, T) = scale * bases[n];
  return frame;
}

Eigen::MatrixXcd make_pilots(const FrameMatrix& frame) {
  return std::sqrt(double(frame.U())) * frame.F.adjoint();
}

void export_frame_csv(const FrameMatrix& frame, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out.precision(17);
  out << frame.T() << "," << frame.U() << ","
      << (frame.kind == FrameKind::ETF ? "etf" : "mub") << "," << frame.n_blocks
      << "\n";
  for (int r = 0; r < frame.T(); ++r) {
    for (int c = 0; c < frame.U(); ++c) {
      if (c) out << ",";
      out << frame.F(r, c).real() << "," << frame.F(r, c).imag();
    }
    out << "\n";
  }
}

FrameMatrix import_frame_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty frame file");
  std::istringstream header(line);
  std::string tok, kind;
  FrameMatrix frame;
  std::getline(header, tok, ',');
  const int T = std::stoi(tok);
  std::getline(header, tok, ',');
  const int U = std::stoi(tok);
  std::getline(header, kind, ',');
  std::getline(header, tok, ',');
  frame.kind = (kind == "mub") ? FrameKind::MUB : FrameKind::ETF;
  frame.n_blocks = std::stoi(tok);
  frame.F.resize(T, U);
  for (int r = 0; r < T; ++r) {
    if (!std::getline(in, line)) throw std::runtime_error("truncated frame file");
    std::istringstream ls(line);
    for (int c = 0; c < U; ++c) {
      std::getline(ls, tok, ',');
      const double re = std::stod(tok);
      std::getline(ls, tok, ',');
      const double im = std::stod(tok);
      frame.F(r, c) = {re, im};
    }
  }
  return frame;
}

}  // namespace cfjed
