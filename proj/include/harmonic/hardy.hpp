#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "harmonic/series.hpp"

namespace harmonic {

using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

// ---------------------------------------------------------------------------
// HH^2 vectors
// ---------------------------------------------------------------------------

/// a(z) + conj(b(z)) in the truncated space HH^2, stored as the coefficient
/// pair (a_0..a_N, b_0..b_N). Scalars act as alpha (a, b) = (alpha a, conj(alpha) b)
/// so that the represented function is multiplied by alpha. e_n = z^n and
/// f_n = conj(z^n) are distinct basis vectors, including e_0 and f_0.
class HardyVector {
 public:
  explicit HardyVector(std::size_t order = 0) : a_(CVector::Zero(order + 1)), b_(CVector::Zero(order + 1)) {}
  HardyVector(CVector a, CVector b) : a_(std::move(a)), b_(std::move(b)) {
    if (a_.size() != b_.size() || a_.size() == 0)
      throw Error(ErrorKind::TruncationMismatch, "analytic and co-analytic parts differ in length");
  }
  HardyVector(const TaylorSeries& a, const TaylorSeries& b, std::size_t order) : HardyVector(order) {
    for (std::size_t n = 0; n <= order; ++n) {
      a_[static_cast<Eigen::Index>(n)] = a[n];
      b_[static_cast<Eigen::Index>(n)] = b[n];
    }
  }

  static HardyVector e(std::size_t n, std::size_t order) {
    HardyVector v(order);
    v.a_[static_cast<Eigen::Index>(n)] = 1.0;
    return v;
  }
  static HardyVector f(std::size_t n, std::size_t order) {
    HardyVector v(order);
    v.b_[static_cast<Eigen::Index>(n)] = 1.0;
    return v;
  }

  std::size_t order() const noexcept { return static_cast<std::size_t>(a_.size() - 1); }
  const CVector& a() const noexcept { return a_; }
  const CVector& b() const noexcept { return b_; }
  CVector& a() noexcept { return a_; }
  CVector& b() noexcept { return b_; }

  TaylorSeries analytic() const { return to_series(a_); }
  TaylorSeries coanalytic() const { return to_series(b_); }

  /// a(z) + conj(b(z)).
  cplx operator()(cplx z) const { return analytic()(z) + std::conj(coanalytic()(z)); }

  friend HardyVector operator+(const HardyVector& u, const HardyVector& v) {
    check(u, v);
    return {u.a_ + v.a_, u.b_ + v.b_};
  }
  friend HardyVector operator-(const HardyVector& u, const HardyVector& v) {
    check(u, v);
    return {u.a_ - v.a_, u.b_ - v.b_};
  }
  friend HardyVector operator*(cplx alpha, const HardyVector& u) { return {alpha * u.a_, std::conj(alpha) * u.b_}; }

  static void check(const HardyVector& u, const HardyVector& v) {
    if (u.order() != v.order()) throw Error(ErrorKind::TruncationMismatch, "HH^2 vectors of different order");
  }

 private:
  static TaylorSeries to_series(const CVector& v) {
    std::vector<cplx> c(v.data(), v.data() + v.size());
    return TaylorSeries(std::move(c));
  }

  CVector a_, b_;
};

/// (a + conj b, c + conj d) = <a, c> + <d, b>.
inline cplx hh_inner(const HardyVector& u, const HardyVector& v) {
  HardyVector::check(u, v);
  // Eigen's dot conjugates its left argument: x.dot(y) = sum conj(x_i) y_i
  return v.a().dot(u.a()) + u.b().dot(v.b());
}

inline double hh_norm(const HardyVector& u) { return std::sqrt(u.a().squaredNorm() + u.b().squaredNorm()); }

/// (l + conj m)(p + conj q) = l p + conj(m q), each product truncated at N.
inline HardyVector hh_product(const HardyVector& u, const HardyVector& v) {
  HardyVector::check(u, v);
  return {u.analytic() * v.analytic(), u.coanalytic() * v.coanalytic(), u.order()};
}

/// Szego kernel K_lambda: a_n = b_n = conj(lambda)^n, so that
/// (u, K_lambda) = u_a(lambda) + conj(u_b(lambda)).
inline HardyVector kernel_vector(cplx lambda, std::size_t order) {
  if (!(std::abs(lambda) < 1.0)) throw Error(ErrorKind::OutOfDisk, "kernel point must lie in the unit disk");
  HardyVector k(order);
  cplx p = 1.0;
  const cplx lc = std::conj(lambda);
  for (std::size_t n = 0; n <= order; ++n, p *= lc) {
    k.a()[static_cast<Eigen::Index>(n)] = p;
    k.b()[static_cast<Eigen::Index>(n)] = p;
  }
  return k;
}

// ---------------------------------------------------------------------------
// Block operators A + conj(B)
// ---------------------------------------------------------------------------

/// (a, b) -> (A a, B b).
struct BlockOperator {
  CMatrix A;
  CMatrix B;

  std::size_t order() const noexcept { return static_cast<std::size_t>(A.rows() - 1); }

  static BlockOperator identity(std::size_t order) {
    const auto n = static_cast<Eigen::Index>(order + 1);
    return {CMatrix::Identity(n, n), CMatrix::Identity(n, n)};
  }

  void validate() const {
    if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows() || A.rows() == 0)
      throw Error(ErrorKind::TruncationMismatch, "block operator needs square blocks of equal size");
  }
};

namespace detail {
inline void check_same(const BlockOperator& x, const BlockOperator& y) {
  x.validate();
  y.validate();
  if (x.order() != y.order()) throw Error(ErrorKind::TruncationMismatch, "block operators of different order");
}
}  // namespace detail

inline HardyVector op_apply(const BlockOperator& L, const HardyVector& u) {
  L.validate();
  if (L.order() != u.order()) throw Error(ErrorKind::TruncationMismatch, "operator and vector orders differ");
  return {L.A * u.a(), L.B * u.b()};
}

/// (A1 + conj B1)(A2 + conj B2) = A1 A2 + conj(B1 B2).
inline BlockOperator op_compose(const BlockOperator& L1, const BlockOperator& L2) {
  detail::check_same(L1, L2);
  return {L1.A * L2.A, L1.B * L2.B};
}

inline BlockOperator op_add(const BlockOperator& L1, const BlockOperator& L2) {
  detail::check_same(L1, L2);
  return {L1.A + L2.A, L1.B + L2.B};
}

/// lambda L as an operator: u -> lambda L(u) under the vector scalar rule.
inline BlockOperator op_scale(cplx lambda, const BlockOperator& L) { return {lambda * L.A, std::conj(lambda) * L.B}; }

/// L* = A* + conj(B*).
inline BlockOperator op_adjoint(const BlockOperator& L) { return {L.A.adjoint(), L.B.adjoint()}; }

// ---------------------------------------------------------------------------
// Composition operators
// ---------------------------------------------------------------------------

/// max |phi(z)| over `samples` equispaced points of the unit circle.
inline double boundary_max(const TaylorSeries& phi, std::size_t samples = 1024) {
  double m = 0.0;
  for (std::size_t k = 0; k < samples; ++k)
    m = std::max(m, std::abs(phi(std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k) / samples))));
  return m;
}

/// Self-map certificate for a polynomial symbol: by the maximum principle,
/// max over the circle <= 1 implies phi(D) within the closed disk.
inline void certify_self_map(const TaylorSeries& phi) {
  const double m = boundary_max(phi);
  if (m > 1.0 + 1e-12) throw Error(ErrorKind::SymbolNotSelfMap, "symbol does not map the unit disk into itself");
}

/// Matrix of C_phi in the monomial basis: column n holds phi^n truncated at N.
inline CMatrix comp_op_matrix(const TaylorSeries& phi, std::size_t order) {
  certify_self_map(phi);
  const auto pw = series_powers(phi, order, order);
  const auto n = static_cast<Eigen::Index>(order + 1);
  CMatrix M = CMatrix::Zero(n, n);
  for (Eigen::Index col = 0; col < n; ++col)
    for (Eigen::Index row = 0; row < n; ++row) M(row, col) = pw[static_cast<std::size_t>(col)][static_cast<std::size_t>(row)];
  return M;
}

/// C^{(alpha,beta,gamma,delta)}_{phi + conj pi}:
/// A = alpha C_phi + gamma C_pi,  B = conj(beta) C_pi + conj(delta) C_phi.
inline BlockOperator general_comp_op(const TaylorSeries& phi, const TaylorSeries& pi, cplx alpha, cplx beta,
                                     cplx gamma, cplx delta, std::size_t order) {
  const CMatrix Mphi = comp_op_matrix(phi, order);
  const CMatrix Mpi = comp_op_matrix(pi, order);
  return {alpha * Mphi + gamma * Mpi, std::conj(beta) * Mpi + std::conj(delta) * Mphi};
}

/// The simple composition operator C_phi + conj(C_pi).
inline BlockOperator simple_comp_op(const TaylorSeries& phi, const TaylorSeries& pi, std::size_t order) {
  return general_comp_op(phi, pi, 1.0, 1.0, 0.0, 0.0, order);
}

// ---------------------------------------------------------------------------
// Norms
// ---------------------------------------------------------------------------

struct PowerIterationOptions {
  double tol = 1e-10;
  int max_iterations = 10000;
};

/// Largest singular value of M by power iteration on M* M. Stops when the
/// eigen-residual |M*M v - rho v| falls below tol * rho.
inline double sigma_max(const CMatrix& M, const PowerIterationOptions& opt = {}) {
  const Eigen::Index n = M.cols();
  if (n == 0) return 0.0;
  const CMatrix G = M.adjoint() * M;
  std::mt19937_64 rng(0x5eedu);
  std::normal_distribution<double> nd;
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = cplx(nd(rng), nd(rng));
  v.normalize();
  for (int it = 0; it < opt.max_iterations; ++it) {
    const CVector w = G * v;
    const double rho = std::real(v.dot(w));
    if (rho <= 0.0 && w.norm() == 0.0) return 0.0;
    if ((w - rho * v).norm() <= opt.tol * std::abs(rho)) return std::sqrt(std::max(rho, 0.0));
    v = w / w.norm();
  }
  throw Error(ErrorKind::PowerIterationStalled, "power iteration did not converge");
}

struct OperatorNorm {
  double norm;
  double norm_A;
  double norm_B;
};

/// ||A + conj B|| = max(||A||, ||B||).
inline OperatorNorm op_norm_parts(const BlockOperator& L, const PowerIterationOptions& opt = {}) {
  L.validate();
  const double na = sigma_max(L.A, opt), nb = sigma_max(L.B, opt);
  return {std::max(na, nb), na, nb};
}

inline double op_norm(const BlockOperator& L, const PowerIterationOptions& opt = {}) {
  return op_norm_parts(L, opt).norm;
}

/// sqrt((1 + |phi(0)|) / (1 - |phi(0)|)), the classical bound on ||C_phi||.
inline double norm_bound_simple(const TaylorSeries& phi) {
  const double r = std::abs(phi[0]);
  if (!(r < 1.0)) throw Error(ErrorKind::OutOfDisk, "|phi(0)| must be < 1");
  return std::sqrt((1.0 + r) / (1.0 - r));
}

// ---------------------------------------------------------------------------
// Kernels and characterizations
// ---------------------------------------------------------------------------

struct KernelImage {
  HardyVector actual;     // (C_phi + conj C_pi)^* K_lambda
  HardyVector predicted;  // K at phi(lambda) on the analytic side, at pi(lambda) on the co-analytic side
  double tail_tolerance;  // max(|phi(l)|,|pi(l)|)^{N+1} / sqrt(1 - max^2)
};

inline KernelImage adjoint_kernel_image(const TaylorSeries& phi, const TaylorSeries& pi, cplx lambda,
                                        std::size_t order) {
  const HardyVector k = kernel_vector(lambda, order);
  const HardyVector actual = op_apply(op_adjoint(simple_comp_op(phi, pi, order)), k);
  const cplx pl = phi(lambda), ql = pi(lambda);
  const HardyVector kp = kernel_vector(pl, order), kq = kernel_vector(ql, order);
  HardyVector predicted(kp.a(), kq.b());
  const double m = std::max(std::abs(pl), std::abs(ql));
  const double tau = std::pow(m, static_cast<double>(order + 1)) / std::sqrt(1.0 - m * m);
  return {actual, predicted, tau};
}

/// Column `col` of M read as a series of order N.
inline TaylorSeries column_series(const CMatrix& M, Eigen::Index col) {
  std::vector<cplx> c(static_cast<std::size_t>(M.rows()));
  for (Eigen::Index r = 0; r < M.rows(); ++r) c[static_cast<std::size_t>(r)] = M(r, col);
  return TaylorSeries(std::move(c));
}

struct Symbols {
  TaylorSeries phi;
  TaylorSeries pi;
};

/// Monomial test: with phi = A e_1 and pi = B e_1, accept when A e_n = phi^n
/// and B e_n = pi^n (coefficientwise within tol) for every n with
/// n * deg <= degree_budget, and both symbols map the disk into itself.
inline std::optional<Symbols> is_simple_composition(const BlockOperator& L, double tol, std::size_t degree_budget) {
  L.validate();
  const std::size_t order = L.order();
  if (order < 1) return std::nullopt;
  degree_budget = std::min(degree_budget, order);
  auto check = [&](const CMatrix& M) -> std::optional<TaylorSeries> {
    const TaylorSeries sym = column_series(M, 1);
    const std::size_t deg = sym.degree(tol);
    const auto pw = series_powers(sym, order, order);
    for (std::size_t n = 0; n <= order; ++n) {
      if (n * deg > degree_budget) break;
      if (max_coeff_diff(column_series(M, static_cast<Eigen::Index>(n)), pw[n]) > tol) return std::nullopt;
    }
    if (boundary_max(sym) > 1.0 + 1e-9) return std::nullopt;
    return sym;
  };
  auto phi = check(L.A);
  if (!phi) return std::nullopt;
  auto pi = check(L.B);
  if (!pi) return std::nullopt;
  return Symbols{std::move(*phi), std::move(*pi)};
}

/// Largest coefficient of L(u v) - L(u) L(v) over the sample pairs.
inline double multiplicativity_residual(const BlockOperator& L, std::span<const std::pair<HardyVector, HardyVector>> pairs) {
  double worst = 0.0;
  for (const auto& [u, v] : pairs) {
    const HardyVector lhs = op_apply(L, hh_product(u, v));
    const HardyVector rhs = hh_product(op_apply(L, u), op_apply(L, v));
    const HardyVector d = lhs - rhs;
    worst = std::max({worst, d.a().cwiseAbs().maxCoeff(), d.b().cwiseAbs().maxCoeff()});
  }
  return worst;
}

/// L(u v) == L(u) L(v) on every sample pair, within tol.
inline bool multiplicativity_check(const BlockOperator& L, std::span<const std::pair<HardyVector, HardyVector>> pairs,
                                   double tol) {
  return multiplicativity_residual(L, pairs) < tol;
}

/// Monomial pairs (e_i, e_j) and (f_i, f_j) with i + j <= N.
inline std::vector<std::pair<HardyVector, HardyVector>> monomial_pairs(std::size_t order) {
  std::vector<std::pair<HardyVector, HardyVector>> out;
  for (std::size_t i = 0; i <= order; ++i)
    for (std::size_t j = i; i + j <= order; ++j) {
      out.emplace_back(HardyVector::e(i, order), HardyVector::e(j, order));
      out.emplace_back(HardyVector::f(i, order), HardyVector::f(j, order));
    }
  return out;
}

/// Distance from w to the nearest truncated Szego kernel, fitting the kernel
/// point from the first coefficient: K_mu has coefficients conj(mu)^n.
inline double kernel_misfit(const CVector& w) {
  const cplx mu = std::conj(w.size() > 1 ? w[1] : cplx{});
  if (!(std::abs(mu) < 1.0)) return std::numeric_limits<double>::infinity();
  const HardyVector k = kernel_vector(mu, static_cast<std::size_t>(w.size() - 1));
  return (w - k.a()).norm();
}

/// Kernel-mapping test: A* and B* send each sampled kernel to a kernel,
/// within tol.
inline double kernel_mapping_residual(const BlockOperator& L, std::span<const cplx> lambdas) {
  const BlockOperator adj = op_adjoint(L);
  double worst = 0.0;
  for (cplx l : lambdas) {
    const HardyVector w = op_apply(adj, kernel_vector(l, L.order()));
    worst = std::max({worst, kernel_misfit(w.a()), kernel_misfit(w.b())});
  }
  return worst;
}

inline bool kernel_mapping_check(const BlockOperator& L, std::span<const cplx> lambdas, double tol) {
  return kernel_mapping_residual(L, lambdas) < tol;
}

/// max(||A A* - A* A||_F, ||B B* - B* B||_F).
inline double commutator_norm(const BlockOperator& L) {
  const CMatrix ca = L.A * L.A.adjoint() - L.A.adjoint() * L.A;
  const CMatrix cb = L.B * L.B.adjoint() - L.B.adjoint() * L.B;
  return std::max(ca.norm(), cb.norm());
}

inline bool is_normal(const BlockOperator& L, double tol) { return commutator_norm(L) < tol; }

}  // namespace harmonic
