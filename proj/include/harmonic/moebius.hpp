#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "harmonic/error.hpp"
#include "harmonic/series.hpp"

namespace harmonic {

/// A point of the Riemann sphere: a finite complex number or infinity.
class ExtComplex {
 public:
  constexpr ExtComplex() = default;
  constexpr ExtComplex(cplx z) : z_(z) {}  // NOLINT(google-explicit-constructor)

  static constexpr ExtComplex infinity() {
    ExtComplex e;
    e.inf_ = true;
    return e;
  }

  constexpr bool is_infinite() const noexcept { return inf_; }
  constexpr bool is_finite() const noexcept { return !inf_; }
  /// Finite value; meaningless when infinite.
  constexpr cplx value() const noexcept { return z_; }

  friend constexpr bool operator==(const ExtComplex& x, const ExtComplex& y) noexcept {
    return x.inf_ == y.inf_ && (x.inf_ || x.z_ == y.z_);
  }

 private:
  cplx z_{};
  bool inf_ = false;
};

/// Chordal-style closeness: both infinite, or both finite and within tol.
inline bool ext_close(const ExtComplex& x, const ExtComplex& y, double tol) {
  if (x.is_infinite() || y.is_infinite()) return x.is_infinite() && y.is_infinite();
  return std::abs(x.value() - y.value()) <= tol;
}

/// T(z) = (a z + b) / (c z + d) with projective equality.
class MoebiusTransform {
 public:
  static constexpr double kDetTol = 1e-14;
  static constexpr double kProjTol = 1e-12;

  MoebiusTransform() : MoebiusTransform(1.0, 0.0, 0.0, 1.0) {}

  MoebiusTransform(cplx a, cplx b, cplx c, cplx d) : m_{a, b, c, d} {
    for (cplx e : m_)
      if (!harmonic::is_finite(e)) throw Error(ErrorKind::NonFinite, "Moebius entry is not finite");
    const double scale = max_abs();
    if (scale == 0.0 || std::abs(det() / (scale * scale)) <= kDetTol)
      throw Error(ErrorKind::DegenerateMatrix, "Moebius matrix is singular");
  }

  static MoebiusTransform identity() { return {}; }

  cplx a() const noexcept { return m_[0]; }
  cplx b() const noexcept { return m_[1]; }
  cplx c() const noexcept { return m_[2]; }
  cplx d() const noexcept { return m_[3]; }
  const std::array<cplx, 4>& entries() const noexcept { return m_; }

  cplx det() const noexcept { return m_[0] * m_[3] - m_[1] * m_[2]; }

  double max_abs() const noexcept {
    double s = 0.0;
    for (cplx e : m_) s = std::max(s, std::abs(e));
    return s;
  }

  /// Representative whose largest-modulus entry equals 1.
  MoebiusTransform normalized() const {
    std::size_t k = 0;
    for (std::size_t i = 1; i < 4; ++i)
      if (std::abs(m_[i]) > std::abs(m_[k])) k = i;
    const cplx s = m_[k];
    return {m_[0] / s, m_[1] / s, m_[2] / s, m_[3] / s};
  }

  /// c == 0 after normalization: the map is z -> (a z + b) / d.
  bool is_affine() const noexcept { return std::abs(m_[2]) <= kProjTol * max_abs(); }

  bool is_identity() const noexcept {
    const double s = max_abs();
    return std::abs(m_[1]) <= kProjTol * s && std::abs(m_[2]) <= kProjTol * s &&
           std::abs(m_[0] - m_[3]) <= kProjTol * s;
  }

  ExtComplex operator()(const ExtComplex& z) const noexcept {
    if (z.is_infinite()) {
      if (is_affine()) return ExtComplex::infinity();
      return ExtComplex(m_[0] / m_[2]);
    }
    const cplx w = z.value();
    const cplx num = m_[0] * w + m_[1];
    const cplx den = m_[2] * w + m_[3];
    const double scale = std::abs(m_[2] * w) + std::abs(m_[3]);
    if (std::abs(den) <= 1e-15 * scale || den == cplx{}) return ExtComplex::infinity();
    return ExtComplex(num / den);
  }

  /// T'(z) = det / (c z + d)^2 for finite z.
  cplx derivative(cplx z) const noexcept {
    const cplx den = m_[2] * z + m_[3];
    return det() / (den * den);
  }

  /// Taylor series about 0 through `order`; requires T analytic at 0 (d != 0).
  TaylorSeries to_series(std::size_t order) const {
    if (std::abs(m_[3]) <= kProjTol * max_abs())
      throw Error(ErrorKind::RepresentationMismatch, "Moebius transform has a pole at 0");
    // (a z + b)/(d (1 + (c/d) z)) = ((a z + b)/d) * sum (-(c/d) z)^k
    TaylorSeries geo(order);
    const cplx r = -m_[2] / m_[3];
    cplx p = 1.0;
    for (std::size_t k = 0; k <= order; ++k, p *= r) geo[k] = p;
    TaylorSeries lin(order);
    lin[0] = m_[1] / m_[3];
    if (order >= 1) lin[1] = m_[0] / m_[3];
    return lin * geo;
  }

 private:
  std::array<cplx, 4> m_;
};

/// Projective equality: x == s*y for some s != 0, to relative tolerance `tol`.
inline bool projectively_equal(const MoebiusTransform& x, const MoebiusTransform& y,
                               double tol = MoebiusTransform::kProjTol) {
  const MoebiusTransform xn = x.normalized();
  std::size_t k = 0;
  for (std::size_t i = 1; i < 4; ++i)
    if (std::abs(xn.entries()[i]) > std::abs(xn.entries()[k])) k = i;
  const cplx yk = y.entries()[k];
  if (std::abs(yk) <= tol * y.max_abs()) return false;
  const cplx s = xn.entries()[k] / yk;
  for (std::size_t i = 0; i < 4; ++i)
    if (std::abs(xn.entries()[i] - s * y.entries()[i]) > tol) return false;
  return true;
}

inline ExtComplex mobius_eval(const MoebiusTransform& m, const ExtComplex& z) noexcept { return m(z); }

/// Matrix product m1 * m2, i.e. the map z -> m1(m2(z)).
inline MoebiusTransform mobius_compose(const MoebiusTransform& m1, const MoebiusTransform& m2) {
  return {m1.a() * m2.a() + m1.b() * m2.c(), m1.a() * m2.b() + m1.b() * m2.d(),
          m1.c() * m2.a() + m1.d() * m2.c(), m1.c() * m2.b() + m1.d() * m2.d()};
}

/// Adjugate.
inline MoebiusTransform mobius_inverse(const MoebiusTransform& m) { return {m.d(), -m.b(), -m.c(), m.a()}; }

/// Fixed points on the sphere: roots of c z^2 + (d - a) z - b = 0, plus
/// infinity when c = 0. Parabolic maps return a single point.
inline std::vector<ExtComplex> mobius_fixed_points(const MoebiusTransform& m) {
  if (m.is_identity()) throw Error(ErrorKind::IdentityTransform, "every point is fixed by the identity");
  const MoebiusTransform n = m.normalized();
  const double tol = MoebiusTransform::kProjTol;
  const cplx a = n.a(), b = n.b(), c = n.c(), d = n.d();
  std::vector<ExtComplex> out;
  if (std::abs(c) <= tol) {
    if (std::abs(d - a) > tol) out.emplace_back(b / (d - a));
    out.push_back(ExtComplex::infinity());
    return out;
  }
  const cplx p = (d - a);
  const cplx disc = p * p + 4.0 * c * b;
  if (std::abs(disc) <= tol) {
    out.emplace_back(-p / (2.0 * c));
    return out;
  }
  const cplx sq = std::sqrt(disc);
  // pick the sign that avoids cancellation, then use Vieta for the other root
  const cplx q = -0.5 * (p + (std::real(std::conj(p) * sq) >= 0.0 ? sq : -sq));
  const cplx r1 = q / c;
  const cplx r2 = (q != cplx{}) ? -b / q : (-p - q * 2.0) / (2.0 * c);
  out.emplace_back(r1);
  out.emplace_back(r2);
  return out;
}

/// Multiplier of m at a fixed point; at infinity uses the chart w = 1/z.
inline cplx mobius_multiplier(const MoebiusTransform& m, const ExtComplex& fixed) {
  if (fixed.is_infinite()) return m.d() / m.a();
  return m.derivative(fixed.value());
}

}  // namespace harmonic
