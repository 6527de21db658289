#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include "harmonic/error.hpp"

namespace harmonic {

using cplx = std::complex<double>;

inline bool is_finite(cplx z) noexcept { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

/// Truncated power series c_0 + c_1 z + ... + c_N z^N.
///
/// Every operation closes over a fixed truncation order. Binary operations
/// on series of different orders truncate to the smaller one. Composition
/// is exact when the true degree of the result fits within the order,
/// otherwise the higher terms are dropped silently.
class TaylorSeries {
 public:
  /// Zero series of order `order`.
  explicit TaylorSeries(std::size_t order = 0) : coeffs_(order + 1, cplx{0.0, 0.0}) {}

  explicit TaylorSeries(std::vector<cplx> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) coeffs_.push_back(cplx{});
    for (const auto& c : coeffs_)
      if (!is_finite(c)) throw Error(ErrorKind::NonFinite, "series coefficient is not finite");
  }

  TaylorSeries(std::initializer_list<cplx> coeffs) : TaylorSeries(std::vector<cplx>(coeffs)) {}

  static TaylorSeries monomial(std::size_t k, std::size_t order, cplx scale = 1.0) {
    TaylorSeries s(order);
    if (k <= order) s.coeffs_[k] = scale;
    return s;
  }
  static TaylorSeries identity(std::size_t order) { return monomial(1, order); }
  static TaylorSeries constant(cplx c, std::size_t order) { return monomial(0, order, c); }

  std::size_t order() const noexcept { return coeffs_.size() - 1; }
  std::span<const cplx> coeffs() const noexcept { return coeffs_; }

  cplx operator[](std::size_t n) const noexcept { return n < coeffs_.size() ? coeffs_[n] : cplx{}; }
  cplx& operator[](std::size_t n) { return coeffs_.at(n); }

  /// Index of the highest coefficient with modulus above `tol` (0 for the zero series).
  std::size_t degree(double tol = 0.0) const noexcept {
    for (std::size_t n = coeffs_.size(); n-- > 0;)
      if (std::abs(coeffs_[n]) > tol) return n;
    return 0;
  }

  bool is_zero(double tol = 0.0) const noexcept {
    return std::all_of(coeffs_.begin(), coeffs_.end(), [tol](cplx c) { return std::abs(c) <= tol; });
  }

  /// Same coefficients, padded with zeros or cut to `order`.
  TaylorSeries truncated(std::size_t order) const {
    TaylorSeries s(order);
    std::copy_n(coeffs_.begin(), std::min(coeffs_.size(), order + 1), s.coeffs_.begin());
    return s;
  }

  /// Horner evaluation.
  cplx operator()(cplx z) const noexcept {
    cplx acc{};
    for (std::size_t n = coeffs_.size(); n-- > 0;) acc = acc * z + coeffs_[n];
    return acc;
  }

  friend TaylorSeries operator+(const TaylorSeries& x, const TaylorSeries& y) {
    TaylorSeries s(std::min(x.order(), y.order()));
    for (std::size_t n = 0; n <= s.order(); ++n) s.coeffs_[n] = x.coeffs_[n] + y.coeffs_[n];
    return s;
  }
  friend TaylorSeries operator-(const TaylorSeries& x, const TaylorSeries& y) {
    TaylorSeries s(std::min(x.order(), y.order()));
    for (std::size_t n = 0; n <= s.order(); ++n) s.coeffs_[n] = x.coeffs_[n] - y.coeffs_[n];
    return s;
  }
  friend TaylorSeries operator*(cplx a, const TaylorSeries& x) {
    TaylorSeries s = x;
    for (auto& c : s.coeffs_) c *= a;
    return s;
  }
  /// Truncated Cauchy product.
  friend TaylorSeries operator*(const TaylorSeries& x, const TaylorSeries& y) {
    const std::size_t order = std::min(x.order(), y.order());
    const std::size_t dx = x.degree(), dy = y.degree();
    TaylorSeries s(order);
    for (std::size_t i = 0; i <= std::min(dx, order); ++i) {
      if (x.coeffs_[i] == cplx{}) continue;
      for (std::size_t j = 0; j <= dy && i + j <= order; ++j) s.coeffs_[i + j] += x.coeffs_[i] * y.coeffs_[j];
    }
    return s;
  }

  friend bool operator==(const TaylorSeries&, const TaylorSeries&) = default;

 private:
  std::vector<cplx> coeffs_;
};

/// Largest coefficient modulus of x - y over the common order.
inline double max_coeff_diff(const TaylorSeries& x, const TaylorSeries& y) {
  double m = 0.0;
  for (std::size_t n = 0; n <= std::max(x.order(), y.order()); ++n) m = std::max(m, std::abs(x[n] - y[n]));
  return m;
}

inline double max_coeff_abs(const TaylorSeries& x) {
  double m = 0.0;
  for (cplx c : x.coeffs()) m = std::max(m, std::abs(c));
  return m;
}

inline cplx series_eval(const TaylorSeries& f, cplx z) noexcept { return f(z); }

/// outer(inner(z)) through z^min(N_outer, N_inner), by Horner's rule on series.
inline TaylorSeries series_compose(const TaylorSeries& outer, const TaylorSeries& inner) {
  const std::size_t order = std::min(outer.order(), inner.order());
  const TaylorSeries in = inner.truncated(order);
  const std::size_t d = outer.degree();
  TaylorSeries acc = TaylorSeries::constant(outer[d], order);
  for (std::size_t n = d; n-- > 0;) {
    acc = acc * in;
    acc[0] += outer[n];
  }
  return acc;
}

/// Formal derivative; the result has order N-1 (order 0 for constants).
inline TaylorSeries series_derivative(const TaylorSeries& f) {
  if (f.order() == 0) return TaylorSeries(0);
  TaylorSeries d(f.order() - 1);
  for (std::size_t n = 1; n <= f.order(); ++n) d[n - 1] = static_cast<double>(n) * f[n];
  return d;
}

/// f^k with truncation at f's order; f^0 = 1.
inline TaylorSeries series_pow(const TaylorSeries& f, unsigned k) {
  TaylorSeries result = TaylorSeries::constant(1.0, f.order());
  TaylorSeries base = f;
  while (k > 0) {
    if (k & 1u) result = result * base;
    k >>= 1u;
    if (k > 0) base = base * base;
  }
  return result;
}

/// Powers f^0 .. f^count, each truncated at `order`.
inline std::vector<TaylorSeries> series_powers(const TaylorSeries& f, std::size_t count, std::size_t order) {
  std::vector<TaylorSeries> pw;
  pw.reserve(count + 1);
  const TaylorSeries base = f.truncated(order);
  pw.push_back(TaylorSeries::constant(1.0, order));
  for (std::size_t m = 1; m <= count; ++m) pw.push_back(pw.back() * base);
  return pw;
}

/// Compositional inverse g with f(g(z)) = z + O(z^{N+1}).
///
/// Requires c_0 = 0 and c_1 != 0. Coefficients are fixed one order at a time:
/// with g correct through z^{n-1}, the z^n coefficient of f(g) - z equals
/// c_1 * (error in g_n), so g_n is corrected by that residual over c_1.
inline TaylorSeries series_invert(const TaylorSeries& f, std::size_t order) {
  if (std::abs(f[0]) > 1e-14) throw Error(ErrorKind::NotNormalized, "series inversion needs f(0) = 0");
  const cplx c1 = f[1];
  if (std::abs(c1) <= 1e-12) throw Error(ErrorKind::NotInvertible, "series inversion needs f'(0) != 0");
  const TaylorSeries fo = f.truncated(order);
  TaylorSeries g(order);
  if (order >= 1) g[1] = 1.0 / c1;
  for (std::size_t n = 2; n <= order; ++n) {
    // only orders <= n matter for this step
    const TaylorSeries r = series_compose(fo.truncated(n), g.truncated(n));
    g[n] -= r[n] / c1;
  }
  return g;
}

}  // namespace harmonic
