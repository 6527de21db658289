#pragma once

#include <variant>

#include "harmonic/moebius.hpp"
#include "harmonic/series.hpp"

namespace harmonic {

/// Uniform carrier for the analytic and co-analytic parts of a harmonic map.
using AnalyticFn = std::variant<TaylorSeries, MoebiusTransform>;

inline bool is_series(const AnalyticFn& f) noexcept { return std::holds_alternative<TaylorSeries>(f); }
inline bool is_moebius(const AnalyticFn& f) noexcept { return std::holds_alternative<MoebiusTransform>(f); }

inline ExtComplex eval(const AnalyticFn& f, const ExtComplex& z) {
  if (const auto* s = std::get_if<TaylorSeries>(&f)) {
    if (z.is_infinite()) return ExtComplex::infinity();
    return ExtComplex((*s)(z.value()));
  }
  return std::get<MoebiusTransform>(f)(z);
}

inline cplx derivative_at(const AnalyticFn& f, cplx z) {
  if (const auto* s = std::get_if<TaylorSeries>(&f)) return series_derivative(*s)(z);
  return std::get<MoebiusTransform>(f).derivative(z);
}

/// Series view of f about 0. Moebius parts are expanded only when analytic at 0.
inline TaylorSeries as_series(const AnalyticFn& f, std::size_t order) {
  if (const auto* s = std::get_if<TaylorSeries>(&f)) return *s;
  return std::get<MoebiusTransform>(f).to_series(order);
}

/// Exact conversion of an affine Moebius transform to a degree-1 series.
inline TaylorSeries affine_series(const MoebiusTransform& m, std::size_t order) {
  TaylorSeries s(std::max<std::size_t>(order, 1));
  s[0] = m.b() / m.d();
  s[1] = m.a() / m.d();
  return s;
}

/// outer o inner.
///
/// Series o series and Moebius o Moebius are native. A mixed pair is accepted
/// only when the Moebius side is affine, since that converts to a polynomial
/// with no truncation; anything else is a RepresentationMismatch.
inline AnalyticFn compose(const AnalyticFn& outer, const AnalyticFn& inner) {
  const auto* so = std::get_if<TaylorSeries>(&outer);
  const auto* si = std::get_if<TaylorSeries>(&inner);
  if (so && si) return series_compose(*so, *si);
  if (!so && !si) return mobius_compose(std::get<MoebiusTransform>(outer), std::get<MoebiusTransform>(inner));
  if (so) {
    const auto& m = std::get<MoebiusTransform>(inner);
    if (!m.is_affine())
      throw Error(ErrorKind::RepresentationMismatch, "series composed with a non-affine Moebius transform");
    return series_compose(*so, affine_series(m, so->order()));
  }
  const auto& m = std::get<MoebiusTransform>(outer);
  if (!m.is_affine())
    throw Error(ErrorKind::RepresentationMismatch, "non-affine Moebius transform composed with a series");
  return series_compose(affine_series(m, si->order()), *si);
}

inline std::size_t order_of(const AnalyticFn& f) noexcept {
  if (const auto* s = std::get_if<TaylorSeries>(&f)) return s->order();
  return 0;
}

}  // namespace harmonic
