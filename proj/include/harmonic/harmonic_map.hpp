#pragma once

#include <algorithm>
#include <limits>
#include <span>
#include <utility>

#include "harmonic/analytic.hpp"

namespace harmonic {

/// f = h + conj(g) stored as the formal pair (h, g).
///
/// Constants are never moved between the parts: (h + c, g) and (h, g + conj(c))
/// are different pairs even though they are the same function.
struct HarmonicMap {
  AnalyticFn h;
  AnalyticFn g;

  /// z + conj(z), the unit of the direct composition.
  static HarmonicMap unit(std::size_t order) {
    return {TaylorSeries::identity(order), TaylorSeries::identity(order)};
  }
  static HarmonicMap mobius(const MoebiusTransform& a, const MoebiusTransform& b) { return {a, b}; }

  /// g == 0: the map is analytic. Allowed, but callers that need a genuine
  /// harmonic map can reject it.
  bool analytic_degenerate() const {
    const auto* s = std::get_if<TaylorSeries>(&g);
    return s && s->is_zero();
  }

  bool both_series() const { return is_series(h) && is_series(g); }
  bool both_moebius() const { return is_moebius(h) && is_moebius(g); }
};

/// A harmonic complex number mu + conj(omega); either part may be infinite.
struct HarmonicConstant {
  ExtComplex mu;
  ExtComplex omega;

  bool is_finite() const { return mu.is_finite() && omega.is_finite(); }
  /// mu + conj(omega) as a point of the sphere.
  ExtComplex value() const {
    if (!is_finite()) return ExtComplex::infinity();
    return ExtComplex(mu.value() + std::conj(omega.value()));
  }
};

/// (h1 o h2, g1 o g2).
inline HarmonicMap compose_direct(const HarmonicMap& f1, const HarmonicMap& f2) {
  return {compose(f1.h, f2.h), compose(f1.g, f2.g)};
}

/// (h1 o g2, g1 o h2).
inline HarmonicMap compose_crossed(const HarmonicMap& f1, const HarmonicMap& f2) {
  return {compose(f1.h, f2.g), compose(f1.g, f2.h)};
}

/// The four-parameter product
///   alpha (h1 o h2) + beta conj(g1 o g2) + gamma (h1 o g2) + delta conj(g1 o h2).
/// The co-analytic part stores conj(beta), conj(delta) so the pair represents
/// exactly that function.
inline HarmonicMap compose_blend(const HarmonicMap& f1, const HarmonicMap& f2, cplx alpha, cplx beta, cplx gamma,
                                 cplx delta) {
  if (!f1.both_series() || !f2.both_series())
    throw Error(ErrorKind::RepresentationMismatch, "blend composition needs series parts");
  const auto& h1 = std::get<TaylorSeries>(f1.h);
  const auto& g1 = std::get<TaylorSeries>(f1.g);
  const auto& h2 = std::get<TaylorSeries>(f2.h);
  const auto& g2 = std::get<TaylorSeries>(f2.g);
  TaylorSeries a = alpha * series_compose(h1, h2) + gamma * series_compose(h1, g2);
  TaylorSeries b = std::conj(beta) * series_compose(g1, g2) + std::conj(delta) * series_compose(g1, h2);
  return {std::move(a), std::move(b)};
}

/// conj(f) = g + conj(h).
inline HarmonicMap conjugate_map(const HarmonicMap& f) { return {f.g, f.h}; }

/// h(z) + conj(g(z)); infinite when either part hits a pole.
inline ExtComplex eval_harmonic(const HarmonicMap& f, const ExtComplex& z) {
  const ExtComplex hz = eval(f.h, z);
  const ExtComplex gz = eval(f.g, z);
  if (hz.is_infinite() || gz.is_infinite()) return ExtComplex::infinity();
  return ExtComplex(hz.value() + std::conj(gz.value()));
}

inline bool is_univalent_part(const AnalyticFn& f) {
  if (is_moebius(f)) return true;
  return std::abs(std::get<TaylorSeries>(f)[1]) > 1e-12;
}

/// Local univalence test: each part is Moebius or has nonzero linear coefficient.
inline bool is_locally_univalent(const HarmonicMap& f) { return is_univalent_part(f.h) && is_univalent_part(f.g); }

enum class Law { Direct, Crossed };

struct ConjugacyCheck {
  double residual = 0.0;
  bool witness_univalent = false;
};

/// max over `samples` of |(w o_H f1)(z) - (f2 o_H w)(z)|, evaluated by nesting
/// the parts pointwise (no series truncation). Sample points where any side
/// is infinite count as a mismatch unless both sides are infinite.
inline ConjugacyCheck verify_conjugacy(const HarmonicMap& witness, const HarmonicMap& f1, const HarmonicMap& f2,
                                       Law law, std::span<const cplx> samples, bool strict = false) {
  ConjugacyCheck out;
  out.witness_univalent = is_locally_univalent(witness);
  if (strict && !out.witness_univalent)
    throw Error(ErrorKind::InvalidArgument, "conjugacy witness is not univalent");
  auto apply = [law](const HarmonicMap& outer, const HarmonicMap& inner, cplx z) -> ExtComplex {
    const ExtComplex hz = eval(inner.h, z), gz = eval(inner.g, z);
    const ExtComplex first = eval(outer.h, law == Law::Direct ? hz : gz);
    const ExtComplex second = eval(outer.g, law == Law::Direct ? gz : hz);
    if (first.is_infinite() || second.is_infinite()) return ExtComplex::infinity();
    return ExtComplex(first.value() + std::conj(second.value()));
  };
  for (cplx z : samples) {
    const ExtComplex lhs = apply(witness, f1, z);
    const ExtComplex rhs = apply(f2, witness, z);
    if (lhs.is_infinite() || rhs.is_infinite()) {
      if (lhs.is_infinite() != rhs.is_infinite()) out.residual = std::numeric_limits<double>::infinity();
      continue;
    }
    out.residual = std::max(out.residual, std::abs(lhs.value() - rhs.value()));
  }
  return out;
}

}  // namespace harmonic
