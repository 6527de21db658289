#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>

#include "harmonic/harmonic_map.hpp"

namespace harmonic {

enum class LinearizationKind { Koenigs, BoettcherAnalyticSide, BoettcherCoanalyticSide, BoettcherBoth };

constexpr std::string_view to_string(LinearizationKind k) noexcept {
  switch (k) {
    case LinearizationKind::Koenigs: return "koenigs";
    case LinearizationKind::BoettcherAnalyticSide: return "boettcher_analytic_side";
    case LinearizationKind::BoettcherCoanalyticSide: return "boettcher_coanalytic_side";
    case LinearizationKind::BoettcherBoth: return "boettcher_both";
  }
  return "unknown";
}

/// phi = phi_h + conj(phi_g) conjugating f to its model map under the direct
/// composition: phi (-) f = model (-) phi.
struct LinearizationResult {
  HarmonicMap phi;
  LinearizationKind kind = LinearizationKind::Koenigs;
  cplx lambda{};
  cplx theta{};
  std::optional<unsigned> p;    // local degree of h when superattracting
  std::optional<unsigned> p_g;  // local degree of g when superattracting
  double residual = 0.0;
};

/// Coefficient residual max_n |[phi o h - lambda phi]_n| through phi's order.
inline double koenigs_residual(const TaylorSeries& phi, const TaylorSeries& h, cplx lambda) {
  return max_coeff_abs(series_compose(phi, h.truncated(phi.order())) - lambda * phi);
}

/// Coefficient residual of phi o h - phi^p through phi's order.
inline double boettcher_residual(const TaylorSeries& phi, const TaylorSeries& h, unsigned p) {
  return max_coeff_abs(series_compose(phi, h.truncated(phi.order())) - series_pow(phi, p));
}

namespace detail {

inline void require_fixed_at_zero(const TaylorSeries& h) {
  if (std::abs(h[0]) > 1e-14) throw Error(ErrorKind::NotFixedAtZero, "h(0) != 0");
}

}  // namespace detail

/// Koenigs function phi with phi(h(z)) = lambda phi(z) + O(z^{N+1}), phi'(0) = 1.
///
/// Matching z^n coefficients gives
///   c_n = (sum_{m<n} c_m [h^m]_n) / (lambda - lambda^n),   c_1 = 1.
inline TaylorSeries koenigs_series(const TaylorSeries& h, std::size_t order) {
  detail::require_fixed_at_zero(h);
  const cplx lambda = h[1];
  const double r = std::abs(lambda);
  if (!(r > 0.0 && r < 1.0))
    throw Error(ErrorKind::MultiplierOutOfRange, "Koenigs linearization needs 0 < |h'(0)| < 1");
  TaylorSeries phi(order);
  if (order == 0) return phi;
  phi[1] = 1.0;
  const auto pw = series_powers(h, order, order);
  cplx lambda_n = lambda;
  for (std::size_t n = 2; n <= order; ++n) {
    lambda_n *= lambda;
    cplx acc{};
    for (std::size_t m = 1; m < n; ++m) acc += phi[m] * pw[m][n];
    phi[n] = acc / (lambda - lambda_n);
  }
  return phi;
}

/// Index p of the first nonzero coefficient of a superattracting series.
inline unsigned local_degree(const TaylorSeries& h) {
  if (std::abs(h[1]) > 1e-14) throw Error(ErrorKind::NotSuperattracting, "h'(0) != 0");
  for (std::size_t n = 2; n <= h.order(); ++n)
    if (h[n] != cplx{}) return static_cast<unsigned>(n);
  throw Error(ErrorKind::NotSuperattracting, "h has no nonzero coefficient of order >= 2");
}

/// Boettcher function phi with phi(h(z)) = phi(z)^p + O(z^{N+1}).
///
/// phi(z) = beta z + ..., beta^{p-1} = a_p; `root_index` selects which
/// (p-1)-th root (0 = principal). For n >= 2 the coefficient phi_n enters the
/// z^{n+p-1} coefficient of phi^p as p beta^{p-1} phi_n and does not enter
/// phi o h there, so each phi_n is the residual at that order divided by
/// p beta^{p-1}.
inline TaylorSeries boettcher_series(const TaylorSeries& h, std::size_t order, unsigned root_index = 0) {
  detail::require_fixed_at_zero(h);
  const unsigned p = local_degree(h);
  const cplx ap = h[p];
  const cplx beta = std::pow(ap, 1.0 / static_cast<double>(p - 1)) *
                    std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(root_index) / (p - 1));
  TaylorSeries phi(order);
  if (order == 0) return phi;
  phi[1] = beta;
  const std::size_t work = order + p - 1;
  const TaylorSeries hw = h.truncated(work);
  const cplx pivot = static_cast<double>(p) * std::pow(beta, static_cast<int>(p - 1));
  for (std::size_t n = 2; n <= order; ++n) {
    const std::size_t k = n + p - 1;
    const TaylorSeries cur = phi.truncated(k);
    const TaylorSeries hk = hw.truncated(k);
    const cplx resid = series_compose(cur, hk)[k] - series_pow(cur, p)[k];
    phi[n] = resid / pivot;
  }
  return phi;
}

namespace detail {

inline TaylorSeries part_series(const AnalyticFn& f, std::size_t order, const char* which) {
  try {
    return as_series(f, order);
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(which) + " part: " + e.what());
  }
}

template <class Fn>
TaylorSeries run_part(const char* which, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(which) + " part: " + e.what());
  }
}

}  // namespace detail

/// Koenigs on both parts: phi (-) f = (lambda z + conj(theta z)) (-) phi.
inline LinearizationResult harmonic_koenigs(const HarmonicMap& f, std::size_t order) {
  const TaylorSeries h = detail::part_series(f.h, order, "analytic");
  const TaylorSeries g = detail::part_series(f.g, order, "co-analytic");
  LinearizationResult r;
  r.kind = LinearizationKind::Koenigs;
  r.lambda = h[1];
  r.theta = g[1];
  const TaylorSeries ph = detail::run_part("analytic", [&] { return koenigs_series(h, order); });
  const TaylorSeries pg = detail::run_part("co-analytic", [&] { return koenigs_series(g, order); });
  r.residual = std::max(koenigs_residual(ph, h, r.lambda), koenigs_residual(pg, g, r.theta));
  r.phi = {ph, pg};
  return r;
}

/// Boettcher on the analytic part (lambda = 0), Koenigs on the co-analytic part:
/// phi (-) f = (z^p + conj(theta z)) (-) phi.
inline LinearizationResult harmonic_boettcher(const HarmonicMap& f, std::size_t order, unsigned root_index = 0) {
  const TaylorSeries h = detail::part_series(f.h, order, "analytic");
  const TaylorSeries g = detail::part_series(f.g, order, "co-analytic");
  LinearizationResult r;
  r.kind = LinearizationKind::BoettcherAnalyticSide;
  r.lambda = h[1];
  r.theta = g[1];
  const TaylorSeries ph = detail::run_part("analytic", [&] { return boettcher_series(h, order, root_index); });
  r.p = local_degree(h);
  const TaylorSeries pg = detail::run_part("co-analytic", [&] { return koenigs_series(g, order); });
  r.residual = std::max(boettcher_residual(ph, h, *r.p), koenigs_residual(pg, g, r.theta));
  r.phi = {ph, pg};
  return r;
}

/// Picks Koenigs or Boettcher per part from the multipliers at 0. Covers the
/// theta = 0 and lambda = theta = 0 cases by applying Boettcher to whichever
/// part is superattracting.
inline LinearizationResult harmonic_linearize(const HarmonicMap& f, std::size_t order) {
  const TaylorSeries h = detail::part_series(f.h, order, "analytic");
  const TaylorSeries g = detail::part_series(f.g, order, "co-analytic");
  const bool h_super = std::abs(h[1]) <= 1e-14;
  const bool g_super = std::abs(g[1]) <= 1e-14;
  if (!h_super && !g_super) return harmonic_koenigs(f, order);
  if (h_super && !g_super) return harmonic_boettcher(f, order);
  LinearizationResult r;
  r.lambda = h[1];
  r.theta = g[1];
  const TaylorSeries pg = detail::run_part("co-analytic", [&] { return boettcher_series(g, order); });
  r.p_g = local_degree(g);
  double res_g = boettcher_residual(pg, g, *r.p_g);
  TaylorSeries ph;
  double res_h = 0.0;
  if (h_super) {
    r.kind = LinearizationKind::BoettcherBoth;
    ph = detail::run_part("analytic", [&] { return boettcher_series(h, order); });
    r.p = local_degree(h);
    res_h = boettcher_residual(ph, h, *r.p);
  } else {
    r.kind = LinearizationKind::BoettcherCoanalyticSide;
    ph = detail::run_part("analytic", [&] { return koenigs_series(h, order); });
    res_h = koenigs_residual(ph, h, r.lambda);
  }
  r.residual = std::max(res_h, res_g);
  r.phi = {ph, pg};
  return r;
}

/// The model map the result conjugates f to: (lambda z or z^p) + conj(theta z or z^q).
inline HarmonicMap linearization_model(const LinearizationResult& r, std::size_t order) {
  auto side = [order](std::optional<unsigned> p, cplx m) {
    return p ? TaylorSeries::monomial(*p, order) : TaylorSeries::monomial(1, order, m);
  };
  return {side(r.p, r.lambda), side(r.p_g, r.theta)};
}

}  // namespace harmonic
