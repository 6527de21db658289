#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "harmonic/error.hpp"
#include "harmonic/series.hpp"

namespace harmonic {

/// Thrown when the iteration does not settle; carries the best estimates.
class RootFindingError : public Error {
 public:
  RootFindingError(const std::string& what, std::vector<cplx> partial)
      : Error(ErrorKind::RootFindingFailed, what), partial_(std::move(partial)) {}
  const std::vector<cplx>& partial() const noexcept { return partial_; }

 private:
  std::vector<cplx> partial_;
};

struct AberthOptions {
  int max_iterations = 200;
  int max_restarts = 8;
  std::uint64_t seed = 0x9e3779b97f4a7c15ull;
};

namespace detail {

// p(z) and p'(z) together, plus sum |c_k| |z|^k for the backward-error test.
struct HornerResult {
  cplx p, dp;
  double magnitude;
};

inline HornerResult horner(std::span<const cplx> c, cplx z) {
  cplx p{}, dp{};
  double mag = 0.0;
  const double az = std::abs(z);
  for (std::size_t n = c.size(); n-- > 0;) {
    dp = dp * z + p;
    p = p * z + c[n];
    mag = mag * az + std::abs(c[n]);
  }
  return {p, dp, mag};
}

}  // namespace detail

/// All roots of sum c_k z^k (leading coefficient c.back() must be nonzero)
/// by Aberth-Ehrlich simultaneous iteration.
///
/// A root is accepted once |p(z)| is within a few ulps of the evaluation
/// error bound. Non-convergence triggers a restart from randomly perturbed
/// starting points; after `max_restarts` the best estimates are reported in a
/// RootFindingError.
inline std::vector<cplx> polynomial_roots(std::span<const cplx> coeffs, const AberthOptions& opt = {}) {
  std::vector<cplx> c(coeffs.begin(), coeffs.end());
  while (c.size() > 1 && c.back() == cplx{}) c.pop_back();
  const std::size_t deg = c.size() - 1;
  if (deg == 0) return {};
  if (deg == 1) return {-c[0] / c[1]};

  // Cauchy-type radius for the initial circle
  double radius = 0.0;
  for (std::size_t k = 0; k < deg; ++k)
    radius = std::max(radius, std::pow(std::abs(c[k] / c[deg]), 1.0 / static_cast<double>(deg - k)));
  radius = std::max(radius, 1e-3);

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr double eps = std::numeric_limits<double>::epsilon();

  std::vector<cplx> z(deg);
  std::vector<bool> done(deg);
  for (int attempt = 0; attempt <= opt.max_restarts; ++attempt) {
    const double phase = attempt == 0 ? 0.4 : 2.0 * std::numbers::pi * unit(rng);
    const double rscale = attempt == 0 ? 1.0 : 0.5 + unit(rng);
    for (std::size_t k = 0; k < deg; ++k)
      z[k] = std::polar(radius * rscale, phase + 2.0 * std::numbers::pi * static_cast<double>(k) / deg);
    std::fill(done.begin(), done.end(), false);

    for (int it = 0; it < opt.max_iterations; ++it) {
      bool all = true;
      for (std::size_t k = 0; k < deg; ++k) {
        if (done[k]) continue;
        const auto hr = detail::horner(c, z[k]);
        if (std::abs(hr.p) <= 4.0 * eps * hr.magnitude) {
          done[k] = true;
          continue;
        }
        all = false;
        const cplx ratio = hr.p / hr.dp;
        cplx sum{};
        for (std::size_t j = 0; j < deg; ++j)
          if (j != k) sum += 1.0 / (z[k] - z[j]);
        const cplx step = ratio / (1.0 - ratio * sum);
        if (is_finite(step)) z[k] -= step;
      }
      if (all) return z;
    }
  }
  throw RootFindingError("Aberth iteration did not converge", z);
}

}  // namespace harmonic
