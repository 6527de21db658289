#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "harmonic/harmonic_map.hpp"
#include "harmonic/roots.hpp"

namespace harmonic {

// ---------------------------------------------------------------------------
// Orbits
// ---------------------------------------------------------------------------

enum class OrbitStatus { Converged, Escaped, EscapedAtPole, MaxIter };

constexpr std::string_view to_string(OrbitStatus s) noexcept {
  switch (s) {
    case OrbitStatus::Converged: return "converged";
    case OrbitStatus::Escaped: return "escaped";
    case OrbitStatus::EscapedAtPole: return "escaped-at-pole";
    case OrbitStatus::MaxIter: return "max-iter";
  }
  return "unknown";
}

struct OrbitOptions {
  std::size_t n_max = 1000;
  double tol = 1e-9;
  double escape_radius = 1e6;
  /// Successive steps within tol required to declare convergence.
  int stable_steps = 3;
  /// false: keep iterating to n_max after convergence (status stays Converged).
  bool stop_when_converged = true;
};

/// points[0] = z0 + conj(z0) (the unit map), points[n] = f^n(z0) under `law`.
struct Orbit {
  Law law = Law::Direct;
  cplx z0{};
  std::vector<cplx> points;
  OrbitStatus status = OrbitStatus::MaxIter;
  /// Set when status == Converged: the (mu, omega) the two parts settled on.
  std::optional<HarmonicConstant> limit;
};

namespace detail {

// Shared driver: `step` advances its state and returns the new (analytic,
// co-analytic) values, or nullopt on a pole.
template <class Step>
Orbit run_orbit(Law law, cplx z0, const OrbitOptions& opt, Step&& step) {
  Orbit orb;
  orb.law = law;
  orb.z0 = z0;
  orb.points.reserve(std::min<std::size_t>(opt.n_max, 4096) + 1);
  orb.points.push_back(z0 + std::conj(z0));
  std::optional<std::pair<cplx, cplx>> prev;
  int stable = 0;
  for (std::size_t n = 1; n <= opt.n_max; ++n) {
    const auto cur = step();
    if (!cur) {
      orb.status = OrbitStatus::EscapedAtPole;
      return orb;
    }
    const auto [a, b] = *cur;
    orb.points.push_back(a + std::conj(b));
    if (!(std::abs(a) <= opt.escape_radius && std::abs(b) <= opt.escape_radius)) {
      orb.status = OrbitStatus::Escaped;
      return orb;
    }
    if (prev && std::abs(a - prev->first) + std::abs(b - prev->second) < opt.tol) {
      if (++stable >= opt.stable_steps) {
        orb.status = OrbitStatus::Converged;
        orb.limit = HarmonicConstant{ExtComplex(a), ExtComplex(b)};
        if (opt.stop_when_converged) return orb;
      }
    } else {
      stable = 0;
      orb.status = OrbitStatus::MaxIter;
      orb.limit.reset();
    }
    prev = *cur;
  }
  return orb;
}

}  // namespace detail

/// Direct iterates h^n(z0) + conj(g^n(z0)), with h and g iterated separately.
///
/// Convergence is declared when |Δh^n| + |Δg^n| < tol for `stable_steps`
/// consecutive steps, so the limit is a harmonic constant mu + conj(omega)
/// with both parts settled.
inline Orbit orbit_direct(const HarmonicMap& f, cplx z0, const OrbitOptions& opt = {}) {
  ExtComplex hz(z0), gz(z0);
  return detail::run_orbit(Law::Direct, z0, opt, [&]() -> std::optional<std::pair<cplx, cplx>> {
    hz = eval(f.h, hz);
    gz = eval(f.g, gz);
    if (hz.is_infinite() || gz.is_infinite()) return std::nullopt;
    return std::pair{hz.value(), gz.value()};
  });
}

/// Crossed iterates f^{k,crossed}(z0) = h(g^{k-1}(z0)) + conj(g(h^{k-1}(z0))),
/// computed from the direct tails. A tail that grows past 1e150 is replaced by
/// the point at infinity, where Moebius parts stay well defined.
inline Orbit orbit_crossed(const HarmonicMap& f, cplx z0, const OrbitOptions& opt = {}) {
  ExtComplex hz(z0), gz(z0);
  auto clamp = [](ExtComplex e) {
    return (e.is_finite() && std::abs(e.value()) > 1e150) ? ExtComplex::infinity() : e;
  };
  return detail::run_orbit(Law::Crossed, z0, opt, [&]() -> std::optional<std::pair<cplx, cplx>> {
    const ExtComplex a = eval(f.h, gz);
    const ExtComplex b = eval(f.g, hz);
    if (a.is_infinite() || b.is_infinite()) return std::nullopt;
    hz = clamp(eval(f.h, hz));
    gz = clamp(eval(f.g, gz));
    return std::pair{a.value(), b.value()};
  });
}

// ---------------------------------------------------------------------------
// h-fixed points
// ---------------------------------------------------------------------------

enum class FixedPointClass { Superattracting, Attracting, Indifferent, Repelling };

constexpr std::string_view to_string(FixedPointClass c) noexcept {
  switch (c) {
    case FixedPointClass::Superattracting: return "superattracting";
    case FixedPointClass::Attracting: return "attracting";
    case FixedPointClass::Indifferent: return "indifferent";
    case FixedPointClass::Repelling: return "repelling";
  }
  return "unknown";
}

inline FixedPointClass classify_multiplier(cplx m) noexcept {
  const double r = std::abs(m);
  if (r < 1e-12) return FixedPointClass::Superattracting;
  if (r < 1.0 - 1e-9) return FixedPointClass::Attracting;
  if (r > 1.0 + 1e-9) return FixedPointClass::Repelling;
  return FixedPointClass::Indifferent;
}

/// Overall class of a pair of multipliers: the weaker side wins.
inline FixedPointClass combine_classes(FixedPointClass a, FixedPointClass b) noexcept {
  auto rank = [](FixedPointClass c) {
    switch (c) {
      case FixedPointClass::Repelling: return 3;
      case FixedPointClass::Indifferent: return 2;
      case FixedPointClass::Attracting: return 1;
      case FixedPointClass::Superattracting: return 0;
    }
    return 3;
  };
  if (rank(a) >= 2 || rank(b) >= 2) return rank(a) >= rank(b) ? a : b;
  if (a == FixedPointClass::Superattracting || b == FixedPointClass::Superattracting)
    return FixedPointClass::Superattracting;
  return FixedPointClass::Attracting;
}

struct FixedPointRecord {
  cplx mu{};
  cplx omega{};
  cplx lambda{};  // h'(mu)
  cplx theta{};   // g'(omega)
  FixedPointClass lambda_class = FixedPointClass::Indifferent;
  FixedPointClass theta_class = FixedPointClass::Indifferent;
  FixedPointClass kind = FixedPointClass::Indifferent;
};

/// |mu + conj(omega) - h(mu) - conj(g(omega))|; infinite at a pole.
inline double check_hfixed(const HarmonicMap& f, cplx mu, cplx omega) {
  const ExtComplex hm = eval(f.h, mu), go = eval(f.g, omega);
  if (hm.is_infinite() || go.is_infinite()) return std::numeric_limits<double>::infinity();
  return std::abs(mu + std::conj(omega) - hm.value() - std::conj(go.value()));
}

/// Finite fixed points of one part. Series parts use the Aberth solver on
/// p(z) - z, followed by Newton polishing and merging of clustered
/// approximations of a multiple root.
inline std::vector<cplx> part_fixed_points(const AnalyticFn& p, const AberthOptions& opt = {}) {
  if (const auto* m = std::get_if<MoebiusTransform>(&p)) {
    std::vector<cplx> out;
    for (const auto& e : mobius_fixed_points(*m))
      if (e.is_finite()) out.push_back(e.value());
    return out;
  }
  const auto& s = std::get<TaylorSeries>(p);
  std::vector<cplx> c(s.coeffs().begin(), s.coeffs().end());
  if (c.size() < 2) c.resize(2);
  c[1] -= 1.0;
  while (c.size() > 1 && c.back() == cplx{}) c.pop_back();
  if (c.size() == 1 && c[0] == cplx{}) throw Error(ErrorKind::IdentityTransform, "every point is fixed by z");
  std::vector<cplx> roots = polynomial_roots(c, opt);
  const std::span<const cplx> cs(c);
  for (auto& r : roots) {
    for (int it = 0; it < 3; ++it) {
      const auto hr = detail::horner(cs, r);
      if (hr.dp == cplx{}) break;
      const cplx nr = r - hr.p / hr.dp;
      if (!is_finite(nr) || std::abs(detail::horner(cs, nr).p) > std::abs(hr.p)) break;
      r = nr;
    }
  }
  std::vector<cplx> merged;
  std::vector<int> weight;
  for (cplx r : roots) {
    bool placed = false;
    for (std::size_t k = 0; k < merged.size(); ++k) {
      if (std::abs(r - merged[k]) <= 1e-6 * (1.0 + std::abs(r))) {
        merged[k] = (merged[k] * static_cast<double>(weight[k]) + r) / static_cast<double>(weight[k] + 1);
        ++weight[k];
        placed = true;
        break;
      }
    }
    if (!placed) {
      merged.push_back(r);
      weight.push_back(1);
    }
  }
  return merged;
}

/// Induced h-fixed points: {mu : h(mu) = mu} x {omega : g(omega) = omega}.
inline std::vector<FixedPointRecord> induced_fixed_points(const HarmonicMap& f, const AberthOptions& opt = {}) {
  const auto mus = part_fixed_points(f.h, opt);
  const auto omegas = part_fixed_points(f.g, opt);
  std::vector<FixedPointRecord> out;
  out.reserve(mus.size() * omegas.size());
  for (cplx mu : mus) {
    const cplx lambda = derivative_at(f.h, mu);
    for (cplx omega : omegas) {
      FixedPointRecord r;
      r.mu = mu;
      r.omega = omega;
      r.lambda = lambda;
      r.theta = derivative_at(f.g, omega);
      r.lambda_class = classify_multiplier(r.lambda);
      r.theta_class = classify_multiplier(r.theta);
      r.kind = combine_classes(r.lambda_class, r.theta_class);
      out.push_back(r);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Moebius harmonic taxonomy
// ---------------------------------------------------------------------------

/// Long-run behaviour of the iterates of one Moebius transform.
struct MoebiusPartDynamics {
  enum class Kind { Identity, Parabolic, Loxodromic, Elliptic };
  Kind kind = Kind::Identity;
  std::vector<ExtComplex> fixed;  // empty for the identity
  ExtComplex attractor;           // parabolic or loxodromic
  ExtComplex repeller;            // loxodromic only
  cplx multiplier{};              // at the attractor (parabolic: 1)

  /// Limit of T^n(z); nullopt when there is none (elliptic rotation).
  std::optional<ExtComplex> limit(const ExtComplex& z) const {
    switch (kind) {
      case Kind::Identity: return z;
      case Kind::Parabolic: return attractor;
      case Kind::Loxodromic: return ext_close(z, repeller, 1e-12) ? repeller : attractor;
      case Kind::Elliptic:
        for (const auto& p : fixed)
          if (ext_close(z, p, 1e-12)) return p;
        return std::nullopt;
    }
    return std::nullopt;
  }
};

inline MoebiusPartDynamics analyze_moebius(const MoebiusTransform& m) {
  MoebiusPartDynamics d;
  if (m.is_identity()) return d;
  d.fixed = mobius_fixed_points(m);
  if (d.fixed.size() == 1) {
    d.kind = MoebiusPartDynamics::Kind::Parabolic;
    d.attractor = d.fixed[0];
    d.multiplier = 1.0;
    return d;
  }
  const cplx k0 = mobius_multiplier(m, d.fixed[0]);
  const double r = std::abs(k0);
  if (std::abs(r - 1.0) <= 1e-9) {
    d.kind = MoebiusPartDynamics::Kind::Elliptic;
    d.multiplier = k0;
    return d;
  }
  d.kind = MoebiusPartDynamics::Kind::Loxodromic;
  const bool first = r < 1.0;
  d.attractor = first ? d.fixed[0] : d.fixed[1];
  d.repeller = first ? d.fixed[1] : d.fixed[0];
  d.multiplier = first ? k0 : mobius_multiplier(m, d.fixed[1]);
  return d;
}

struct MoebiusPrediction {
  enum class Outcome { Converges, Diverges, NoLimit };
  Outcome outcome = Outcome::NoLimit;
  std::optional<HarmonicConstant> limit;  // set when Converges
};

constexpr std::string_view to_string(MoebiusPrediction::Outcome o) noexcept {
  switch (o) {
    case MoebiusPrediction::Outcome::Converges: return "converges";
    case MoebiusPrediction::Outcome::Diverges: return "diverges";
    case MoebiusPrediction::Outcome::NoLimit: return "no-limit";
  }
  return "unknown";
}

/// Classification of R = T_A + conj(T_B) by the fixed-point sets of its parts.
///
/// case_label is one of "unit", "translation", "single-mu-inf",
/// "single-inf-omega", "single-mu-omega", "general". The single-fixed-point
/// cases list both limits the theory allows in `candidates`; `predict`
/// resolves them per z from the dynamics of each part.
struct MoebiusTaxonomy {
  MoebiusPartDynamics a;
  MoebiusPartDynamics b;
  std::string case_label;
  std::vector<std::string> candidates;
  /// Infinity is fixed by neither part and both have an attracting finite point.
  bool global_convergence_criterion = false;

  MoebiusPrediction predict(cplx z) const {
    MoebiusPrediction p;
    const auto la = a.limit(ExtComplex(z));
    const auto lb = b.limit(ExtComplex(z));
    if (!la || !lb) return p;
    if (la->is_infinite() || lb->is_infinite()) {
      p.outcome = MoebiusPrediction::Outcome::Diverges;
      return p;
    }
    p.outcome = MoebiusPrediction::Outcome::Converges;
    p.limit = HarmonicConstant{*la, *lb};
    return p;
  }
};

inline MoebiusTaxonomy classify_mobius_harmonic(const HarmonicMap& r) {
  if (!r.both_moebius()) throw Error(ErrorKind::RepresentationMismatch, "Moebius classification needs Moebius parts");
  using K = MoebiusPartDynamics::Kind;
  MoebiusTaxonomy t;
  t.a = analyze_moebius(std::get<MoebiusTransform>(r.h));
  t.b = analyze_moebius(std::get<MoebiusTransform>(r.g));
  auto parabolic_at = [](const MoebiusPartDynamics& d, bool at_infinity) {
    return d.kind == K::Parabolic && d.attractor.is_infinite() == at_infinity;
  };
  auto translation_like = [&](const MoebiusPartDynamics& d) { return d.kind == K::Identity || parabolic_at(d, true); };

  if (t.a.kind == K::Identity && t.b.kind == K::Identity) {
    t.case_label = "unit";
    t.candidates = {"z+conj(z)"};
  } else if (translation_like(t.a) && translation_like(t.b)) {
    t.case_label = "translation";
    t.candidates = {"infinity"};
  } else if (parabolic_at(t.a, false) && parabolic_at(t.b, true)) {
    t.case_label = "single-mu-inf";
    t.candidates = {"mu+conj(z)", "infinity"};
  } else if (parabolic_at(t.a, true) && parabolic_at(t.b, false)) {
    t.case_label = "single-inf-omega";
    t.candidates = {"z+conj(omega)", "infinity"};
  } else if (parabolic_at(t.a, false) && parabolic_at(t.b, false)) {
    t.case_label = "single-mu-omega";
    t.candidates = {"mu+conj(omega)"};
  } else {
    t.case_label = "general";
    t.candidates = {"mu+conj(omega)", "infinity"};
  }
  auto finite_attractor = [](const MoebiusPartDynamics& d) {
    return (d.kind == K::Loxodromic || d.kind == K::Parabolic) && d.attractor.is_finite();
  };
  auto fixes_infinity = [](const MoebiusPartDynamics& d) {
    return d.kind == K::Identity ||
           std::any_of(d.fixed.begin(), d.fixed.end(), [](const ExtComplex& e) { return e.is_infinite(); });
  };
  t.global_convergence_criterion =
      !fixes_infinity(t.a) && !fixes_infinity(t.b) && finite_attractor(t.a) && finite_attractor(t.b);
  return t;
}

// ---------------------------------------------------------------------------
// Basin rendering
// ---------------------------------------------------------------------------

struct BasinOptions {
  OrbitOptions orbit{};
  /// A converged orbit is assigned to the nearest fixed point within this distance.
  double match_tol = 1e-6;
  /// 0 = hardware concurrency.
  unsigned threads = 0;
};

struct BasinGrid {
  static constexpr int kEscaped = -1;
  static constexpr int kUnresolved = -2;

  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<int> index;  // row-major, row 0 at the top (largest imaginary part)
  std::vector<FixedPointRecord> fixed_points;

  int at(std::size_t x, std::size_t y) const { return index.at(y * width + x); }
};

/// Pixel centre of column x / row y.
inline cplx basin_pixel(std::size_t x, std::size_t y, std::size_t w, std::size_t h, std::pair<double, double> re,
                        std::pair<double, double> im) {
  const double dx = (re.second - re.first) / static_cast<double>(w);
  const double dy = (im.second - im.first) / static_cast<double>(h);
  return {re.first + (static_cast<double>(x) + 0.5) * dx, im.second - (static_cast<double>(y) + 0.5) * dy};
}

/// For each pixel centre, iterate directly and record the index of the induced
/// fixed point the orbit settles on, kEscaped for escape or pole, kUnresolved
/// otherwise. Rows are split across threads; every pixel is independent so
/// the grid does not depend on the thread count.
inline BasinGrid basin_render(const HarmonicMap& f, std::size_t width, std::size_t height,
                              std::pair<double, double> re_range, std::pair<double, double> im_range,
                              const BasinOptions& opt = {}) {
  BasinGrid grid;
  grid.width = width;
  grid.height = height;
  grid.index.assign(width * height, BasinGrid::kUnresolved);
  if (width == 0 || height == 0) return grid;
  try {
    grid.fixed_points = induced_fixed_points(f);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::IdentityTransform) throw;
  }

  auto pixel = [&](std::size_t x, std::size_t y) {
    const Orbit orb = orbit_direct(f, basin_pixel(x, y, width, height, re_range, im_range), opt.orbit);
    if (orb.status == OrbitStatus::Escaped || orb.status == OrbitStatus::EscapedAtPole) return BasinGrid::kEscaped;
    if (orb.status != OrbitStatus::Converged) return BasinGrid::kUnresolved;
    const cplx mu = orb.limit->mu.value(), om = orb.limit->omega.value();
    int best = BasinGrid::kUnresolved;
    double best_d = opt.match_tol;
    for (std::size_t k = 0; k < grid.fixed_points.size(); ++k) {
      const double d = std::abs(mu - grid.fixed_points[k].mu) + std::abs(om - grid.fixed_points[k].omega);
      if (d <= best_d) {
        best_d = d;
        best = static_cast<int>(k);
      }
    }
    return best;
  };

  unsigned threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, height));
  auto work = [&](unsigned t) {
    for (std::size_t y = t; y < height; y += threads)
      for (std::size_t x = 0; x < width; ++x) grid.index[y * width + x] = pixel(x, y);
  };
  if (threads <= 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
  }
  return grid;
}

}  // namespace harmonic
