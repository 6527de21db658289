#include <gtest/gtest.h>

#include <random>

#include "harmonic/linearization.hpp"

using namespace harmonic;

namespace {

TaylorSeries poly(std::initializer_list<cplx> c, std::size_t order) {
  TaylorSeries s(std::max(order, c.size() - 1));
  std::size_t k = 0;
  for (cplx v : c) s[k++] = v;
  return s;
}

cplx in_disk(std::mt19937_64& rng, double r) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    const cplx z(u(rng), u(rng));
    if (std::abs(z) < 1.0) return r * z;
  }
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST(KoenigsSeries, LinearMapIsItsOwnLinearization) {
  const TaylorSeries phi = koenigs_series(poly({0, 0.4}, 12), 12);
  EXPECT_EQ(phi, TaylorSeries::identity(12));
}

TEST(KoenigsSeries, FirstRecursionStep) {
  const TaylorSeries h = poly({0, 0.5, 0.5}, 20);
  const TaylorSeries phi = koenigs_series(h, 20);
  EXPECT_EQ(phi[1], cplx(1.0));
  EXPECT_EQ(phi[2], cplx(2.0));
  EXPECT_LT(koenigs_residual(phi, h, 0.5), 1e-12);
}

TEST(KoenigsSeries, RandomCubicResidual) {
  std::mt19937_64 rng(51);
  for (int t = 0; t < 30; ++t) {
    const TaylorSeries h = poly({0, std::polar(0.4, 0.3 * t), in_disk(rng, 0.3), in_disk(rng, 0.3)}, 20);
    const TaylorSeries phi = koenigs_series(h, 20);
    EXPECT_LT(koenigs_residual(phi, h, h[1]), 1e-9);
  }
}

TEST(KoenigsSeries, LimitOracle) {
  // phi(z) = lim lambda^-n h^n(z)
  const TaylorSeries h = poly({0, 0.5, 0.3, -0.1}, 60);
  const TaylorSeries phi = koenigs_series(h, 60);
  for (cplx z : {cplx(0.05), cplx(0.1, 0.1), cplx(-0.15, 0.05)}) {
    cplx w = z, scale = 1.0;
    for (int n = 0; n < 45; ++n) {
      w = h(w);
      scale *= 2.0;
    }
    EXPECT_NEAR(std::abs(phi(z) - w * scale), 0.0, 1e-10);
  }
}

TEST(KoenigsSeries, StableAcrossTruncation) {
  const TaylorSeries h = poly({0, cplx(0.3, 0.4), 0.2, cplx(0, 0.1)}, 30);
  const TaylorSeries p10 = koenigs_series(h, 10), p30 = koenigs_series(h, 30);
  EXPECT_LT(max_coeff_diff(p10, p30.truncated(10)), 1e-13);
}

TEST(KoenigsSeries, Errors) {
  EXPECT_EQ(kind_of([] { koenigs_series(poly({0.1, 0.5}, 4), 4); }), ErrorKind::NotFixedAtZero);
  EXPECT_EQ(kind_of([] { koenigs_series(poly({0, 0.0, 1.0}, 4), 4); }), ErrorKind::MultiplierOutOfRange);
  EXPECT_EQ(kind_of([] { koenigs_series(poly({0, 1.0}, 4), 4); }), ErrorKind::MultiplierOutOfRange);
  EXPECT_EQ(kind_of([] { koenigs_series(poly({0, cplx(0, 1.5)}, 4), 4); }), ErrorKind::MultiplierOutOfRange);
}

TEST(HarmonicKoenigs, LinearHarmonicMap) {
  const HarmonicMap f{poly({0, 0.6}, 10), poly({0, cplx(0.2, 0.3)}, 10)};
  const LinearizationResult r = harmonic_koenigs(f, 10);
  EXPECT_EQ(std::get<TaylorSeries>(r.phi.h), TaylorSeries::identity(10));
  EXPECT_EQ(std::get<TaylorSeries>(r.phi.g), TaylorSeries::identity(10));
  EXPECT_EQ(r.residual, 0.0);
  EXPECT_EQ(r.kind, LinearizationKind::Koenigs);
  EXPECT_FALSE(r.p.has_value());
}

TEST(HarmonicKoenigs, ResidualAndPointwiseConjugacy) {
  const HarmonicMap f{poly({0, 0.5, 0.5}, 60), poly({0, 1.0 / 3.0, 0, 0.2}, 60)};
  const LinearizationResult r20 = harmonic_koenigs(f, 20);
  EXPECT_LT(r20.residual, 1e-9);
  const LinearizationResult r = harmonic_koenigs(f, 60);
  std::vector<cplx> samples;
  for (int k = 0; k < 24; ++k) samples.push_back(std::polar(0.2, 0.26 * k));
  const auto chk = verify_conjugacy(r.phi, f, linearization_model(r, 60), Law::Direct, samples);
  EXPECT_LT(chk.residual, 1e-9);
  EXPECT_TRUE(chk.witness_univalent);
}

TEST(HarmonicKoenigs, ErrorsNameThePart) {
  const HarmonicMap f{poly({0, 0.5}, 6), poly({0, 0.0, 1.0}, 6)};
  try {
    harmonic_koenigs(f, 6);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MultiplierOutOfRange);
    EXPECT_NE(std::string(e.what()).find("co-analytic"), std::string::npos);
  }
}

TEST(HarmonicKoenigs, MoebiusPartsExpandAtZero) {
  const HarmonicMap f{MoebiusTransform(0.5, 0.0, 0.25, 1.0), MoebiusTransform(0.25, 0.0, 0.0, 1.0)};
  EXPECT_LT(harmonic_koenigs(f, 24).residual, 1e-12);
  const HarmonicMap pole{MoebiusTransform(0.0, 1.0, 1.0, 0.0), MoebiusTransform(0.25, 0.0, 0.0, 1.0)};
  EXPECT_EQ(kind_of([&] { harmonic_koenigs(pole, 8); }), ErrorKind::RepresentationMismatch);
}

TEST(BoettcherSeries, Examples) {
  for (unsigned p = 2; p <= 4; ++p) {
    const TaylorSeries h = TaylorSeries::monomial(p, 16);
    EXPECT_EQ(boettcher_series(h, 16), TaylorSeries::identity(16));
  }
  const TaylorSeries phi = boettcher_series(poly({0, 0, 2.0}, 16), 16);
  EXPECT_EQ(phi, TaylorSeries::monomial(1, 16, 2.0));
}

TEST(BoettcherSeries, ResidualAndRootOracle) {
  const TaylorSeries h = poly({0, 0, 1.0, 0.3}, 16);
  const TaylorSeries phi = boettcher_series(h, 16);
  EXPECT_LT(boettcher_residual(phi, h, 2), 1e-9);
  // phi(z) = lim h^n(z)^(1/2^n) for small positive z
  const TaylorSeries big = boettcher_series(h.truncated(16), 16);
  for (double z : {0.02, 0.05}) {
    double w = z, root = 1.0;
    for (int n = 0; n < 6; ++n) {
      w = h(w).real();
      root *= 0.5;
    }
    EXPECT_NEAR(big(z).real(), std::pow(w, root), 1e-12);
  }
}

TEST(BoettcherSeries, RootChoice) {
  const TaylorSeries h = poly({0, 0, 0, 4.0}, 10);
  const TaylorSeries a = boettcher_series(h, 10, 0), b = boettcher_series(h, 10, 1);
  EXPECT_NEAR(std::abs(a[1] - 2.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(b[1] + 2.0), 0.0, 1e-15);
  EXPECT_LT(boettcher_residual(b, h, 3), 1e-12);
}

TEST(BoettcherSeries, Errors) {
  EXPECT_EQ(kind_of([] { boettcher_series(poly({0, 0.5, 1.0}, 4), 4); }), ErrorKind::NotSuperattracting);
  EXPECT_EQ(kind_of([] { boettcher_series(TaylorSeries(4), 4); }), ErrorKind::NotSuperattracting);
  EXPECT_EQ(kind_of([] { boettcher_series(poly({0.2, 0, 1.0}, 4), 4); }), ErrorKind::NotFixedAtZero);
}

TEST(HarmonicBoettcher, Examples) {
  const HarmonicMap f{poly({0, 0, 1.0}, 16), poly({0, 0.3}, 16)};
  const LinearizationResult r = harmonic_boettcher(f, 16);
  EXPECT_EQ(std::get<TaylorSeries>(r.phi.h), TaylorSeries::identity(16));
  EXPECT_EQ(std::get<TaylorSeries>(r.phi.g), TaylorSeries::identity(16));
  EXPECT_EQ(r.residual, 0.0);
  EXPECT_EQ(r.p, 2u);

  const HarmonicMap f2{poly({0, 0, 2.0}, 16), poly({0, 0.5, 0.25}, 16)};
  const LinearizationResult r2 = harmonic_boettcher(f2, 16);
  EXPECT_LT(r2.residual, 1e-9);
  EXPECT_EQ(r2.kind, LinearizationKind::BoettcherAnalyticSide);
}

TEST(HarmonicBoettcher, PointwiseConjugacyToModel) {
  const HarmonicMap f{poly({0, 0, 1.0, 0.3}, 48), poly({0, 0.5, 0.25}, 48)};
  const LinearizationResult r = harmonic_boettcher(f, 48);
  std::vector<cplx> samples;
  for (int k = 0; k < 16; ++k) samples.push_back(std::polar(0.15, 0.4 * k));
  EXPECT_LT(verify_conjugacy(r.phi, f, linearization_model(r, 48), Law::Direct, samples).residual, 1e-9);
}

TEST(HarmonicLinearize, DispatchesPerPart) {
  EXPECT_EQ(harmonic_linearize({poly({0, 0.5}, 8), poly({0, 0.2}, 8)}, 8).kind, LinearizationKind::Koenigs);
  EXPECT_EQ(harmonic_linearize({poly({0, 0, 1.0}, 8), poly({0, 0.2}, 8)}, 8).kind,
            LinearizationKind::BoettcherAnalyticSide);
  const LinearizationResult c = harmonic_linearize({poly({0, 0.5}, 8), poly({0, 0, 0, 2.0}, 8)}, 8);
  EXPECT_EQ(c.kind, LinearizationKind::BoettcherCoanalyticSide);
  EXPECT_EQ(c.p_g, 3u);
  EXPECT_LT(c.residual, 1e-12);
  const LinearizationResult b = harmonic_linearize({poly({0, 0, 1.0, 0.2}, 12), poly({0, 0, 1.0}, 12)}, 12);
  EXPECT_EQ(b.kind, LinearizationKind::BoettcherBoth);
  EXPECT_LT(b.residual, 1e-12);
  const HarmonicMap model = linearization_model(b, 12);
  EXPECT_EQ(std::get<TaylorSeries>(model.h), TaylorSeries::monomial(2, 12));
}

TEST(KoenigsSeries, PointwiseOnCircle) {
  const TaylorSeries h = poly({0, 0.4, 0.3, -0.2}, 60);
  const TaylorSeries phi = koenigs_series(h, 60);
  for (int k = 0; k < 32; ++k) {
    const cplx z = std::polar(0.2, 2.0 * std::numbers::pi * k / 32);
    EXPECT_LT(std::abs(phi(h(z)) - 0.4 * phi(z)), 1e-8);
  }
}

TEST(BoettcherSeries, PointwiseOnCircle) {
  const TaylorSeries h = poly({0, 0, 1.0, 0.3}, 60);
  const TaylorSeries phi = boettcher_series(h, 60);
  for (int k = 0; k < 32; ++k) {
    const cplx z = std::polar(0.2, 2.0 * std::numbers::pi * k / 32);
    EXPECT_LT(std::abs(phi(h(z)) - phi(z) * phi(z)), 1e-8);
  }
}

TEST(HarmonicKoenigs, FullEquationResidualIsMaxOfParts) {
  const HarmonicMap f{poly({0, 0.5, 0.5}, 20), poly({0, cplx(0.1, 0.3), 0, 0.2}, 20)};
  const LinearizationResult r = harmonic_koenigs(f, 20);
  const HarmonicMap lhs = compose_direct(r.phi, f);
  const HarmonicMap rhs = compose_direct(linearization_model(r, 20), r.phi);
  const double full = std::max(max_coeff_diff(std::get<TaylorSeries>(lhs.h), std::get<TaylorSeries>(rhs.h)),
                               max_coeff_diff(std::get<TaylorSeries>(lhs.g), std::get<TaylorSeries>(rhs.g)));
  EXPECT_NEAR(full, r.residual, 1e-15);
}

TEST(KoenigsSeries, DenominatorsStayAwayFromZero) {
  for (cplx lambda : {cplx(0.5), cplx(0.4), cplx(0.3, 0.4), cplx(0, 0.9), cplx(-0.05)}) {
    cplx ln = lambda;
    for (int n = 2; n <= 200; ++n) {
      ln *= lambda;
      EXPECT_GE(std::abs(lambda - ln), std::abs(lambda) - std::norm(lambda) - 1e-15);
    }
  }
}
