#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <random>

#include "harmonic/roots.hpp"

using namespace harmonic;

namespace {

// Coefficients (low to high) of prod (z - r_k).
std::vector<cplx> from_roots(const std::vector<cplx>& roots) {
  std::vector<cplx> c{1.0};
  for (cplx r : roots) {
    std::vector<cplx> n(c.size() + 1);
    for (std::size_t k = 0; k < c.size(); ++k) {
      n[k + 1] += c[k];
      n[k] -= r * c[k];
    }
    c = std::move(n);
  }
  return c;
}

// Greedy matching distance between two root multisets.
double match_distance(std::vector<cplx> a, std::vector<cplx> b) {
  double worst = 0.0;
  for (cplx x : a) {
    auto it = std::min_element(b.begin(), b.end(), [x](cplx p, cplx q) { return std::abs(p - x) < std::abs(q - x); });
    worst = std::max(worst, std::abs(*it - x));
    b.erase(it);
  }
  return worst;
}

}  // namespace

TEST(PolynomialRoots, LowDegrees) {
  EXPECT_TRUE(polynomial_roots(std::vector<cplx>{3.0}).empty());
  const auto r1 = polynomial_roots(std::vector<cplx>{-2.0, 4.0});
  ASSERT_EQ(r1.size(), 1u);
  EXPECT_EQ(r1[0], cplx(0.5));
  // trailing zero coefficients are dropped
  EXPECT_EQ(polynomial_roots(std::vector<cplx>{-2.0, 4.0, 0.0, 0.0}).size(), 1u);
}

TEST(PolynomialRoots, KnownRoots) {
  const std::vector<cplx> roots = {1.0, -1.0, cplx(0, 2), cplx(0.3, -0.7)};
  EXPECT_LT(match_distance(polynomial_roots(from_roots(roots)), roots), 1e-12);
}

TEST(PolynomialRoots, UnitRoots) {
  std::vector<cplx> c(9);
  c[0] = -1.0;
  c[8] = 1.0;
  const auto roots = polynomial_roots(c);
  ASSERT_EQ(roots.size(), 8u);
  for (cplx r : roots) EXPECT_NEAR(std::abs(std::pow(r, 8) - 1.0), 0.0, 1e-13);
}

TEST(PolynomialRoots, RandomAgainstCompanionEigenvalues) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> n;
  for (int t = 0; t < 50; ++t) {
    const int deg = 2 + t % 8;
    std::vector<cplx> c(deg + 1);
    for (auto& v : c) v = cplx(n(rng), n(rng));
    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(deg, deg);
    for (int k = 0; k < deg; ++k) comp(k, deg - 1) = -c[k] / c[deg];
    for (int k = 1; k < deg; ++k) comp(k, k - 1) = 1.0;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp);
    std::vector<cplx> oracle(es.eigenvalues().data(), es.eigenvalues().data() + deg);
    EXPECT_LT(match_distance(polynomial_roots(c), oracle), 1e-8);
  }
}

TEST(PolynomialRoots, DoubleRootIsFound) {
  const auto roots = polynomial_roots(from_roots({0.5, 0.5, -1.0}));
  ASSERT_EQ(roots.size(), 3u);
  int near_half = 0;
  for (cplx r : roots) near_half += std::abs(r - 0.5) < 1e-6;
  EXPECT_EQ(near_half, 2);
}

TEST(PolynomialRoots, FailureCarriesPartialEstimates) {
  AberthOptions opt;
  opt.max_iterations = 1;
  opt.max_restarts = 0;
  try {
    polynomial_roots(from_roots({0.1, 0.2, 0.3, 0.4, 0.5, 3.0}), opt);
    FAIL();
  } catch (const RootFindingError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RootFindingFailed);
    EXPECT_EQ(e.partial().size(), 6u);
  }
}
