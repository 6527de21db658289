#include <gtest/gtest.h>

#include <random>

#include "harmonic/hardy.hpp"

using namespace harmonic;

namespace {

constexpr std::size_t N = 16;

cplx gauss(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return {n(rng), n(rng)};
}

HardyVector random_vector(std::mt19937_64& rng, std::size_t order = N) {
  HardyVector v(order);
  for (Eigen::Index k = 0; k <= static_cast<Eigen::Index>(order); ++k) {
    v.a()[k] = gauss(rng);
    v.b()[k] = gauss(rng);
  }
  return v;
}

BlockOperator random_operator(std::mt19937_64& rng, std::size_t order = N) {
  const auto n = static_cast<Eigen::Index>(order + 1);
  BlockOperator L{CMatrix(n, n), CMatrix(n, n)};
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      L.A(i, j) = gauss(rng);
      L.B(i, j) = gauss(rng);
    }
  return L;
}

TaylorSeries poly(std::initializer_list<cplx> c, std::size_t order = N) {
  TaylorSeries s(order);
  std::size_t k = 0;
  for (cplx v : c) s[k++] = v;
  return s;
}

double dist(const HardyVector& u, const HardyVector& v) { return hh_norm(u - v); }

double sv_max(const CMatrix& M) { return Eigen::JacobiSVD<CMatrix>(M).singularValues()(0); }

}  // namespace

TEST(HardyVector, OrthonormalBasis) {
  for (std::size_t n = 0; n <= N; ++n)
    for (std::size_t m = 0; m <= N; ++m) {
      const cplx kd = n == m ? 1.0 : 0.0;
      EXPECT_EQ(hh_inner(HardyVector::e(n, N), HardyVector::e(m, N)), kd);
      EXPECT_EQ(hh_inner(HardyVector::f(n, N), HardyVector::f(m, N)), kd);
      EXPECT_EQ(hh_inner(HardyVector::e(n, N), HardyVector::f(m, N)), cplx{});
    }
}

TEST(HardyVector, NormOfTwoBasisVectors) {
  const HardyVector u(poly({0, 1}), poly({0, 0, 1}), N);
  EXPECT_DOUBLE_EQ(hh_norm(u) * hh_norm(u), 2.0);
  EXPECT_EQ(hh_inner(u, u), cplx(2.0));
}

TEST(HardyVector, InnerProductAxioms) {
  std::mt19937_64 rng(61);
  for (int t = 0; t < 200; ++t) {
    const HardyVector u = random_vector(rng), v = random_vector(rng), w = random_vector(rng);
    const cplx alpha = gauss(rng);
    const double scale = hh_norm(u) * hh_norm(v) + 1.0;
    EXPECT_LT(std::abs(hh_inner(u, v) - std::conj(hh_inner(v, u))), 1e-12 * scale);
    EXPECT_LT(std::abs(hh_inner(alpha * u, v) - alpha * hh_inner(u, v)), 1e-12 * scale * std::abs(alpha));
    EXPECT_LT(std::abs(hh_inner(u + w, v) - hh_inner(u, v) - hh_inner(w, v)), 1e-12 * scale * 4);
    EXPECT_GT(hh_inner(u, u).real(), 0.0);
    EXPECT_EQ(hh_inner(u, u).imag(), 0.0);
  }
  EXPECT_EQ(hh_norm(HardyVector(N)), 0.0);
}

TEST(HardyVector, ScalarRulePreservesFunction) {
  std::mt19937_64 rng(62);
  const HardyVector u = random_vector(rng, 6);
  const cplx alpha(0.3, -1.2), z(0.2, 0.4);
  EXPECT_LT(std::abs((alpha * u)(z) - alpha * u(z)), 1e-12);
}

TEST(HardyVector, BasisReconstruction) {
  std::mt19937_64 rng(63);
  for (int t = 0; t < 20; ++t) {
    const HardyVector u = random_vector(rng);
    HardyVector r(N);
    for (std::size_t n = 0; n <= N; ++n) {
      r = r + hh_inner(u, HardyVector::e(n, N)) * HardyVector::e(n, N);
      // the coefficient (u, f_n) = conj(b_n) acts on f_n through the pair scalar rule
      r = r + hh_inner(u, HardyVector::f(n, N)) * HardyVector::f(n, N);
    }
    EXPECT_EQ(r.a(), u.a());
    EXPECT_EQ(r.b(), u.b());
  }
}

TEST(HardyVector, TruncationMismatch) {
  try {
    hh_inner(HardyVector(3), HardyVector(4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TruncationMismatch);
  }
  EXPECT_THROW(HardyVector(CVector::Zero(3), CVector::Zero(4)), Error);
}

TEST(HardyProduct, Examples) {
  const HardyVector u = HardyVector(poly({0, 1}), poly({0, 1}), N);
  const HardyVector sq = hh_product(u, u);
  EXPECT_EQ(sq.analytic(), poly({0, 0, 1}));
  EXPECT_EQ(sq.coanalytic(), poly({0, 0, 1}));
  const HardyVector p = hh_product(HardyVector(poly({1, 1}), poly({0, 1}), N), HardyVector(poly({1}), poly({1}), N));
  EXPECT_EQ(p.analytic(), poly({1, 1}));
  EXPECT_EQ(p.coanalytic(), poly({0, 1}));
}

TEST(KernelVector, ExamplesAndReproducingProperty) {
  const HardyVector k0 = kernel_vector(0.0, N);
  EXPECT_EQ(k0.a(), HardyVector::e(0, N).a());
  EXPECT_EQ(k0.b(), HardyVector::f(0, N).b());
  EXPECT_DOUBLE_EQ(hh_norm(k0), std::sqrt(2.0));

  std::mt19937_64 rng(64);
  for (int t = 0; t < 20; ++t) {
    const HardyVector u = random_vector(rng);
    const cplx lambda = std::polar(0.7 * (t + 1) / 20.0, 0.9 * t);
    EXPECT_LT(std::abs(hh_inner(u, kernel_vector(lambda, N)) - u(lambda)), 1e-12 * (1 + hh_norm(u)));
  }
  try {
    kernel_vector(1.0, N);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OutOfDisk);
  }
}

TEST(CompOpMatrix, Examples) {
  const cplx lambda(0.3, 0.4);
  const CMatrix D = comp_op_matrix(poly({0, lambda}), N);
  cplx p = 1.0;
  for (Eigen::Index n = 0; n <= static_cast<Eigen::Index>(N); ++n, p *= lambda) {
    EXPECT_LT(std::abs(D(n, n) - p), 1e-16);
    EXPECT_EQ((D.col(n).cwiseAbs().sum()), std::abs(D(n, n)));
  }
  EXPECT_EQ(comp_op_matrix(poly({0, 1}), N), CMatrix::Identity(N + 1, N + 1));
  // 0.5 z + 0.5: column n holds the binomial row scaled by 2^-n
  const CMatrix M = comp_op_matrix(poly({0.5, 0.5}), 4);
  EXPECT_DOUBLE_EQ(M(0, 2).real(), 0.25);
  EXPECT_DOUBLE_EQ(M(1, 2).real(), 0.5);
  EXPECT_DOUBLE_EQ(M(2, 2).real(), 0.25);
  EXPECT_DOUBLE_EQ(M(2, 4).real(), 6.0 / 16.0);
}

TEST(CompOpMatrix, RejectsSymbolLeavingDisk) {
  try {
    comp_op_matrix(poly({0.5, 0.7}), 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SymbolNotSelfMap);
  }
}

TEST(CompOpMatrix, ActsByComposition) {
  std::mt19937_64 rng(65);
  const TaylorSeries phi = poly({0.2, cplx(0.3, 0.1), 0.2});
  const HardyVector u(poly({gauss(rng), gauss(rng), gauss(rng)}), TaylorSeries(N), N);
  const HardyVector w = op_apply(simple_comp_op(phi, phi, N), u);
  EXPECT_LT(max_coeff_diff(w.analytic(), series_compose(u.analytic(), phi)), 1e-14);
}

TEST(GeneralCompOp, SpecialCases) {
  const TaylorSeries phi = poly({0.1, 0.5}), pi = poly({0, 0.25, 0.25});
  const BlockOperator s = general_comp_op(phi, pi, 1, 1, 0, 0, N);
  EXPECT_EQ(s.A, comp_op_matrix(phi, N));
  EXPECT_EQ(s.B, comp_op_matrix(pi, N));
  const BlockOperator c = general_comp_op(phi, pi, 0, 0, 1, 1, N);
  EXPECT_EQ(c.A, comp_op_matrix(pi, N));
  EXPECT_EQ(c.B, comp_op_matrix(phi, N));

  const HardyVector u(poly({0, 1}), poly({0, 1}), N);
  const HardyVector w = op_apply(simple_comp_op(poly({0, 0.5}), poly({0, 0.25}), N), u);
  EXPECT_EQ(w.analytic(), poly({0, 0.5}));
  EXPECT_EQ(w.coanalytic(), poly({0, 0.25}));
}

TEST(GeneralCompOp, PointwiseDefinition) {
  // (alpha u(phi) + beta conj(v(pi)) + gamma u(pi) + delta conj(v(phi))) for f = u + conj(v)
  std::mt19937_64 rng(66);
  const TaylorSeries phi = poly({0.1, 0.5, 0.2}), pi = poly({0, cplx(0.2, 0.3), 0.1});
  const cplx alpha(1, 0.5), beta(-0.3, 0.2), gamma(0.7, 0), delta(0, -1);
  const HardyVector u(poly({gauss(rng), gauss(rng)}), poly({gauss(rng), gauss(rng), gauss(rng)}), N);
  const HardyVector w = op_apply(general_comp_op(phi, pi, alpha, beta, gamma, delta, N), u);
  const TaylorSeries a = u.analytic(), b = u.coanalytic();
  const cplx z(0.2, -0.1);
  const cplx expect = alpha * a(phi(z)) + beta * std::conj(b(pi(z))) + gamma * a(pi(z)) + delta * std::conj(b(phi(z)));
  EXPECT_LT(std::abs(w(z) - expect), 1e-12);
}

TEST(BlockOperator, IdentityAndAlgebra) {
  std::mt19937_64 rng(67);
  const HardyVector u = random_vector(rng);
  const HardyVector iu = op_apply(BlockOperator::identity(N), u);
  EXPECT_EQ(iu.a(), u.a());
  EXPECT_EQ(iu.b(), u.b());

  const BlockOperator L1 = random_operator(rng), L2 = random_operator(rng);
  const cplx s(0.4, -0.9);
  EXPECT_LT(dist(op_apply(op_compose(L1, L2), u), op_apply(L1, op_apply(L2, u))), 1e-10);
  EXPECT_LT(dist(op_apply(op_add(L1, L2), u), op_apply(L1, u) + op_apply(L2, u)), 1e-10);
  EXPECT_LT(dist(op_apply(op_scale(s, L1), u), s * op_apply(L1, u)), 1e-10);
  // linear under the pair scalar rule
  EXPECT_LT(dist(op_apply(L1, s * u), s * op_apply(L1, u)), 1e-10);
  EXPECT_THROW(op_compose(L1, random_operator(rng, N + 1)), Error);
}

TEST(BlockOperator, DecompositionPreservesParts) {
  std::mt19937_64 rng(68);
  for (int t = 0; t < 20; ++t) {
    const BlockOperator L = random_operator(rng);
    HardyVector analytic = random_vector(rng), coanalytic = random_vector(rng);
    analytic.b().setZero();
    coanalytic.a().setZero();
    EXPECT_TRUE(op_apply(L, analytic).b().isZero(0.0));
    EXPECT_TRUE(op_apply(L, coanalytic).a().isZero(0.0));
  }
}

TEST(OpAdjoint, IdentityAndInvolution) {
  std::mt19937_64 rng(69);
  for (int t = 0; t < 50; ++t) {
    const BlockOperator L = random_operator(rng);
    const HardyVector u = random_vector(rng), v = random_vector(rng);
    const double scale = hh_norm(u) * hh_norm(v) * (L.A.norm() + L.B.norm());
    EXPECT_LT(std::abs(hh_inner(op_apply(L, u), v) - hh_inner(u, op_apply(op_adjoint(L), v))), 1e-12 * scale);
    const BlockOperator LL = op_adjoint(op_adjoint(L));
    EXPECT_EQ(LL.A, L.A);
    EXPECT_EQ(LL.B, L.B);
  }
  const cplx lambda(0.3, 0.2);
  const BlockOperator d = op_adjoint(simple_comp_op(poly({0, lambda}), poly({0, lambda}), 6));
  cplx p = 1.0;
  for (Eigen::Index n = 0; n <= 6; ++n, p *= std::conj(lambda)) EXPECT_LT(std::abs(d.A(n, n) - p), 1e-16);
}

TEST(OpNorm, Examples) {
  EXPECT_NEAR(op_norm(BlockOperator::identity(N)), 1.0, 1e-12);
  BlockOperator L = BlockOperator::identity(N);
  for (Eigen::Index n = 1; n <= static_cast<Eigen::Index>(N); ++n) L.A(n, n) = 0.5;
  L.B *= 2.0;
  EXPECT_NEAR(op_norm(L), 2.0, 1e-10);
  EXPECT_NEAR(op_norm(simple_comp_op(poly({0, 0.7}), poly({0, 0.2}), 32)), 1.0, 1e-10);
  const auto parts = op_norm_parts(L);
  EXPECT_NEAR(parts.norm_A, 1.0, 1e-10);
  EXPECT_NEAR(parts.norm_B, 2.0, 1e-10);
}

TEST(OpNorm, MatchesSingularValues) {
  std::mt19937_64 rng(70);
  for (int t = 0; t < 30; ++t) {
    const BlockOperator L = random_operator(rng, 12);
    const double expect = std::max(sv_max(L.A), sv_max(L.B));
    EXPECT_NEAR(op_norm(L), expect, 1e-8 * expect);
    // both parts are bounded by the whole
    EXPECT_LE(sv_max(L.A), op_norm(L) * (1 + 1e-8));
    EXPECT_LE(sv_max(L.B), op_norm(L) * (1 + 1e-8));
  }
}

TEST(OpNorm, SampledRatiosStayBelow) {
  std::mt19937_64 rng(71);
  const BlockOperator L = random_operator(rng, 10);
  const double nrm = op_norm(L);
  double best = 0.0;
  for (int t = 0; t < 2000; ++t) {
    const HardyVector u = random_vector(rng, 10);
    best = std::max(best, hh_norm(op_apply(L, u)) / hh_norm(u));
  }
  EXPECT_LE(best, nrm * (1 + 1e-12));
  EXPECT_GT(best, 0.5 * nrm);
}

TEST(OpNorm, ZeroOperatorAndStall) {
  const auto n = static_cast<Eigen::Index>(N + 1);
  EXPECT_EQ(op_norm({CMatrix::Zero(n, n), CMatrix::Zero(n, n)}), 0.0);
  std::mt19937_64 rng(72);
  const BlockOperator L = random_operator(rng);
  try {
    op_norm(L, {.tol = 1e-30, .max_iterations = 3});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::PowerIterationStalled);
  }
}

TEST(NormBoundSimple, Examples) {
  EXPECT_EQ(norm_bound_simple(poly({0, 0.5})), 1.0);
  EXPECT_NEAR(norm_bound_simple(poly({0.5, 0.5})), std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(norm_bound_simple(poly({cplx(0, -0.5), 0.5})), std::sqrt(3.0), 1e-15);
  EXPECT_THROW(norm_bound_simple(poly({1.0})), Error);
  // the truncated operator respects the bound
  EXPECT_LE(op_norm(simple_comp_op(poly({0.5, 0.3}), poly({0, 0.5}), 32)), std::sqrt(3.0));
}

TEST(AdjointKernelImage, Examples) {
  const TaylorSeries id = poly({0, 1});
  const auto exact = adjoint_kernel_image(id, id, cplx(0.3, 0.2), N);
  const HardyVector k = kernel_vector(cplx(0.3, 0.2), N);
  EXPECT_LT(dist(exact.actual, k), 1e-15);
  EXPECT_LT(dist(exact.predicted, k), 1e-15);

  const auto diag = adjoint_kernel_image(poly({0, 0.5}), poly({0, 0.25}), 0.4, N);
  cplx p = 1.0;
  for (Eigen::Index n = 0; n <= static_cast<Eigen::Index>(N); ++n, p *= 0.2) EXPECT_LT(std::abs(diag.predicted.a()[n] - p), 1e-16);
  EXPECT_LT(dist(diag.actual, diag.predicted), std::max(diag.tail_tolerance, 1e-15));

  const auto aff = adjoint_kernel_image(poly({0.3, 0.5}, 64), poly({0, 0.25}, 64), 0.2, 64);
  EXPECT_LT(dist(aff.actual, aff.predicted), 1e-8);
}

TEST(AdjointKernelImage, RandomAffineWithinTail) {
  std::mt19937_64 rng(73);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int t = 0; t < 20; ++t) {
    const cplx a(0.3 * u(rng), 0.3 * u(rng)), b(0.4 * u(rng), 0.4 * u(rng));
    const TaylorSeries phi = poly({a, b}, 64), pi = poly({0, 0.6 * u(rng)}, 64);
    const cplx lambda(0.5 * u(rng), 0.5 * u(rng));
    const auto img = adjoint_kernel_image(phi, pi, lambda, 64);
    EXPECT_LT(dist(img.actual, img.predicted), std::max(img.tail_tolerance, 1e-12));
  }
}

TEST(IsSimpleComposition, RecoversSymbols) {
  const TaylorSeries phi = poly({0.1, 0.5, 0.2}), pi = poly({0, 0.3, 0, 0.1});
  const auto s = is_simple_composition(simple_comp_op(phi, pi, N), 1e-12, N);
  ASSERT_TRUE(s.has_value());
  EXPECT_LT(max_coeff_diff(s->phi, phi), 1e-15);
  EXPECT_LT(max_coeff_diff(s->pi, pi), 1e-15);
}

TEST(IsSimpleComposition, RejectsRankOnePerturbation) {
  const TaylorSeries phi = poly({0.1, 0.5, 0.2}), pi = poly({0, 0.3});
  BlockOperator L = simple_comp_op(phi, pi, N);
  const auto n = static_cast<Eigen::Index>(N + 1);
  L.A += 1e-2 * CVector::Ones(n) * CVector::Ones(n).transpose() / static_cast<double>(n);
  EXPECT_FALSE(is_simple_composition(L, 1e-9, N).has_value());
  EXPECT_FALSE(is_simple_composition(op_scale(2.0, BlockOperator::identity(N)), 1e-9, N).has_value());
}

TEST(Multiplicativity, Examples) {
  const auto pairs = monomial_pairs(N);
  const BlockOperator C = simple_comp_op(poly({0.2, 0.5, 0.1}), poly({0, cplx(0.2, 0.4)}), N);
  EXPECT_LT(multiplicativity_residual(C, pairs), 1e-14);
  EXPECT_TRUE(multiplicativity_check(C, pairs, 1e-9));
  const BlockOperator two = op_scale(2.0, BlockOperator::identity(N));
  const std::vector<std::pair<HardyVector, HardyVector>> e1 = {{HardyVector::e(1, N), HardyVector::e(1, N)}};
  EXPECT_FALSE(multiplicativity_check(two, e1, 1e-9));
  EXPECT_DOUBLE_EQ(multiplicativity_residual(two, e1), 2.0);
}

TEST(KernelMapping, SimpleOperatorsMapKernelsToKernels) {
  std::vector<cplx> lambdas = {0.0};
  for (int k = 0; k < 8; ++k) lambdas.push_back(std::polar(0.1, 0.785 * k));
  const BlockOperator C = simple_comp_op(poly({0.2, 0.5, 0.1}), poly({0, cplx(0.2, 0.4)}), N);
  EXPECT_TRUE(kernel_mapping_check(C, lambdas, 1e-9));
  BlockOperator P = C;
  P.B(3, 1) += 1e-3;
  EXPECT_FALSE(kernel_mapping_check(P, lambdas, 1e-9));
}

TEST(Characterizations, AgreeOnCorpus) {
  std::mt19937_64 rng(74);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<cplx> lambdas = {0.0};
  for (int k = 0; k < 8; ++k) lambdas.push_back(std::polar(0.1, 0.785 * k));
  const auto pairs = monomial_pairs(N);
  for (int t = 0; t < 20; ++t) {
    const TaylorSeries phi = poly({0.3 * cplx(u(rng), u(rng)), 0.3 * cplx(u(rng), u(rng)), 0.2 * cplx(u(rng), u(rng))});
    const TaylorSeries pi = poly({0.3 * cplx(u(rng), u(rng)), 0.5 * cplx(u(rng), u(rng))});
    BlockOperator L = simple_comp_op(phi, pi, N);
    const bool perturb = t % 2;
    if (perturb) {
      std::normal_distribution<double> nd(0.0, 1e-3);
      for (Eigen::Index i = 0; i <= static_cast<Eigen::Index>(N); ++i)
        for (Eigen::Index j = 0; j <= static_cast<Eigen::Index>(N); ++j) L.A(i, j) += cplx(nd(rng), nd(rng));
    }
    const bool simple = is_simple_composition(L, 1e-9, N).has_value();
    const bool mult = multiplicativity_check(L, pairs, 1e-9);
    const bool kern = kernel_mapping_check(L, lambdas, 1e-9);
    EXPECT_EQ(simple, !perturb);
    EXPECT_EQ(mult, !perturb);
    EXPECT_EQ(kern, !perturb);
  }
}

TEST(Normality, Examples) {
  const BlockOperator rot = simple_comp_op(poly({0, 0.7}, 32), poly({0, cplx(0.2, 0.1)}, 32), 32);
  EXPECT_LT(commutator_norm(rot), 1e-12);
  EXPECT_TRUE(is_normal(rot, 1e-12));
  const auto n = static_cast<Eigen::Index>(N + 1);
  BlockOperator U{CMatrix::Zero(n, n), CMatrix::Zero(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    U.A(k, k) = std::polar(1.0, 0.3 * k);
    U.B(k, k) = std::polar(1.0, -0.7 * k);
  }
  EXPECT_TRUE(is_normal(U, 1e-14));
  EXPECT_GT(commutator_norm(simple_comp_op(poly({0.3, 0.5}, 32), poly({0, 0.5}, 32), 32)), 1e-2);
}

TEST(SpaceE, ClosureSpotChecks) {
  // sums, scalings, products and adjoints of block operators still act blockwise
  std::mt19937_64 rng(75);
  const BlockOperator L1 = random_operator(rng), L2 = random_operator(rng);
  for (const BlockOperator& L : {op_add(L1, L2), op_scale(cplx(0, 2), L1), op_compose(L1, L2), op_adjoint(L1)}) {
    HardyVector analytic = random_vector(rng);
    analytic.b().setZero();
    EXPECT_TRUE(op_apply(L, analytic).b().isZero(0.0));
  }
}
