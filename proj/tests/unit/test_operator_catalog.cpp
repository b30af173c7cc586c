#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <limits>

#include "silt/error.hpp"
#include "silt/operator_catalog.hpp"
#include "test_util.hpp"

namespace silt {
namespace {

using test::kind_of;

OperatorSpec bridge() { return ProjectorComplementSpec{{ConstantFunction{1.0}}}; }

OperatorSpec generalized_bridge() {
  return ProjectorComplementSpec{{IndicatorFunction{0.0, 0.5}, SinusoidFunction{1}}};
}

// Least-squares slope of log y against log t over t = j/8, j = 2..8.
double loglog_slope(const std::function<double(double)>& y) {
  Eigen::MatrixXd x(7, 2);
  Eigen::VectorXd v(7);
  for (int j = 2; j <= 8; ++j) {
    const double t = static_cast<double>(j) / 8;
    x(j - 2, 0) = std::log(t);
    x(j - 2, 1) = 1.0;
    v(j - 2) = std::log(y(t));
  }
  return x.colPivHouseholderQr().solve(v)(0);
}

double fitted_exponent(const OperatorMatrix& op) {
  return loglog_slope([&](double t) { return op.interval_image(0, op.ctx().snap(t)).norm_sq(); });
}

// Continuum |A1_[0,t]|^2 for the causal kernel (s-u)^(2a-2), by fine midpoint quadrature in s.
double continuum_fbm_norm_sq(double alpha, double t) {
  const double beta = 2 * alpha - 1;
  const int m = 200000;
  double sum = 0.0;
  for (int i = 0; i < m; ++i) {
    const double s = (i + 0.5) / m;
    const double f = (std::pow(s, beta) - (s > t ? std::pow(s - t, beta) : 0.0)) / beta;
    sum += f * f;
  }
  return sum / m;
}

TEST(BuildOperator, IdentityHasEmptyKernel) {
  const OperatorMatrix op = build_operator(IdentitySpec{}, GridContext(16));
  EXPECT_EQ(op.matrix(), Eigen::MatrixXd::Identity(16, 16));
  EXPECT_TRUE(op.kernel_frame().empty());
  EXPECT_TRUE(op.satisfies_kernel_conditions());
  EXPECT_DOUBLE_EQ(op.sigma_min_complement(), 1.0);
}

TEST(BuildOperator, BridgeKillsConstants) {
  const GridContext ctx(16);
  const OperatorMatrix op = build_operator(bridge(), ctx);
  ASSERT_EQ(op.kernel_frame().size(), 1u);
  const GridFunction e = op.kernel_frame().members[0];
  EXPECT_NEAR(std::abs(inner(e, make_indicator(ctx, 0, 1))), 1.0, 1e-12);
  EXPECT_LT(op.apply(make_indicator(ctx, 0, 1)).norm(), 1e-14);
  EXPECT_NEAR(op.sigma_min_complement(), 1.0, 1e-12);
}

TEST(BuildOperator, FbmSelfSimilarityExponent) {
  for (int n : {64, 256}) {
    const OperatorMatrix op = build_operator(FbmVolterraSpec{0.75}, GridContext(n));
    EXPECT_NEAR(fitted_exponent(op), 1.5, 0.03) << "n=" << n;
  }
}

TEST(BuildOperator, FbmExponentMatchesContinuumKernel) {
  for (double alpha : {0.7, 0.75, 0.85}) {
    const OperatorMatrix op = build_operator(FbmVolterraSpec{alpha}, GridContext(256));
    const double continuum = loglog_slope([&](double t) { return continuum_fbm_norm_sq(alpha, t); });
    EXPECT_NEAR(fitted_exponent(op), continuum, 0.03) << "alpha=" << alpha;
  }
}

TEST(BuildOperator, FbmStrongSingularityConvergesUnderRefinement) {
  // Near alpha = 1/2 the midpoint rule misses mass next to the diagonal; the gap shrinks slowly.
  const double continuum = loglog_slope([](double t) { return continuum_fbm_norm_sq(0.6, t); });
  double previous = std::numeric_limits<double>::infinity();
  for (int n : {64, 256, 1024}) {
    const double gap = std::abs(fitted_exponent(build_operator(FbmVolterraSpec{0.6}, GridContext(n))) - continuum);
    EXPECT_LT(gap, previous) << "n=" << n;
    previous = gap;
  }
}

TEST(BuildOperator, FbmIsCausal) {
  const OperatorMatrix op = build_operator(FbmVolterraSpec{0.75}, GridContext(32));
  // A 1_[a,1] vanishes before a.
  const GridFunction img = op.interval_image(16, 32);
  EXPECT_EQ(img.values().head(16).cwiseAbs().maxCoeff(), 0.0);
}

TEST(BuildOperator, InvalidSpecs) {
  const GridContext ctx(8);
  EXPECT_EQ(kind_of([&] { build_operator(FbmVolterraSpec{0.5}, ctx); }), ErrorKind::InvalidSpec);
  EXPECT_EQ(kind_of([&] { build_operator(FbmVolterraSpec{1.0}, ctx); }), ErrorKind::InvalidSpec);
  EXPECT_EQ(kind_of([&] { build_operator(ProjectorComplementSpec{{ZeroFunction{}}}, ctx); }),
            ErrorKind::InvalidSpec);
  EXPECT_EQ(kind_of([&] { build_operator(ProjectorComplementSpec{}, ctx); }), ErrorKind::InvalidSpec);
  EXPECT_EQ(kind_of([&] { build_operator(CustomMatrixSpec{Eigen::MatrixXd::Identity(4, 4), {}}, ctx); }),
            ErrorKind::InvalidSpec);
  EXPECT_EQ(kind_of([&] { build_operator(CompactPerturbationSpec{KernelShape::Gaussian, 1.0, 0.0}, ctx); }),
            ErrorKind::InvalidSpec);
}

TEST(BuildOperator, CompactPerturbationMatchesKernelQuadrature) {
  const GridContext ctx(16);
  const CompactPerturbationSpec spec{KernelShape::Brownian, 0.5, 1.0};
  const OperatorMatrix op = build_operator(spec, ctx);
  // (A f)(s_i) = f_i + 0.5 * (1/n) sum_j min(s_i, s_j) f_j for f = 1.
  const GridFunction img = op.apply(make_indicator(ctx, 0, 1));
  for (int i = 0; i < 16; ++i) {
    double s = 0.0;
    for (int j = 0; j < 16; ++j) s += std::min(ctx.midpoint(i), ctx.midpoint(j)) / 16;
    EXPECT_NEAR(img.values()(i), 1.0 + 0.5 * s, 1e-14);
  }
  EXPECT_TRUE(op.kernel_frame().empty());
}

TEST(KernelIndicators, IdentityHasNone) {
  EXPECT_TRUE(kernel_indicators(build_operator(IdentitySpec{}, GridContext(16))).empty());
}

TEST(KernelIndicators, BridgeKillsOnlyTheFullInterval) {
  const auto pairs = kernel_indicators(build_operator(bridge(), GridContext(16)));
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0], (NodePair{0, 16, 0.0, 1.0}));
}

TEST(KernelIndicators, TwoHalvesAndTheirSum) {
  const GridContext ctx(16);
  const OperatorMatrix op = build_operator(
      ProjectorComplementSpec{{IndicatorFunction{0, 0.5}, IndicatorFunction{0.5, 1}}}, ctx);
  const auto pairs = kernel_indicators(op);
  const std::vector<NodePair> expected{{0, 8, 0.0, 0.5}, {0, 16, 0.0, 1.0}, {8, 16, 0.5, 1.0}};
  EXPECT_EQ(pairs, expected);
  // Direct application of A as the oracle.
  for (const auto& p : expected) EXPECT_LT(op.apply(indicator_nodes(ctx, p.j1, p.j2)).norm(), 1e-12);
}

TEST(KernelIndicatorsProperty, ReportedPairsAreAnnihilatedAndOthersAreNot) {
  const GridContext ctx(24);
  const OperatorMatrix op = build_operator(generalized_bridge(), ctx);
  const auto pairs = kernel_indicators(op);
  for (int j1 = 0; j1 < 24; ++j1) {
    for (int j2 = j1 + 1; j2 <= 24; ++j2) {
      const double ratio = op.apply(indicator_nodes(ctx, j1, j2)).norm() / std::sqrt((j2 - j1) / 24.0);
      const bool listed = std::find(pairs.begin(), pairs.end(), NodePair{j1, j2, ctx.node(j1), ctx.node(j2)}) !=
                          pairs.end();
      EXPECT_EQ(listed, ratio < 1e-6) << j1 << "," << j2;
    }
  }
}

TEST(KernelIndicatorsProperty, StableUnderRefinement) {
  for (int n : {16, 32, 64}) {
    const auto coarse = kernel_indicators(build_operator(generalized_bridge(), GridContext(n)));
    const auto fine = kernel_indicators(build_operator(generalized_bridge(), GridContext(2 * n)));
    ASSERT_EQ(coarse.size(), fine.size());
    for (std::size_t i = 0; i < coarse.size(); ++i) {
      EXPECT_DOUBLE_EQ(coarse[i].t1, fine[i].t1);
      EXPECT_DOUBLE_EQ(coarse[i].t2, fine[i].t2);
    }
  }
}

TEST(KernelProperty, KernelMembersAreAnnihilatedAndComplementIsBoundedBelow) {
  std::mt19937_64 rng(31);
  const GridContext ctx(32);
  for (const OperatorSpec& spec : {generalized_bridge(), bridge(), OperatorSpec{IdentitySpec{}},
                                   OperatorSpec{CompactPerturbationSpec{}}}) {
    const OperatorMatrix op = build_operator(spec, ctx);
    for (const auto& e : op.kernel_frame().members) EXPECT_LT(op.apply(e).norm(), 1e-8);
    for (int trial = 0; trial < 20; ++trial) {
      const GridFunction f = project_out(op.kernel_frame(), test::random_function(ctx, rng));
      EXPECT_GE(op.apply(f).norm(), op.sigma_min_complement() * f.norm() * (1 - 1e-10));
    }
  }
}

TEST(KernelProperty, ZeroMatrixViolatesConditions) {
  const OperatorMatrix op = build_operator(CustomMatrixSpec{Eigen::MatrixXd::Zero(8, 8), {}}, GridContext(8));
  EXPECT_FALSE(op.satisfies_kernel_conditions());
  EXPECT_EQ(op.kernel_frame().size(), 8u);
}

TEST(NodeGram, MatchesDirectInnerProducts) {
  const GridContext ctx(12);
  const OperatorMatrix op = build_operator(FbmVolterraSpec{0.7}, ctx);
  for (int a = 0; a <= 12; a += 3) {
    for (int b = 0; b <= 12; b += 4) {
      const GridFunction ga = a ? op.apply(indicator_nodes(ctx, 0, a)) : GridFunction(ctx);
      const GridFunction gb = b ? op.apply(indicator_nodes(ctx, 0, b)) : GridFunction(ctx);
      EXPECT_NEAR(op.node_gram()(a, b), inner(ga, gb), 1e-14);
    }
  }
  EXPECT_NEAR(op.increment_inner(2, 5, 5, 9), inner(op.interval_image(2, 5), op.interval_image(5, 9)), 1e-14);
}

TEST(DeclaredKernelSplit, FullIndicator) {
  const GridContext ctx(16);
  const KernelSplit s = declared_kernel_split(bridge(), ctx);
  ASSERT_EQ(s.step_part.size(), 1u);
  EXPECT_NEAR(s.step_part.members[0].values()(0), 1.0, 1e-15);
  EXPECT_EQ(s.jump_nodes, (std::vector<double>{0.0, 1.0}));
  EXPECT_TRUE(s.smooth_part.empty());
}

TEST(DeclaredKernelSplit, SinusoidIsSmooth) {
  const GridContext ctx(16);
  const KernelSplit s = declared_kernel_split(ProjectorComplementSpec{{SinusoidFunction{1}}}, ctx);
  EXPECT_TRUE(s.step_part.empty());
  EXPECT_TRUE(s.jump_nodes.empty());
  ASSERT_EQ(s.smooth_part.size(), 1u);
  const GridFunction sin1 = realize(SinusoidFunction{1}, ctx);
  EXPECT_NEAR(std::abs(inner(s.smooth_part.members[0], sin1)), sin1.norm(), 1e-12);
}

TEST(DeclaredKernelSplit, MixedDirectionsFollowGramSchmidt) {
  const GridContext ctx(16);
  const KernelSplit s = declared_kernel_split(generalized_bridge(), ctx);
  ASSERT_EQ(s.step_part.size(), 1u);
  ASSERT_EQ(s.smooth_part.size(), 1u);
  EXPECT_EQ(s.jump_nodes, (std::vector<double>{0.0, 0.5}));
  // Hand Gram-Schmidt: residual of sin against the normalized half indicator.
  const GridFunction e1 = std::sqrt(2.0) * make_indicator(ctx, 0, 0.5);
  const GridFunction sin1 = realize(SinusoidFunction{1}, ctx);
  GridFunction r = sin1 - inner(sin1, e1) * e1;
  r = (1.0 / r.norm()) * r;
  EXPECT_LT((s.smooth_part.members[0] - r).values().cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(inner(s.smooth_part.members[0], s.step_part.members[0]), 0.0, 1e-14);
}

TEST(DeclaredKernelSplit, UnsupportedForOtherKinds) {
  EXPECT_EQ(kind_of([] { declared_kernel_split(IdentitySpec{}, GridContext(8)); }), ErrorKind::UnsupportedSpec);
}

TEST(Describe, NamesOperators) {
  EXPECT_EQ(describe(OperatorSpec{IdentitySpec{}}), "I");
  EXPECT_EQ(kind_name(generalized_bridge()), "projector_complement");
  EXPECT_TRUE(is_identity_plus_compact(bridge()));
  EXPECT_FALSE(is_identity_plus_compact(FbmVolterraSpec{}));
}

}  // namespace
}  // namespace silt
