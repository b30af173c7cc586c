#include <gtest/gtest.h>

#include "silt/lemma_audits.hpp"
#include "test_util.hpp"

namespace silt {
namespace {

OperatorSpec generalized_bridge() {
  return ProjectorComplementSpec{{IndicatorFunction{0.0, 0.5}, SinusoidFunction{1}}};
}

TEST(Suites, ComplementGramIdentityPasses) {
  const SuiteResult r = lemma4_suite(1, 1000);
  EXPECT_TRUE(r.passed) << r.worst;
  EXPECT_EQ(r.instances, 1000u);
  EXPECT_LT(r.worst, 1e-10);
  EXPECT_EQ(r.comparison, "max_below");
}

TEST(Suites, GramLowerBoundPasses) {
  const SuiteResult r = lemma5_suite(2, 1000);
  EXPECT_TRUE(r.passed) << r.worst;
  EXPECT_GE(r.worst, -1e-10);
  EXPECT_GT(r.instances, 1000u);
  EXPECT_EQ(r.comparison, "min_above");
}

TEST(Suites, SuitesAreDeterministicPerSeed) {
  EXPECT_EQ(lemma4_suite(9, 100).worst, lemma4_suite(9, 100).worst);
  EXPECT_EQ(lemma5_suite(9, 100).worst, lemma5_suite(9, 100).worst);
}

TEST(OperatorSuite, InvertibleCatalogOperatorsPass) {
  for (const OperatorSpec& spec : {OperatorSpec{IdentitySpec{}}, OperatorSpec{CompactPerturbationSpec{}},
                                   OperatorSpec{CompactPerturbationSpec{KernelShape::Gaussian, 2.0, 0.1}}}) {
    const SuiteResult r = operator_lemma5_suite(build_operator(spec, GridContext(32)), 3, 3);
    EXPECT_TRUE(r.applicable);
    EXPECT_TRUE(r.passed) << describe(spec) << " worst " << r.worst;
  }
}

TEST(OperatorSuite, KernelWithoutDeclaredBoundIsNotApplicable) {
  const SuiteResult r = operator_lemma5_suite(build_operator(generalized_bridge(), GridContext(32)), 3, 3);
  EXPECT_FALSE(r.applicable);
  EXPECT_TRUE(r.passed);
}

TEST(OperatorSuite, TamperedDeclarationFails) {
  // A random singular matrix claimed to be bounded below by 0.5.
  std::mt19937_64 rng(81);
  Eigen::MatrixXd m = test::random_matrix(16, rng);
  m.col(3) = m.col(5);
  const OperatorMatrix op = build_operator(CustomMatrixSpec{m, 0.5}, GridContext(16));
  const SuiteResult r = operator_lemma5_suite(op, 3, 4);
  EXPECT_TRUE(r.applicable);
  EXPECT_FALSE(r.passed);
  EXPECT_GT(r.failures, 0u);
  EXPECT_LT(r.worst, 0.0);
}

TEST(KernelAudit, CatalogOperatorsPass) {
  for (const OperatorSpec& spec : {OperatorSpec{IdentitySpec{}}, generalized_bridge(),
                                   OperatorSpec{ProjectorComplementSpec{{ConstantFunction{1.0}}}},
                                   OperatorSpec{FbmVolterraSpec{}}}) {
    const SuiteResult r = kernel_audit(build_operator(spec, GridContext(32)), 5);
    EXPECT_TRUE(r.passed) << describe(spec) << ": " << r.note;
  }
}

TEST(DeclaredKernelAudits, GeneralizedBridgePasses) {
  const GridContext ctx(32);
  for (int k : {2, 3, 4}) {
    const SuiteResult a = lemma7_audit(generalized_bridge(), ctx, k, 6, 2000);
    EXPECT_TRUE(a.applicable);
    EXPECT_TRUE(a.passed) << a.worst;
    EXPECT_GE(a.worst, kAuditDistanceFloor);
    const SuiteResult b = lemma8_audit(generalized_bridge(), ctx, k, 6, 2000);
    EXPECT_TRUE(b.applicable);
    EXPECT_TRUE(b.passed) << b.worst;
  }
}

TEST(DeclaredKernelAudits, NotApplicableWithoutSplit) {
  const GridContext ctx(32);
  EXPECT_FALSE(lemma7_audit(IdentitySpec{}, ctx, 3, 6, 10).applicable);
  EXPECT_FALSE(lemma8_audit(IdentitySpec{}, ctx, 3, 6, 10).applicable);
  // Only step directions: no smooth part to audit.
  EXPECT_FALSE(lemma7_audit(ProjectorComplementSpec{{ConstantFunction{1.0}}}, ctx, 3, 6, 10).applicable);
}

TEST(KernelStability, ProjectorComplementsAgreeAcrossGrids) {
  EXPECT_TRUE(lemma1_stability(generalized_bridge(), GridContext(32)).passed);
  EXPECT_TRUE(
      lemma1_stability(ProjectorComplementSpec{{IndicatorFunction{0, 0.25}, IndicatorFunction{0.5, 1}}}, GridContext(16))
          .passed);
  EXPECT_FALSE(lemma1_stability(IdentitySpec{}, GridContext(16)).applicable);
}

}  // namespace
}  // namespace silt
