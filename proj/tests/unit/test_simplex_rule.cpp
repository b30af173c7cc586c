#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "silt/error.hpp"
#include "silt/simplex_rule.hpp"
#include "test_util.hpp"

namespace silt {
namespace {

using test::kind_of;

// Length of {y in [lo, hi] : y >= x}.
double upper_len(double x, double lo, double hi) { return std::max(0.0, hi - std::max(lo, x)); }
// Length of {y in [lo, hi] : y <= x}.
double lower_len(double x, double lo, double hi) { return std::max(0.0, std::min(hi, x) - lo); }

// Chain-constrained box volume for k = 2 and k = 3 by a fine midpoint sum over
// one coordinate; the remaining factors are exact interval lengths, so the
// integrand is piecewise polynomial and the sum converges fast.
double brute_chain_volume(const std::vector<double>& lo, const std::vector<double>& hi, const std::vector<double>& c) {
  const int steps = 200000;
  const std::size_t k = lo.size();
  const std::size_t mid = k == 2 ? 0 : 1;
  const double h = (hi[mid] - lo[mid]) / steps;
  double sum = 0.0;
  for (int s = 0; s < steps; ++s) {
    const double x = lo[mid] + (s + 0.5) * h;
    if (k == 2) {
      sum += upper_len(x + c[0], lo[1], hi[1]);
    } else {
      sum += lower_len(x - c[0], lo[0], hi[0]) * upper_len(x + c[1], lo[2], hi[2]);
    }
  }
  return sum * h;
}

TEST(SimplexVolume, ClosedForm) {
  EXPECT_DOUBLE_EQ(simplex_volume(2, 0.0), 0.5);
  EXPECT_DOUBLE_EQ(simplex_volume(3, 0.0), 1.0 / 6);
  EXPECT_DOUBLE_EQ(simplex_volume(2, 0.1), 0.81 / 2);
  EXPECT_EQ(simplex_volume(3, 0.5), 0.0);
}

TEST(ChainBoxVolume, MatchesBruteForceOnRandomBoxes) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t k = 2 + trial % 2;
    std::vector<double> lo(k), hi(k), c(k - 1);
    for (std::size_t i = 0; i < k; ++i) {
      lo[i] = u(rng);
      hi[i] = lo[i] + 0.2 + std::abs(u(rng));
    }
    for (auto& ci : c) ci = u(rng);
    const double got = chain_box_volume(lo, hi, c);
    EXPECT_NEAR(got, brute_chain_volume(lo, hi, c), 1e-8) << "trial " << trial;
  }
}

TEST(ChainBoxVolume, UnconstrainedIsBoxVolume) {
  const std::vector<double> lo{0, 0, 0}, hi{1, 2, 3}, c{-10, -10};
  EXPECT_NEAR(chain_box_volume(lo, hi, c), 6.0, 1e-12);
}

TEST(BuildSimplexRule, RejectsBadArguments) {
  EXPECT_EQ(kind_of([] { build_simplex_rule(16, 1, 0.1); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { build_simplex_rule(1, 2, 0.1); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { build_simplex_rule(16, 2, -0.1); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { build_simplex_rule(16, 3, 0.5); }), ErrorKind::EmptySimplex);
}

struct RuleCase {
  int n;
  int k;
  double delta;
};

class SimplexRuleProperty : public ::testing::TestWithParam<RuleCase> {};

TEST_P(SimplexRuleProperty, WeightsSumToSimplexVolume) {
  const auto [n, k, delta] = GetParam();
  const SimplexRule rule = build_simplex_rule(n, k, delta);
  double total = 0.0;
  for (double w : rule.weights()) {
    ASSERT_GT(w, 0.0);
    total += w;
  }
  EXPECT_NEAR(total, simplex_volume(k, delta), 1e-12);
}

TEST_P(SimplexRuleProperty, TuplesAreOrderedAndSorted) {
  const auto [n, k, delta] = GetParam();
  const SimplexRule rule = build_simplex_rule(n, k, delta);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const auto nodes = rule.nodes(i);
    ASSERT_TRUE(std::is_sorted(nodes.begin(), nodes.end()));
    ASSERT_GE(nodes.front(), 0);
    ASSERT_LE(nodes.back(), n);
    if (i > 0) {
      const auto prev = rule.nodes(i - 1);
      ASSERT_TRUE(std::lexicographical_compare(prev.begin(), prev.end(), nodes.begin(), nodes.end()));
    }
  }
}

TEST_P(SimplexRuleProperty, WeightEqualsClippedCellVolume) {
  const auto [n, k, delta] = GetParam();
  const SimplexRule rule = build_simplex_rule(n, k, delta);
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<std::size_t> pick(0, rule.size() - 1);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t i = trial == 0 ? 0 : pick(rng);
    const auto nodes = rule.nodes(i);
    std::vector<double> lo, hi, c(static_cast<std::size_t>(k - 1), delta);
    for (int j : nodes) {
      lo.push_back(std::max(0.0, (j - 0.5) / n));
      hi.push_back(std::min(1.0, (j + 0.5) / n));
    }
    const double oracle = k <= 3 ? brute_chain_volume(lo, hi, c) : chain_box_volume(lo, hi, c);
    EXPECT_NEAR(rule.weight(i), oracle, 1e-9 * std::pow(n, -k) + 1e-3 * oracle) << "tuple " << i;
  }
}

INSTANTIATE_TEST_SUITE_P(Grids, SimplexRuleProperty,
                         ::testing::Values(RuleCase{16, 2, 0.0}, RuleCase{16, 2, 0.1}, RuleCase{64, 2, 0.2},
                                           RuleCase{64, 2, 0.1}, RuleCase{32, 3, 0.1}, RuleCase{32, 3, 0.0},
                                           RuleCase{128, 2, 0.1}, RuleCase{24, 3, 0.13}, RuleCase{16, 4, 0.15},
                                           RuleCase{12, 5, 0.0}));

TEST(SimplexRule, MidpointOfLinearIntegrandConverges) {
  // Exact value of int t_1 over Delta_2^delta is (1-delta)^3 / 6.
  const double delta = 0.1;
  double prev_err = 1.0;
  for (int n : {16, 32, 64, 128}) {
    const SimplexRule rule = build_simplex_rule(n, 2, delta);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) s += rule.weight(i) * rule.point(i).time(0);
    const double err = std::abs(s - std::pow(1 - delta, 3) / 6);
    EXPECT_LT(err, prev_err);
    prev_err = err;
  }
  EXPECT_LT(prev_err, 1e-4);
}

TEST(SimplexPoint, SnapsAndChecksMembership) {
  const GridContext ctx(10);
  const std::vector<double> times{0.0, 0.31, 0.6};
  const SimplexPoint p = make_simplex_point(ctx, times, 0.2);
  EXPECT_EQ(p.nodes, (std::vector<int>{0, 3, 6}));
  EXPECT_TRUE(p.strictly_increasing());
  EXPECT_TRUE(p.in_delta_simplex());
  const std::vector<double> close{0.0, 0.1, 0.6};
  EXPECT_FALSE(make_simplex_point(ctx, close, 0.2).in_delta_simplex());
  const std::vector<double> unsorted{0.5, 0.2};
  EXPECT_EQ(kind_of([&] { make_simplex_point(ctx, unsorted); }), ErrorKind::InvalidArgument);
}

}  // namespace
}  // namespace silt
