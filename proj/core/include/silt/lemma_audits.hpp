#pragma once

// Randomized property suites for Gram-determinant identities and bounds, and
// for the kernel conditions of the generating operator.

#include <cstddef>
#include <cstdint>
#include <string>

#include "silt/operator_catalog.hpp"

namespace silt {

struct SuiteResult {
  std::string name;
  bool applicable = true;
  bool passed = true;
  std::size_t instances = 0;
  std::size_t failures = 0;
  // The statistic compared with the threshold: the largest residual for
  // "max_below" suites, the smallest margin or distance for "min_above".
  double worst = 0.0;
  double threshold = 0.0;
  std::string comparison;
  std::string note;
};

SuiteResult not_applicable(std::string name, std::string note);

// G((I-P)g_1..(I-P)g_k) = G(g_1..g_k, e_1..e_m) on random instances with
// n <= 64, k <= 4, m <= 3; residual < 1e-10.
SuiteResult lemma4_suite(std::uint64_t seed, std::size_t instances = 1000);

// G(Bq_1..Bq_k) >= sigma_min(B)^(2k) G(q_1..q_k) on random invertible B,
// including q_1 on the smallest right singular vector, plus exact equality
// for B = cI with c a power of two.
SuiteResult lemma5_suite(std::uint64_t seed, std::size_t instances = 1000);

// The same bound for the configured operator, using its declared lower bound
// when one is given. Not applicable to singular operators without one.
SuiteResult operator_lemma5_suite(const OperatorMatrix& op, int k, std::uint64_t seed, std::size_t instances = 100);

// Kernel members are annihilated (|A e| < 1e-8) and A is bounded below by
// sigma_min_complement on the orthogonal complement of the kernel.
SuiteResult kernel_audit(const OperatorMatrix& op, std::uint64_t seed, std::size_t samples = 100);

// Distances from each smooth kernel member to the span of the tuple
// increments, the step part and the earlier smooth members stay above a
// positive floor over random tuples.
SuiteResult lemma7_audit(const OperatorSpec& spec, const GridContext& ctx, int k, std::uint64_t seed,
                         std::size_t tuples = 10000);

// G(increments, step part) / G(increments, jump-interval indicators) stays
// above a positive floor over random tuples.
SuiteResult lemma8_audit(const OperatorSpec& spec, const GridContext& ctx, int k, std::uint64_t seed,
                         std::size_t tuples = 10000);

// Kernel indicators of a projector complement agree (as time pairs) on grids
// n and 2n.
SuiteResult lemma1_stability(const OperatorSpec& spec, const GridContext& ctx);

inline constexpr double kAuditDistanceFloor = 1e-6;

}  // namespace silt
