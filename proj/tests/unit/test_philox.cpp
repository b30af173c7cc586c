#include <gtest/gtest.h>

#include <cmath>

#include "silt/philox.hpp"

namespace silt {
namespace {

// Known-answer vectors published with the reference Random123 implementation.
TEST(Philox, KnownAnswerZero) {
  const PhiloxCounter out = philox4x32_10({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out, (PhiloxCounter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(Philox, KnownAnswerAllOnes) {
  const PhiloxCounter out =
      philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out, (PhiloxCounter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, KnownAnswerPiDigits) {
  const PhiloxCounter out =
      philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(out, (PhiloxCounter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(PhiloxStream, SameAddressSameDraws) {
  PhiloxStream a(42, 7, 3);
  PhiloxStream b(42, 7, 3);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.normal(), b.normal());
}

TEST(PhiloxStream, DistinctStreamsDiffer) {
  PhiloxStream a(42, 7, 3);
  PhiloxStream b(42, 7, 4);
  PhiloxStream c(43, 7, 3);
  int same_b = 0, same_c = 0;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u32();
    same_b += x == b.next_u32();
    same_c += x == c.next_u32();
  }
  EXPECT_LT(same_b, 3);
  EXPECT_LT(same_c, 3);
}

TEST(PhiloxStream, UniformRangeAndMoments) {
  PhiloxStream s(1, 0);
  const int count = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < count; ++i) {
    const double u = s.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sum_sq += u * u;
  }
  const double mean = sum / count;
  EXPECT_NEAR(mean, 0.5, 5 * std::sqrt(1.0 / 12 / count));
  EXPECT_NEAR(sum_sq / count - mean * mean, 1.0 / 12, 0.002);
}

TEST(PhiloxStream, UniformIntCoversClosedRange) {
  PhiloxStream s(2, 0);
  std::array<int, 5> counts{};
  for (int i = 0; i < 50000; ++i) {
    const int v = s.uniform_int(3, 7);
    ASSERT_GE(v, 3);
    ASSERT_LE(v, 7);
    ++counts[static_cast<std::size_t>(v - 3)];
  }
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(PhiloxStream, NormalMoments) {
  PhiloxStream s(3, 0);
  const int count = 400000;
  double m1 = 0, m2 = 0, m3 = 0, m4 = 0;
  for (int i = 0; i < count; ++i) {
    const double z = s.normal();
    m1 += z;
    m2 += z * z;
    m3 += z * z * z;
    m4 += z * z * z * z;
  }
  m1 /= count;
  m2 /= count;
  m3 /= count;
  m4 /= count;
  const double se = 1.0 / std::sqrt(count);
  EXPECT_NEAR(m1, 0.0, 5 * se);
  EXPECT_NEAR(m2, 1.0, 5 * std::sqrt(2.0) * se);
  EXPECT_NEAR(m3, 0.0, 5 * std::sqrt(15.0) * se);
  EXPECT_NEAR(m4, 3.0, 5 * std::sqrt(96.0) * se);
}

}  // namespace
}  // namespace silt
