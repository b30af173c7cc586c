#pragma once

// Counter-based Philox4x32-10 generator with independent substreams.
//
// A stream is addressed by (seed, stream_a, stream_b); its i-th block of four
// 32-bit words is a pure function of those and i, so draws do not depend on
// thread scheduling.

#include <array>
#include <cstdint>
#include <optional>

namespace silt {

inline constexpr const char* kRngAlgorithm = "philox4x32-10/box-muller";

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept;

class PhiloxStream {
 public:
  PhiloxStream(std::uint64_t seed, std::uint32_t stream_a, std::uint32_t stream_b = 0) noexcept;

  std::uint32_t next_u32() noexcept;
  // Uniform on [0,1) with 53 random bits.
  double uniform() noexcept;
  // Uniform integer in [lo, hi].
  int uniform_int(int lo, int hi) noexcept;
  double normal() noexcept;

 private:
  PhiloxKey key_;
  std::uint32_t stream_a_;
  std::uint32_t stream_b_;
  std::uint64_t block_ = 0;
  PhiloxCounter buffer_{};
  int used_ = 4;
  std::optional<double> spare_normal_;
};

}  // namespace silt
