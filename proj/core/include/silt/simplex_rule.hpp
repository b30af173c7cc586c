#pragma once

// Node-mesh quadrature over the ordered simplex
//   Delta_k^delta = {0 <= t_1 <= ... <= t_k <= 1, t_{i+1} - t_i >= delta}.
//
// Each node tuple (j_1..j_k) stands for the cube of side 1/n centred on it.
// Its weight is the exact volume of that cube intersected with the simplex,
// so the weights sum to vol(Delta_k^delta) = (1 - (k-1) delta)^k / k! for any
// delta, including separations that are not a whole number of cells.

#include <cstddef>
#include <span>
#include <vector>

#include "silt/grid_space.hpp"

namespace silt {

// An ordered time tuple on the grid, t_i = nodes[i] / n.
struct SimplexPoint {
  int n = 0;
  std::vector<int> nodes;
  double delta = 0.0;

  int k() const noexcept { return static_cast<int>(nodes.size()); }
  double time(int i) const noexcept { return static_cast<double>(nodes[static_cast<std::size_t>(i)]) / n; }
  bool strictly_increasing() const noexcept;
  // Membership in Delta_k^delta (with a small slack for rounding).
  bool in_delta_simplex() const noexcept;
};

// Snaps times to nodes. Throws InvalidArgument when the times are not sorted
// or k < 2.
SimplexPoint make_simplex_point(const GridContext& ctx, std::span<const double> times, double delta = 0.0);

// vol(Delta_k^delta); zero when (k-1) delta >= 1.
double simplex_volume(int k, double delta);

class SimplexRule {
 public:
  int n() const noexcept { return n_; }
  int k() const noexcept { return k_; }
  double delta() const noexcept { return delta_; }
  std::size_t size() const noexcept { return weights_.size(); }
  std::span<const int> nodes(std::size_t i) const noexcept {
    return {nodes_.data() + i * static_cast<std::size_t>(k_), static_cast<std::size_t>(k_)};
  }
  double weight(std::size_t i) const noexcept { return weights_[i]; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  SimplexPoint point(std::size_t i) const;
  // Number of distinct weight classes that were integrated exactly.
  std::size_t distinct_weights() const noexcept { return distinct_weights_; }

  friend SimplexRule build_simplex_rule(int n, int k, double delta);

 private:
  int n_ = 0;
  int k_ = 0;
  double delta_ = 0.0;
  std::vector<int> nodes_;
  std::vector<double> weights_;
  std::size_t distinct_weights_ = 0;
};

// Throws InvalidArgument for k < 2, n < 2 or delta < 0, and EmptySimplex when
// (k-1) delta >= 1.
SimplexRule build_simplex_rule(int n, int k, double delta);

// Volume of {x in prod [lo_i, hi_i] : x_{i+1} - x_i >= c_i}; exposed for tests.
double chain_box_volume(std::span<const double> lo, std::span<const double> hi, std::span<const double> c);

}  // namespace silt
