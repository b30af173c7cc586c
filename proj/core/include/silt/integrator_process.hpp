#pragma once

// Covariances and path sampling for the planar integrator
//   x(t) = ((A 1_[0,t], xi_1), (A 1_[0,t], xi_2))
// with xi_1, xi_2 independent white noises.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "silt/operator_catalog.hpp"
#include "silt/parallel.hpp"
#include "silt/simplex_rule.hpp"

namespace silt {

struct PathSample {
  GridContext ctx;
  Eigen::VectorXd coord1;  // values at nodes 0..n, coord1[0] = 0
  Eigen::VectorXd coord2;
  std::uint64_t seed = 0;
  std::uint32_t path_id = 0;
};

// <A1_[0,s], A1_[0,t]> for grid node times s, t.
double covariance(const OperatorMatrix& op, double s, double t);

// (k-1) x (k-1) Gram matrix of the increment images A1_[t_i, t_{i+1}].
// Throws DegenerateInterval unless the nodes are strictly increasing.
Eigen::MatrixXd increment_gram(const OperatorMatrix& op, const SimplexPoint& times);

// Covariance of the n cell increments, C_ij = <A e_i, A e_j> with e_i the cell
// indicators, and a factor F with F F^T = C after eigenvalue clamping.
struct IncrementFactor {
  Eigen::MatrixXd factor;
  bool diagonal = false;
  double clamped_mass = 0.0;  // largest |eigenvalue| set to zero
};

// Throws FactorizationFailure when a negative eigenvalue exceeds 1e-6 of the
// largest one.
IncrementFactor factor_increment_covariance(const OperatorMatrix& op);

class PathSampler {
 public:
  explicit PathSampler(const OperatorMatrix& op);

  const GridContext& ctx() const noexcept { return ctx_; }
  const IncrementFactor& factor() const noexcept { return factor_; }
  // Path i of the stream for this seed; a pure function of (seed, i).
  PathSample sample(std::uint64_t seed, std::uint32_t path_id) const;

 private:
  GridContext ctx_;
  IncrementFactor factor_;
};

std::vector<PathSample> sample_paths(const OperatorMatrix& op, std::uint64_t seed, std::size_t count,
                                     const Exec& exec = {});

// CSV with header path_id,node_index,t,x1,x2.
void write_paths_csv(std::ostream& out, const std::vector<PathSample>& paths);

}  // namespace silt
