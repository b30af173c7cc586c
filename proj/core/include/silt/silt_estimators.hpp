#pragma once

// Approximating self-intersection local times
//   T_eps = int_{Delta_k^delta} prod_i f_eps(x(t_{i+1}) - x(t_i)) dt
// with the planar heat kernel f_eps(z) = exp(-|z|^2 / (2 eps)) / (2 pi eps),
// their exact moments and the L2 Cauchy diagnostic along an eps ladder.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "silt/integrator_process.hpp"
#include "silt/parallel.hpp"
#include "silt/simplex_rule.hpp"

namespace silt {

// Throws NonpositiveEps unless eps > 0.
double gaussian_kernel(double z1, double z2, double eps);
// One coordinate: exp(-z^2 / (2 eps)) / sqrt(2 pi eps).
double gaussian_kernel_1d(double z, double eps);

// E prod_i f(Δx_i) for one coordinate whose increments have covariance C:
// (2 pi)^(-m/2) det(C + eps I)^(-1/2).
double kernel_product_expectation_1d(const Eigen::MatrixXd& c, double eps);
// Planar version: the square of the 1D value, (2 pi)^(-m) det(C + eps I)^(-1).
double kernel_product_expectation(const Eigen::MatrixXd& c, double eps);

// Throws EmptySimplex when delta < 2/n or (k-1) delta >= 1.
double approx_silt(const PathSample& path, double eps, int k, double delta);
// Same with a prebuilt rule (rule.n() must match the path grid).
double approx_silt(const PathSample& path, double eps, const SimplexRule& rule);

double expected_silt(const OperatorMatrix& op, double eps, int k, double delta, const Exec& exec = {});

struct SecondMomentOptions {
  // Required for k > 3, where the double simplex sum grows like n^(2k).
  bool expensive = false;
  Exec exec{};
};

double second_moment(const OperatorMatrix& op, double eps1, double eps2, int k, double delta,
                     const SecondMomentOptions& opts = {});

// M(i,j) = E T_{eps_i} T_{eps_j} for every pair of the list, from one pass
// over tuple pairs. Symmetric bitwise.
Eigen::MatrixXd second_moment_table(const OperatorMatrix& op, const std::vector<double>& eps, int k, double delta,
                                    const SecondMomentOptions& opts = {});

// values - mean, with the residual mean removed by a second compensated pass.
std::vector<double> rosen_center(const std::vector<double>& values);

struct MomentTable {
  std::vector<double> epsilons;
  std::vector<double> first_moments;
  Eigen::MatrixXd cross_moments;
  // E(T_{eps_i} - T_{eps_{i+1}})^2 for consecutive ladder entries.
  std::vector<double> cauchy_increments;
  int n = 0;
  int k = 0;
  double delta = 0.0;
  std::size_t tuples = 0;
  double simplex_volume = 0.0;
};

// Ladder must have >= 3 positive, non-increasing entries.
MomentTable cauchy_diagnostic(const OperatorMatrix& op, const std::vector<double>& eps_ladder, int k, double delta,
                              const SecondMomentOptions& opts = {});

// CSV with header eps1,eps2,moment,cauchy_increment (the increment column is
// filled on consecutive ladder pairs and empty elsewhere).
void write_moment_csv(std::ostream& out, const MomentTable& table);

struct MonteCarloSilt {
  std::size_t paths = 0;
  double mean = 0.0;
  double std_error = 0.0;
  double mean_sq = 0.0;  // of T^2
  double std_error_sq = 0.0;
};

// Sample mean of T_eps and T_eps^2 over paths 0..count-1 of the seed stream.
MonteCarloSilt monte_carlo_silt(const OperatorMatrix& op, double eps, int k, double delta, std::uint64_t seed,
                                std::size_t count, const Exec& exec = {});

}  // namespace silt
