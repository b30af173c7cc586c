#pragma once

// Finite-dimensional model of L2([0,1]) on a uniform grid of n cells.
//
// A GridFunction is a step function, constant on each cell [(i-1)/n, i/n).
// The inner product carries the 1/n cell weight, so indicator norms equal
// interval lengths and <1_[0,s], 1_[0,t]> = min(s,t) holds exactly on nodes.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace silt {

class GridContext {
 public:
  explicit GridContext(int n);

  int n() const noexcept { return n_; }
  double cell_width() const noexcept { return 1.0 / n_; }
  double node(int j) const noexcept { return static_cast<double>(j) / n_; }
  double midpoint(int i) const noexcept { return (i + 0.5) / n_; }

  // Nearest grid node index for a time in [0,1].
  int snap(double t) const;

  friend bool operator==(const GridContext&, const GridContext&) = default;

 private:
  int n_;
};

class GridFunction {
 public:
  explicit GridFunction(GridContext ctx);  // zero function
  GridFunction(GridContext ctx, Eigen::VectorXd values);

  const GridContext& ctx() const noexcept { return ctx_; }
  const Eigen::VectorXd& values() const noexcept { return values_; }
  int size() const noexcept { return static_cast<int>(values_.size()); }

  double norm_sq() const;
  double norm() const;

  GridFunction operator+(const GridFunction& other) const;
  GridFunction operator-(const GridFunction& other) const;
  GridFunction operator*(double s) const;

 private:
  GridContext ctx_;
  Eigen::VectorXd values_;
};

inline GridFunction operator*(double s, const GridFunction& f) { return f * s; }

// <f,g> = (1/n) sum_i f_i g_i. Throws InvalidArgument on mismatched grids.
double inner(const GridFunction& f, const GridFunction& g);

// Indicator of [t1,t2] with both ends snapped to the nearest node.
// Throws DegenerateInterval when the snapped nodes coincide.
GridFunction make_indicator(const GridContext& ctx, double t1, double t2);
// Indicator between node indices j1 < j2.
GridFunction indicator_nodes(const GridContext& ctx, int j1, int j2);

struct GramDeterminant {
  double value = 0.0;
  double log_value = 0.0;  // -infinity when any eigenvalue was clamped to zero

  bool singular() const noexcept;
};

// Relative eigenvalue threshold below which a Gram matrix direction counts as
// degenerate.
inline constexpr double kGramRelativeTolerance = 1e-12;

// Determinant of a symmetric positive semidefinite matrix via its eigenvalues.
// Eigenvalues <= max(rel_tol * lambda_max, abs_floor) are clamped to zero.
GramDeterminant clamped_determinant(const Eigen::Ref<const Eigen::MatrixXd>& gram,
                                    double rel_tol = kGramRelativeTolerance,
                                    double abs_floor = 0.0);

Eigen::MatrixXd gram_matrix(std::span<const GridFunction> fs);
GramDeterminant gram_det(std::span<const GridFunction> fs);

struct OrthonormalFrame {
  std::vector<GridFunction> members;
  std::vector<int> source_ranks;  // input index of each member
  std::vector<int> dropped;       // inputs removed as dependent

  std::size_t size() const noexcept { return members.size(); }
  bool empty() const noexcept { return members.empty(); }
};

inline constexpr double kOrthonormalizeTolerance = 1e-10;

// Gram-Schmidt in input order (with one reorthogonalization pass). A vector is
// dropped when its residual norm is <= tol times its own norm.
OrthonormalFrame orthonormalize(std::span<const GridFunction> fs,
                                double tol = kOrthonormalizeTolerance);

double projection_norm_sq(const OrthonormalFrame& frame, const GridFunction& h);

// Residual h - P h of the projection onto the frame span.
GridFunction project_out(const OrthonormalFrame& frame, const GridFunction& h);

// ||P_M h||^2 for every subset M of {1..k-1}, indexed by bitmask (bit i-1 set
// when i is in M). P_M projects onto the span of the orthonormalized
// increments with indices in M. Throws DependentIncrements when
// orthonormalization drops a vector.
std::vector<double> subset_projection_terms(std::span<const GridFunction> increments,
                                            const GridFunction& h);

double distance_to_span(const GridFunction& v, std::span<const GridFunction> fs);

// |G((I-P)g_1..(I-P)g_k) - G(g_1..g_k,e_1..e_m)| / max(1, |RHS|) where P is
// the projection onto the span of the orthonormal basis e.
double complement_gram_identity_residual(std::span<const GridFunction> gs,
                                         const OrthonormalFrame& basis);

// Applies a matrix (acting on cell coefficient vectors) to a grid function.
GridFunction apply(const Eigen::MatrixXd& b, const GridFunction& f);

// Smallest singular value of b; since the inner product is a uniform multiple
// of the Euclidean one, singular values of the coefficient matrix are the
// operator's singular values on the grid space.
double sigma_min(const Eigen::MatrixXd& b);

// G(Bq_1..Bq_k) - sigma^(2k) G(q_1..q_k) with sigma = sigma_min(B), or the
// caller-declared lower bound when one is supplied. Throws SingularOperator
// when the computed sigma_min is <= 1e-8 * sigma_max and no bound is declared.
double gram_lower_bound_margin(const Eigen::MatrixXd& b, std::span<const GridFunction> qs,
                               std::optional<double> declared_sigma = std::nullopt);

}  // namespace silt
