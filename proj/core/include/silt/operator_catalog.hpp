#pragma once

// Generating operators A for the planar integrator x(t) = ((A1_[0,t], xi_1), (A1_[0,t], xi_2)).

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "silt/function_spec.hpp"
#include "silt/grid_space.hpp"

namespace silt {

struct IdentitySpec {};

// A = I - P with P the orthogonal projection onto span(directions).
struct ProjectorComplementSpec {
  std::vector<FunctionSpec> directions;
};

enum class KernelShape { Exponential, Gaussian, Brownian };

// A = I + scale * S, (S f)(s) = int K(s,t) f(t) dt.
//   Exponential: K = exp(-|s-t| / length)
//   Gaussian:    K = exp(-(s-t)^2 / (2 length^2))
//   Brownian:    K = min(s,t)
struct CompactPerturbationSpec {
  KernelShape shape = KernelShape::Exponential;
  double scale = 0.5;
  double length = 1.0;
};

// Causal Volterra operator (A f)(s) = int_0^s (s-u)^(2 alpha - 2) f(u) du,
// 1/2 < alpha < 1. ||A 1_[0,t]||^2 scales like t^(2 alpha).
struct FbmVolterraSpec {
  double alpha = 0.75;
};

// Explicit n x n matrix on the cell basis. declared_sigma_min is a caller
// claim about invertibility that lower-bound audits take at face value.
struct CustomMatrixSpec {
  Eigen::MatrixXd matrix;
  std::optional<double> declared_sigma_min;
};

using OperatorSpec = std::variant<IdentitySpec, ProjectorComplementSpec, CompactPerturbationSpec,
                                  FbmVolterraSpec, CustomMatrixSpec>;

std::string describe(const OperatorSpec& spec);
std::string_view kind_name(const OperatorSpec& spec) noexcept;
std::string_view to_string(KernelShape shape) noexcept;

// True for specs of the form I + S with S compact (identity included).
bool is_identity_plus_compact(const OperatorSpec& spec) noexcept;

// Singular values below this fraction of sigma_max count as kernel.
inline constexpr double kKernelRelativeThreshold = 1e-8;

class OperatorMatrix {
 public:
  OperatorMatrix(GridContext ctx, OperatorSpec spec, Eigen::MatrixXd matrix);

  const GridContext& ctx() const noexcept { return ctx_; }
  const OperatorSpec& spec() const noexcept { return spec_; }
  const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }
  const OrthonormalFrame& kernel_frame() const noexcept { return kernel_frame_; }
  const Eigen::VectorXd& singular_values() const noexcept { return singular_values_; }
  double sigma_max() const noexcept { return singular_values_.size() ? singular_values_(0) : 0.0; }
  // Smallest singular value on the orthogonal complement of the kernel; zero
  // when the whole space is kernel.
  double sigma_min_complement() const noexcept { return sigma_min_complement_; }
  // Conditions 1-2 on the grid: kernel is a proper subspace and A is bounded
  // below on its complement.
  bool satisfies_kernel_conditions() const noexcept;

  GridFunction apply(const GridFunction& f) const;
  // g(t_j) = A 1_[0, j/n] stored as column j (j = 0..n).
  const Eigen::MatrixXd& node_images() const noexcept { return node_images_; }
  // <g(t_i), g(t_j)>, (n+1) x (n+1).
  const Eigen::MatrixXd& node_gram() const noexcept { return node_gram_; }

  // A 1_[j1/n, j2/n].
  GridFunction interval_image(int j1, int j2) const;
  // <A1_[a,b], A1_[c,d]> for node indices, from the node Gram.
  double increment_inner(int a, int b, int c, int d) const noexcept {
    return node_gram_(b, d) - node_gram_(b, c) - node_gram_(a, d) + node_gram_(a, c);
  }
  // Absolute eigenvalue floor for increment Gram matrices assembled from the
  // node Gram (cancellation level of its entries).
  double gram_floor() const noexcept { return gram_floor_; }

 private:
  GridContext ctx_;
  OperatorSpec spec_;
  Eigen::MatrixXd matrix_;
  Eigen::VectorXd singular_values_;
  OrthonormalFrame kernel_frame_;
  double sigma_min_complement_ = 0.0;
  Eigen::MatrixXd node_images_;
  Eigen::MatrixXd node_gram_;
  double gram_floor_ = 0.0;
};

// Throws InvalidSpec for alpha outside (1/2, 1), zero projector directions,
// or a custom matrix whose size does not match the grid.
OperatorMatrix build_operator(const OperatorSpec& spec, const GridContext& ctx);

struct NodePair {
  int j1 = 0;
  int j2 = 0;
  double t1 = 0.0;
  double t2 = 0.0;

  friend bool operator==(const NodePair&, const NodePair&) = default;
};

// All node pairs with ||A 1_[t1,t2]|| / ||1_[t1,t2]|| < tol, sorted.
std::vector<NodePair> kernel_indicators(const OperatorMatrix& op, double tol = 1e-6);

bool is_kernel_indicator(const OperatorMatrix& op, int j1, int j2, double tol = 1e-6);

struct KernelSplit {
  OrthonormalFrame step_part;
  std::vector<double> jump_nodes;  // sorted, unique
  OrthonormalFrame smooth_part;    // orthogonal to step_part
};

// Declared kernel basis of a ProjectorComplement spec split into step and
// smooth parts. Throws UnsupportedSpec for other kinds.
KernelSplit declared_kernel_split(const OperatorSpec& spec, const GridContext& ctx);

}  // namespace silt
