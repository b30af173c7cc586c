#include "silt/operator_catalog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "silt/error.hpp"

namespace silt {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Eigen::MatrixXd projector_complement_matrix(const ProjectorComplementSpec& spec, const GridContext& ctx) {
  if (spec.directions.empty()) {
    throw Error(ErrorKind::InvalidSpec, "projector complement needs at least one direction");
  }
  std::vector<GridFunction> dirs;
  for (const auto& d : spec.directions) {
    GridFunction f = realize(d, ctx);
    if (f.norm_sq() == 0.0) {
      throw Error(ErrorKind::InvalidSpec, fmt::format("projector direction {} is zero on the grid", describe(d)));
    }
    dirs.push_back(std::move(f));
  }
  const OrthonormalFrame frame = orthonormalize(dirs);
  const int n = ctx.n();
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
  for (const auto& u : frame.members) {
    a.noalias() -= (u.values() * u.values().transpose()) / n;
  }
  return a;
}

Eigen::MatrixXd compact_perturbation_matrix(const CompactPerturbationSpec& spec, const GridContext& ctx) {
  if (!std::isfinite(spec.scale)) throw Error(ErrorKind::InvalidSpec, "perturbation scale must be finite");
  if (spec.shape != KernelShape::Brownian && !(spec.length > 0)) {
    throw Error(ErrorKind::InvalidSpec, "kernel length must be positive");
  }
  const int n = ctx.n();
  Eigen::MatrixXd s(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double x = ctx.midpoint(i);
      const double y = ctx.midpoint(j);
      double k = 0.0;
      switch (spec.shape) {
        case KernelShape::Exponential: k = std::exp(-std::abs(x - y) / spec.length); break;
        case KernelShape::Gaussian: k = std::exp(-(x - y) * (x - y) / (2 * spec.length * spec.length)); break;
        case KernelShape::Brownian: k = std::min(x, y); break;
      }
      s(i, j) = k / n;
    }
  }
  return Eigen::MatrixXd::Identity(n, n) + spec.scale * s;
}

Eigen::MatrixXd fbm_volterra_matrix(const FbmVolterraSpec& spec, const GridContext& ctx) {
  if (!(spec.alpha > 0.5 && spec.alpha < 1.0)) {
    throw Error(ErrorKind::InvalidSpec, fmt::format("fBM Volterra kernel needs 1/2 < alpha < 1, got {}", spec.alpha));
  }
  const int n = ctx.n();
  const double expo = 2 * spec.alpha - 2;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  // Midpoint evaluation; the indicator u < s zeroes the singular diagonal.
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) a(i, j) = std::pow(ctx.midpoint(i) - ctx.midpoint(j), expo) / n;
  }
  return a;
}

Eigen::MatrixXd realize_matrix(const OperatorSpec& spec, const GridContext& ctx) {
  return std::visit(
      Overloaded{
          [&](const IdentitySpec&) -> Eigen::MatrixXd { return Eigen::MatrixXd::Identity(ctx.n(), ctx.n()); },
          [&](const ProjectorComplementSpec& s) { return projector_complement_matrix(s, ctx); },
          [&](const CompactPerturbationSpec& s) { return compact_perturbation_matrix(s, ctx); },
          [&](const FbmVolterraSpec& s) { return fbm_volterra_matrix(s, ctx); },
          [&](const CustomMatrixSpec& s) -> Eigen::MatrixXd {
            if (s.matrix.rows() != ctx.n() || s.matrix.cols() != ctx.n()) {
              throw Error(ErrorKind::InvalidSpec,
                          fmt::format("custom matrix is {}x{} but the grid has n={}", s.matrix.rows(),
                                      s.matrix.cols(), ctx.n()));
            }
            if (!s.matrix.allFinite()) throw Error(ErrorKind::InvalidSpec, "custom matrix has non-finite entries");
            return s.matrix;
          },
      },
      spec);
}

}  // namespace

std::string_view kind_name(const OperatorSpec& spec) noexcept {
  return std::visit(Overloaded{
                        [](const IdentitySpec&) { return std::string_view("identity"); },
                        [](const ProjectorComplementSpec&) { return std::string_view("projector_complement"); },
                        [](const CompactPerturbationSpec&) { return std::string_view("compact_perturbation"); },
                        [](const FbmVolterraSpec&) { return std::string_view("fbm_volterra"); },
                        [](const CustomMatrixSpec&) { return std::string_view("custom"); },
                    },
                    spec);
}

std::string_view to_string(KernelShape shape) noexcept {
  switch (shape) {
    case KernelShape::Exponential: return "exponential";
    case KernelShape::Gaussian: return "gaussian";
    case KernelShape::Brownian: return "brownian";
  }
  return "unknown";
}

std::string describe(const OperatorSpec& spec) {
  return std::visit(Overloaded{
                        [](const IdentitySpec&) { return std::string("I"); },
                        [](const ProjectorComplementSpec& s) {
                          std::string out = "I - P{";
                          for (std::size_t i = 0; i < s.directions.size(); ++i) {
                            if (i) out += ", ";
                            out += silt::describe(s.directions[i]);
                          }
                          return out + "}";
                        },
                        [](const CompactPerturbationSpec& s) {
                          return fmt::format("I + {}*S[{}, length={}]", s.scale, to_string(s.shape), s.length);
                        },
                        [](const FbmVolterraSpec& s) { return fmt::format("fBM Volterra(alpha={})", s.alpha); },
                        [](const CustomMatrixSpec& s) {
                          return fmt::format("custom {}x{}", s.matrix.rows(), s.matrix.cols());
                        },
                    },
                    spec);
}

bool is_identity_plus_compact(const OperatorSpec& spec) noexcept {
  return std::holds_alternative<IdentitySpec>(spec) || std::holds_alternative<ProjectorComplementSpec>(spec) ||
         std::holds_alternative<CompactPerturbationSpec>(spec);
}

OperatorMatrix::OperatorMatrix(GridContext ctx, OperatorSpec spec, Eigen::MatrixXd matrix)
    : ctx_(ctx), spec_(std::move(spec)), matrix_(std::move(matrix)) {
  const int n = ctx_.n();
  if (matrix_.rows() != n || matrix_.cols() != n) {
    throw Error(ErrorKind::InvalidArgument, "operator matrix does not match the grid");
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(matrix_, Eigen::ComputeFullV);
  singular_values_ = svd.singularValues();
  const double smax = sigma_max();
  const double threshold = kKernelRelativeThreshold * smax;
  std::vector<GridFunction> kernel_vectors;
  sigma_min_complement_ = 0.0;
  for (int i = 0; i < n; ++i) {
    const double s = singular_values_(i);
    if (smax == 0.0 || s < threshold) {
      kernel_vectors.emplace_back(ctx_, svd.matrixV().col(i));
    } else {
      sigma_min_complement_ = s;  // singular values are sorted descending
    }
  }
  kernel_frame_ = orthonormalize(kernel_vectors);

  // Column j holds A 1_[0, j/n]: cumulative sums of the matrix columns.
  node_images_ = Eigen::MatrixXd::Zero(n, n + 1);
  for (int j = 1; j <= n; ++j) node_images_.col(j) = node_images_.col(j - 1) + matrix_.col(j - 1);
  node_gram_ = (node_images_.transpose() * node_images_) / n;
  gram_floor_ = 1e-12 * std::max(smax * smax, std::numeric_limits<double>::min());
}

bool OperatorMatrix::satisfies_kernel_conditions() const noexcept {
  return static_cast<int>(kernel_frame_.size()) < ctx_.n() && sigma_min_complement_ > 0.0;
}

GridFunction OperatorMatrix::apply(const GridFunction& f) const {
  if (f.ctx() != ctx_) throw Error(ErrorKind::InvalidArgument, "grid function and operator grids differ");
  return GridFunction(ctx_, matrix_ * f.values());
}

GridFunction OperatorMatrix::interval_image(int j1, int j2) const {
  if (j1 < 0 || j2 > ctx_.n() || j1 > j2) {
    throw Error(ErrorKind::InvalidArgument, fmt::format("node pair ({}, {}) invalid", j1, j2));
  }
  if (j1 == j2) throw Error(ErrorKind::DegenerateInterval, fmt::format("interval collapses at node {}", j1));
  return GridFunction(ctx_, node_images_.col(j2) - node_images_.col(j1));
}

OperatorMatrix build_operator(const OperatorSpec& spec, const GridContext& ctx) {
  return OperatorMatrix(ctx, spec, realize_matrix(spec, ctx));
}

bool is_kernel_indicator(const OperatorMatrix& op, int j1, int j2, double tol) {
  const double num = op.interval_image(j1, j2).norm();
  const double den = std::sqrt(static_cast<double>(j2 - j1) / op.ctx().n());
  return num / den < tol;
}

std::vector<NodePair> kernel_indicators(const OperatorMatrix& op, double tol) {
  if (!(tol > 0)) throw Error(ErrorKind::InvalidArgument, "kernel_indicators needs tol > 0");
  std::vector<NodePair> out;
  const int n = op.ctx().n();
  const auto& g = op.node_images();
  const double tol_sq = tol * tol;
  for (int j1 = 0; j1 < n; ++j1) {
    for (int j2 = j1 + 1; j2 <= n; ++j2) {
      const double num = (g.col(j2) - g.col(j1)).squaredNorm() / n;
      const double den = static_cast<double>(j2 - j1) / n;
      if (num < tol_sq * den) out.push_back({j1, j2, op.ctx().node(j1), op.ctx().node(j2)});
    }
  }
  return out;
}

KernelSplit declared_kernel_split(const OperatorSpec& spec, const GridContext& ctx) {
  const auto* pc = std::get_if<ProjectorComplementSpec>(&spec);
  if (!pc) {
    throw Error(ErrorKind::UnsupportedSpec,
                fmt::format("{} operators carry no declared kernel", kind_name(spec)));
  }
  std::vector<GridFunction> step;
  std::vector<GridFunction> smooth;
  std::vector<double> jumps;
  for (const auto& d : pc->directions) {
    if (is_zero(d)) throw Error(ErrorKind::InvalidSpec, "zero projector direction");
    if (is_step(d)) {
      step.push_back(realize(d, ctx));
      if (const auto* ind = std::get_if<IndicatorFunction>(&d)) {
        jumps.push_back(ctx.node(ctx.snap(ind->a)));
        jumps.push_back(ctx.node(ctx.snap(ind->b)));
      } else {
        jumps.push_back(0.0);
        jumps.push_back(1.0);
      }
    } else {
      smooth.push_back(realize(d, ctx));
    }
  }
  std::sort(jumps.begin(), jumps.end());
  jumps.erase(std::unique(jumps.begin(), jumps.end()), jumps.end());

  KernelSplit out;
  out.step_part = orthonormalize(step);
  out.jump_nodes = std::move(jumps);
  // Orthonormalize step directions first so the smooth members come out
  // orthogonal to the step part.
  std::vector<GridFunction> all = step;
  all.insert(all.end(), smooth.begin(), smooth.end());
  OrthonormalFrame joint = orthonormalize(all);
  const int step_count = static_cast<int>(step.size());
  for (std::size_t i = 0; i < joint.members.size(); ++i) {
    if (joint.source_ranks[i] >= step_count) {
      out.smooth_part.members.push_back(joint.members[i]);
      out.smooth_part.source_ranks.push_back(joint.source_ranks[i] - step_count);
    }
  }
  for (int d : joint.dropped) {
    if (d >= step_count) out.smooth_part.dropped.push_back(d - step_count);
  }
  return out;
}

}  // namespace silt
