#include "silt/grid_space.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "silt/error.hpp"

namespace silt {

namespace {

void require_same_grid(const GridContext& a, const GridContext& b) {
  if (a != b) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("grid functions live on different grids (n={} vs n={})", a.n(), b.n()));
  }
}

void require_shared_ctx(std::span<const GridFunction> fs) {
  for (const auto& f : fs) require_same_grid(fs.front().ctx(), f.ctx());
}

}  // namespace

GridContext::GridContext(int n) : n_(n) {
  if (n < 2) throw Error(ErrorKind::InvalidArgument, fmt::format("grid needs n >= 2, got {}", n));
}

int GridContext::snap(double t) const {
  constexpr double slack = 1e-12;
  if (!(t >= -slack && t <= 1.0 + slack)) {
    throw Error(ErrorKind::InvalidArgument, fmt::format("time {} outside [0,1]", t));
  }
  return static_cast<int>(std::clamp<long>(std::lround(t * n_), 0L, static_cast<long>(n_)));
}

GridFunction::GridFunction(GridContext ctx) : ctx_(ctx), values_(Eigen::VectorXd::Zero(ctx.n())) {}

GridFunction::GridFunction(GridContext ctx, Eigen::VectorXd values)
    : ctx_(ctx), values_(std::move(values)) {
  if (values_.size() != ctx_.n()) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("grid function has {} values for n={}", values_.size(), ctx_.n()));
  }
}

double GridFunction::norm_sq() const { return values_.squaredNorm() / ctx_.n(); }

double GridFunction::norm() const { return std::sqrt(norm_sq()); }

GridFunction GridFunction::operator+(const GridFunction& other) const {
  require_same_grid(ctx_, other.ctx_);
  return GridFunction(ctx_, values_ + other.values_);
}

GridFunction GridFunction::operator-(const GridFunction& other) const {
  require_same_grid(ctx_, other.ctx_);
  return GridFunction(ctx_, values_ - other.values_);
}

GridFunction GridFunction::operator*(double s) const { return GridFunction(ctx_, values_ * s); }

double inner(const GridFunction& f, const GridFunction& g) {
  require_same_grid(f.ctx(), g.ctx());
  return f.values().dot(g.values()) / f.ctx().n();
}

GridFunction indicator_nodes(const GridContext& ctx, int j1, int j2) {
  if (j1 < 0 || j2 > ctx.n() || j1 > j2) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("node pair ({}, {}) invalid for n={}", j1, j2, ctx.n()));
  }
  if (j1 == j2) {
    throw Error(ErrorKind::DegenerateInterval, fmt::format("interval collapses at node {}", j1));
  }
  Eigen::VectorXd v = Eigen::VectorXd::Zero(ctx.n());
  v.segment(j1, j2 - j1).setOnes();
  return GridFunction(ctx, std::move(v));
}

GridFunction make_indicator(const GridContext& ctx, double t1, double t2) {
  if (!(t1 < t2)) {
    throw Error(ErrorKind::InvalidArgument, fmt::format("indicator needs t1 < t2, got [{}, {}]", t1, t2));
  }
  return indicator_nodes(ctx, ctx.snap(t1), ctx.snap(t2));
}

bool GramDeterminant::singular() const noexcept {
  return std::isinf(log_value) && log_value < 0;
}

GramDeterminant clamped_determinant(const Eigen::Ref<const Eigen::MatrixXd>& gram, double rel_tol,
                                    double abs_floor) {
  GramDeterminant out;
  const auto dim = gram.rows();
  if (dim == 0) return {1.0, 0.0};
  constexpr double neg_inf = -std::numeric_limits<double>::infinity();
  if (dim == 1) {
    const double lam = gram(0, 0);
    if (lam <= std::max(abs_floor, 0.0) || !(lam > 0)) return {0.0, neg_inf};
    return {lam, std::log(lam)};
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& lam = solver.eigenvalues();  // ascending
  const double threshold = std::max(rel_tol * std::max(lam(dim - 1), 0.0), abs_floor);
  if (lam(0) <= threshold) return {0.0, neg_inf};
  out.value = 1.0;
  out.log_value = 0.0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    out.value *= lam(i);
    out.log_value += std::log(lam(i));
  }
  return out;
}

Eigen::MatrixXd gram_matrix(std::span<const GridFunction> fs) {
  const auto k = static_cast<Eigen::Index>(fs.size());
  Eigen::MatrixXd g(k, k);
  if (k == 0) return g;
  require_shared_ctx(fs);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      g(i, j) = g(j, i) = inner(fs[i], fs[j]);
    }
  }
  return g;
}

GramDeterminant gram_det(std::span<const GridFunction> fs) {
  if (fs.empty()) throw Error(ErrorKind::InvalidArgument, "gram_det of an empty list");
  return clamped_determinant(gram_matrix(fs));
}

OrthonormalFrame orthonormalize(std::span<const GridFunction> fs, double tol) {
  if (!(tol > 0)) throw Error(ErrorKind::InvalidArgument, "orthonormalize needs tol > 0");
  OrthonormalFrame frame;
  if (fs.empty()) return frame;
  require_shared_ctx(fs);
  const GridContext ctx = fs.front().ctx();
  std::vector<Eigen::VectorXd> basis;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    Eigen::VectorXd r = fs[i].values();
    const double own = r.norm();
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& e : basis) r -= e.dot(r) * e;
    }
    const double res = r.norm();
    if (res <= tol * own || own == 0.0) {
      frame.dropped.push_back(static_cast<int>(i));
      continue;
    }
    r /= res;
    basis.push_back(r);
    // Euclidean unit vectors scaled by sqrt(n) are unit in the grid inner product.
    frame.members.emplace_back(ctx, r * std::sqrt(static_cast<double>(ctx.n())));
    frame.source_ranks.push_back(static_cast<int>(i));
  }
  return frame;
}

double projection_norm_sq(const OrthonormalFrame& frame, const GridFunction& h) {
  double s = 0.0;
  for (const auto& e : frame.members) {
    const double c = inner(h, e);
    s += c * c;
  }
  return std::min(s, h.norm_sq());
}

GridFunction project_out(const OrthonormalFrame& frame, const GridFunction& h) {
  Eigen::VectorXd r = h.values();
  const double n = h.ctx().n();
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& e : frame.members) {
      require_same_grid(h.ctx(), e.ctx());
      r -= (e.values().dot(r) / n) * e.values();
    }
  }
  return GridFunction(h.ctx(), std::move(r));
}

std::vector<double> subset_projection_terms(std::span<const GridFunction> increments,
                                            const GridFunction& h) {
  const OrthonormalFrame frame = orthonormalize(increments);
  if (!frame.dropped.empty()) {
    throw Error(ErrorKind::DependentIncrements,
                fmt::format("increment {} is linearly dependent on its predecessors",
                            frame.dropped.front() + 1));
  }
  const std::size_t m = frame.size();
  if (m > 24) throw Error(ErrorKind::InvalidArgument, "too many increments for subset enumeration");
  std::vector<double> coeff_sq(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double c = inner(h, frame.members[i]);
    coeff_sq[i] = c * c;
  }
  std::vector<double> terms(std::size_t{1} << m, 0.0);
  for (std::size_t mask = 1; mask < terms.size(); ++mask) {
    const std::size_t low = mask & (~mask + 1);
    const auto bit = static_cast<std::size_t>(std::countr_zero(low));
    terms[mask] = terms[mask ^ low] + coeff_sq[bit];
  }
  return terms;
}

double distance_to_span(const GridFunction& v, std::span<const GridFunction> fs) {
  if (fs.empty()) return v.norm();
  require_same_grid(v.ctx(), fs.front().ctx());
  return project_out(orthonormalize(fs), v).norm();
}

double complement_gram_identity_residual(std::span<const GridFunction> gs,
                                         const OrthonormalFrame& basis) {
  std::vector<GridFunction> projected;
  projected.reserve(gs.size());
  for (const auto& g : gs) projected.push_back(project_out(basis, g));
  std::vector<GridFunction> augmented(gs.begin(), gs.end());
  augmented.insert(augmented.end(), basis.members.begin(), basis.members.end());
  const double lhs = gram_det(projected).value;
  const double rhs = gram_det(augmented).value;
  return std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs));
}

GridFunction apply(const Eigen::MatrixXd& b, const GridFunction& f) {
  if (b.rows() != f.size() || b.cols() != f.size()) {
    throw Error(ErrorKind::InvalidArgument, "operator and grid function sizes differ");
  }
  return GridFunction(f.ctx(), b * f.values());
}

double sigma_min(const Eigen::MatrixXd& b) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(b);
  const auto& s = svd.singularValues();
  return s.size() == 0 ? 0.0 : s(s.size() - 1);
}

double gram_lower_bound_margin(const Eigen::MatrixXd& b, std::span<const GridFunction> qs,
                               std::optional<double> declared_sigma) {
  if (qs.empty()) throw Error(ErrorKind::InvalidArgument, "gram_lower_bound_margin needs qs");
  double sigma = 0.0;
  if (declared_sigma) {
    sigma = *declared_sigma;
  } else {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(b);
    const auto& s = svd.singularValues();
    sigma = s(s.size() - 1);
    if (sigma <= 1e-8 * s(0)) {
      throw Error(ErrorKind::SingularOperator,
                  fmt::format("sigma_min = {:.3e} relative to sigma_max = {:.3e}", sigma, s(0)));
    }
  }
  std::vector<GridFunction> images;
  images.reserve(qs.size());
  for (const auto& q : qs) images.push_back(apply(b, q));
  const double bound = std::pow(sigma, 2.0 * static_cast<double>(qs.size()));
  return gram_det(images).value - bound * gram_det(qs).value;
}

}  // namespace silt
