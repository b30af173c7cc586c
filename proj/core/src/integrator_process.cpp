#include "silt/integrator_process.hpp"

#include <cmath>
#include <ostream>

#include <fmt/core.h>

#include "silt/error.hpp"
#include "silt/philox.hpp"

namespace silt {

double covariance(const OperatorMatrix& op, double s, double t) {
  const int js = op.ctx().snap(s);
  const int jt = op.ctx().snap(t);
  return op.node_gram()(js, jt);
}

Eigen::MatrixXd increment_gram(const OperatorMatrix& op, const SimplexPoint& times) {
  if (times.n != op.ctx().n()) throw Error(ErrorKind::InvalidArgument, "simplex point and operator grids differ");
  if (times.k() < 2) throw Error(ErrorKind::InvalidArgument, "increment_gram needs k >= 2");
  if (!times.strictly_increasing()) throw Error(ErrorKind::DegenerateInterval, "increment times must be strictly increasing");
  const int m = times.k() - 1;
  Eigen::MatrixXd g(m, m);
  const auto& t = times.nodes;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j <= i; ++j) g(i, j) = g(j, i) = op.increment_inner(t[i], t[i + 1], t[j], t[j + 1]);
  }
  return g;
}

IncrementFactor factor_increment_covariance(const OperatorMatrix& op) {
  const int n = op.ctx().n();
  const Eigen::MatrixXd c = (op.matrix().transpose() * op.matrix()) / n;
  IncrementFactor out;
  const Eigen::MatrixXd off = c - Eigen::MatrixXd(c.diagonal().asDiagonal());
  if (off.cwiseAbs().maxCoeff() == 0.0) {
    out.diagonal = true;
    out.factor = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) out.factor(i, i) = std::sqrt(std::max(c(i, i), 0.0));
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(c);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::FactorizationFailure, "eigensolver did not converge");
  Eigen::VectorXd lam = solver.eigenvalues();
  const double top = std::max(lam.maxCoeff(), 0.0);
  for (int i = 0; i < n; ++i) {
    if (lam(i) < -1e-6 * top) {
      throw Error(ErrorKind::FactorizationFailure,
                  fmt::format("increment covariance has eigenvalue {:.3e} (largest {:.3e})", lam(i), top));
    }
    if (lam(i) < 1e-10) {
      out.clamped_mass = std::max(out.clamped_mass, std::abs(lam(i)));
      lam(i) = 0.0;
    }
  }
  out.factor = solver.eigenvectors() * lam.cwiseSqrt().asDiagonal();
  return out;
}

PathSampler::PathSampler(const OperatorMatrix& op) : ctx_(op.ctx()), factor_(factor_increment_covariance(op)) {}

PathSample PathSampler::sample(std::uint64_t seed, std::uint32_t path_id) const {
  const int n = ctx_.n();
  PathSample p{ctx_, Eigen::VectorXd::Zero(n + 1), Eigen::VectorXd::Zero(n + 1), seed, path_id};
  Eigen::VectorXd z(n);
  for (std::uint32_t coord = 0; coord < 2; ++coord) {
    PhiloxStream stream(seed, path_id, coord);
    for (int i = 0; i < n; ++i) z(i) = stream.normal();
    Eigen::VectorXd inc;
    if (factor_.diagonal) {
      inc = factor_.factor.diagonal().cwiseProduct(z);
    } else {
      inc.noalias() = factor_.factor * z;
    }
    Eigen::VectorXd& x = coord == 0 ? p.coord1 : p.coord2;
    for (int i = 0; i < n; ++i) x(i + 1) = x(i) + inc(i);
  }
  return p;
}

std::vector<PathSample> sample_paths(const OperatorMatrix& op, std::uint64_t seed, std::size_t count,
                                     const Exec& exec) {
  if (count == 0) throw Error(ErrorKind::InvalidArgument, "sample_paths needs count >= 1");
  const PathSampler sampler(op);
  auto chunks = map_chunks<std::vector<PathSample>>(count, 256, exec, [&](std::size_t, std::size_t b, std::size_t e) {
    std::vector<PathSample> out;
    out.reserve(e - b);
    for (std::size_t i = b; i < e; ++i) out.push_back(sampler.sample(seed, static_cast<std::uint32_t>(i)));
    return out;
  });
  std::vector<PathSample> all;
  all.reserve(count);
  for (auto& c : chunks) {
    for (auto& p : c) all.push_back(std::move(p));
  }
  return all;
}

void write_paths_csv(std::ostream& out, const std::vector<PathSample>& paths) {
  out << "path_id,node_index,t,x1,x2\n";
  for (const auto& p : paths) {
    const int n = p.ctx.n();
    for (int j = 0; j <= n; ++j) {
      out << fmt::format("{},{},{:.17g},{:.17g},{:.17g}\n", p.path_id, j, p.ctx.node(j), p.coord1(j), p.coord2(j));
    }
  }
}

}  // namespace silt
