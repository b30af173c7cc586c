#include "silt/fwt_regularization.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <bit>
#include <limits>
#include <numbers>

#include <fmt/core.h>

#include "silt/error.hpp"
#include "small_linalg.hpp"

namespace silt {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kKernelIndicatorTolerance = 1e-6;

enum class Integrand { InverseGram, Thm1, Thm2, Eq3 };

std::vector<GridFunction> increment_images(const OperatorMatrix& op, const SimplexPoint& times) {
  if (times.n != op.ctx().n()) throw Error(ErrorKind::InvalidArgument, "simplex point and operator grids differ");
  if (times.k() < 2) throw Error(ErrorKind::InvalidArgument, "need k >= 2 times");
  if (!times.strictly_increasing()) throw Error(ErrorKind::SingularGram, "coincident times give a zero increment");
  std::vector<GridFunction> out;
  for (int i = 0; i + 1 < times.k(); ++i) out.push_back(op.interval_image(times.nodes[i], times.nodes[i + 1]));
  return out;
}

GramDeterminant checked_gram(const OperatorMatrix& op, const std::vector<GridFunction>& incs) {
  const GramDeterminant g = clamped_determinant(gram_matrix(incs), kGramRelativeTolerance, op.gram_floor());
  if (g.singular()) throw Error(ErrorKind::SingularGram, "increment Gram determinant vanishes");
  return g;
}

// <h, A 1_[0, j/n]> for j = 0..n.
Eigen::VectorXd node_pairings(const OperatorMatrix& op, const GridFunction& h) {
  if (h.ctx() != op.ctx()) throw Error(ErrorKind::InvalidArgument, "probe and operator grids differ");
  return (op.node_images().transpose() * h.values()) / op.ctx().n();
}

struct LevelAcc {
  double value = 0.0;
  std::size_t hits = 0;
  double hit_weight = 0.0;
};

QuadratureLevel integrate_level(const OperatorMatrix& op, const SimplexRule& rule, Integrand kind,
                                const Eigen::VectorXd* h1, const Eigen::VectorXd* h2, const Exec& exec) {
  const int m = rule.k() - 1;
  const double two_pi_norm = std::pow(kTwoPi, -m);
  const auto chunks = map_chunks<LevelAcc>(rule.size(), 2048, exec, [&](std::size_t, std::size_t b, std::size_t e) {
    CompensatedSum sum;
    CompensatedSum hit_w;
    std::size_t hits = 0;
    Eigen::MatrixXd gram(m, m);
    std::array<double, detail::kMaxSmall * detail::kMaxSmall> l{};
    std::array<double, detail::kMaxSmall> c1{}, c2{};
    for (std::size_t t = b; t < e; ++t) {
      const auto nd = rule.nodes(t);
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j <= i; ++j) gram(i, j) = gram(j, i) = op.increment_inner(nd[i], nd[i + 1], nd[j], nd[j + 1]);
      }
      const GramDeterminant g = clamped_determinant(gram, kGramRelativeTolerance, op.gram_floor());
      bool singular = g.singular();
      if (!singular && kind == Integrand::Thm2) {
        const double len = static_cast<double>(nd[1] - nd[0]) / rule.n();
        singular = gram(0, 0) < kKernelIndicatorTolerance * kKernelIndicatorTolerance * len;
      }
      if (!singular && (kind == Integrand::Thm1 || kind == Integrand::Eq3)) {
        for (int i = 0; i < m; ++i) {
          for (int j = 0; j < m; ++j) l[i * m + j] = gram(i, j);
        }
        singular = !detail::cholesky_inplace(l.data(), m);
        if (!singular) {
          for (int i = 0; i < m; ++i) c1[i] = (*h1)(nd[i + 1]) - (*h1)(nd[i]);
          detail::forward_solve(l.data(), m, c1.data());
          if (h2) {
            for (int i = 0; i < m; ++i) c2[i] = (*h2)(nd[i + 1]) - (*h2)(nd[i]);
            detail::forward_solve(l.data(), m, c2.data());
          }
        }
      }
      const double w = rule.weight(t);
      if (singular) {
        ++hits;
        hit_w.add(w);
        continue;
      }
      double f = 0.0;
      switch (kind) {
        case Integrand::InverseGram: f = 1.0 / g.value; break;
        case Integrand::Thm1: {
          // Product form of the alternating subset sum: with c the coordinates
          // of h in the orthonormalized increments, |P_M h|^2 = sum_{i in M} c_i^2.
          double p = 1.0;
          for (int i = 0; i < m; ++i) p *= -std::expm1(-0.5 * c1[i] * c1[i]);
          f = p / g.value;
          break;
        }
        case Integrand::Thm2: {
          const double b1 = (*h1)(nd[1]) - (*h1)(nd[0]);
          f = std::expm1(-0.5 * b1 * b1 / gram(0, 0)) / gram(0, 0);
          break;
        }
        case Integrand::Eq3: {
          double q = 0.0;
          for (int i = 0; i < m; ++i) q += c1[i] * c1[i] + c2[i] * c2[i];
          f = two_pi_norm * std::exp(-0.5 * q) / g.value;
          break;
        }
      }
      sum.add(w * f);
    }
    return LevelAcc{sum.value(), hits, hit_w.value()};
  });
  CompensatedSum total;
  CompensatedSum hit_w;
  QuadratureLevel lvl;
  lvl.n = rule.n();
  lvl.tuples = rule.size();
  for (const auto& c : chunks) {
    total.add(c.value);
    hit_w.add(c.hit_weight);
    lvl.singular_hits += c.hits;
  }
  lvl.value = total.value();
  lvl.singular_weight = hit_w.value();
  return lvl;
}

void finish(QuadratureReport& r) {
  const auto& lv = r.levels;
  r.value = lv.back().value;
  r.singular_hits = lv.back().singular_hits;
  r.error_estimate = lv.size() >= 2 ? std::abs(lv[lv.size() - 1].value - lv[lv.size() - 2].value) : 0.0;
}

void require_levels(const std::vector<int>& levels) {
  if (levels.empty()) throw Error(ErrorKind::InvalidArgument, "at least one refinement level is required");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] < 2 || (i > 0 && levels[i] <= levels[i - 1])) {
      throw Error(ErrorKind::InvalidArgument, "refinement levels must be increasing and >= 2");
    }
  }
}

void require_conditions(const OperatorMatrix& op) {
  if (!op.satisfies_kernel_conditions()) {
    throw Error(ErrorKind::ConditionsViolated,
                fmt::format("operator {} has no bounded-below complement of its kernel on n={}", describe(op.spec()),
                            op.ctx().n()));
  }
}

QuadratureReport theorem3_shell(int k, double delta) {
  QuadratureReport r;
  r.integrand = "inverse_gram";
  r.k = k;
  r.delta = delta;
  r.two_pi_factor = false;
  r.sign_convention = "none";
  r.domain = "delta_simplex";
  return r;
}

QuadratureReport fwt_shell(int k, const FwtMode& mode) {
  QuadratureReport r;
  r.integrand = to_string(mode);
  r.k = k;
  switch (mode.kind) {
    case FwtMode::Kind::Thm1FullSimplex:
      r.sign_convention = "one_minus_exp";
      r.domain = "full_simplex";
      break;
    case FwtMode::Kind::Thm2K2:
      r.sign_convention = "exp_minus_one";
      r.domain = "full_simplex";
      break;
    case FwtMode::Kind::Eq3Delta:
      r.two_pi_factor = true;
      r.sign_convention = "none";
      r.domain = "delta_simplex";
      r.delta = mode.delta;
      break;
  }
  return r;
}

QuadratureLevel fwt_level(const OperatorMatrix& op, int k, const FwtProbe& probe, const FwtMode& mode,
                          const Exec& exec) {
  const Eigen::VectorXd h1 = node_pairings(op, probe.h1);
  switch (mode.kind) {
    case FwtMode::Kind::Thm1FullSimplex:
      return integrate_level(op, build_simplex_rule(op.ctx().n(), k, 0.0), Integrand::Thm1, &h1, nullptr, exec);
    case FwtMode::Kind::Thm2K2:
      if (k != 2) throw Error(ErrorKind::UnsupportedSpec, fmt::format("thm2_k2 mode needs k = 2, got {}", k));
      if (!is_identity_plus_compact(op.spec())) {
        throw Error(ErrorKind::UnsupportedSpec,
                    fmt::format("thm2_k2 mode needs an identity-plus-compact operator, got {}", kind_name(op.spec())));
      }
      return integrate_level(op, build_simplex_rule(op.ctx().n(), 2, 0.0), Integrand::Thm2, &h1, nullptr, exec);
    case FwtMode::Kind::Eq3Delta: {
      if (!(mode.delta > 0)) throw Error(ErrorKind::InvalidArgument, "eq3_delta needs delta > 0");
      const Eigen::VectorXd h2 = node_pairings(op, probe.h2);
      return integrate_level(op, build_simplex_rule(op.ctx().n(), k, mode.delta), Integrand::Eq3, &h1, &h2, exec);
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown mode");
}

std::vector<std::pair<int, int>> box_boundary(int n, NodePair t0, int radius) {
  std::vector<std::pair<int, int>> out;
  for (int a = t0.j1 - radius; a <= t0.j1 + radius; ++a) {
    for (int b = t0.j2 - radius; b <= t0.j2 + radius; ++b) {
      if (std::max(std::abs(a - t0.j1), std::abs(b - t0.j2)) != radius) continue;
      if (a < 0 || b > n || a >= b) continue;
      out.emplace_back(a, b);
    }
  }
  return out;
}

NodePair snap_pair(const GridContext& ctx, std::pair<double, double> t0) {
  const int j1 = ctx.snap(t0.first);
  const int j2 = ctx.snap(t0.second);
  if (j1 >= j2) throw Error(ErrorKind::DegenerateInterval, fmt::format("t0 = ({}, {}) collapses", t0.first, t0.second));
  return {j1, j2, ctx.node(j1), ctx.node(j2)};
}

std::vector<int> radii_in_cells(const GridContext& ctx, const std::vector<double>& radii) {
  if (radii.empty()) throw Error(ErrorKind::InvalidArgument, "radii list is empty");
  std::vector<int> out;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] * ctx.n() >= 2.0 - 1e-9)) {
      throw Error(ErrorKind::InvalidArgument, fmt::format("radius {} is below 2/n = {}", radii[i], 2.0 / ctx.n()));
    }
    if (i > 0 && !(radii[i] < radii[i - 1])) throw Error(ErrorKind::InvalidArgument, "radii must be decreasing");
    out.push_back(static_cast<int>(std::lround(radii[i] * ctx.n())));
  }
  return out;
}

}  // namespace

FwtProbe realize(const ProbeSpec& spec, const GridContext& ctx) {
  return {spec.label, realize(spec.h1, ctx), realize(spec.h2, ctx)};
}

double fwt_integrand(const OperatorMatrix& op, const SimplexPoint& times, const FwtProbe& probe) {
  const auto incs = increment_images(op, times);
  const GramDeterminant g = checked_gram(op, incs);
  const OrthonormalFrame frame = orthonormalize(incs);
  const double q = projection_norm_sq(frame, probe.h1) + projection_norm_sq(frame, probe.h2);
  return std::pow(kTwoPi, -(times.k() - 1)) * std::exp(-0.5 * q) / g.value;
}

double regularized_integrand_thm1(const OperatorMatrix& op, const SimplexPoint& times, const GridFunction& h) {
  const auto incs = increment_images(op, times);
  const GramDeterminant g = checked_gram(op, incs);
  const std::vector<double> terms = subset_projection_terms(incs, h);
  CompensatedSum s;
  for (std::size_t mask = 0; mask < terms.size(); ++mask) {
    const double v = std::expm1(-0.5 * terms[mask]);
    s.add(std::popcount(mask) % 2 == 0 ? v : -v);
  }
  return s.value() / g.value;
}

double thm2_integrand(const OperatorMatrix& op, double t1, double t2, const GridFunction& h) {
  if (!(t1 < t2)) throw Error(ErrorKind::InvalidArgument, fmt::format("thm2 needs t1 < t2, got ({}, {})", t1, t2));
  const int j1 = op.ctx().snap(t1);
  const int j2 = op.ctx().snap(t2);
  if (j1 == j2) throw Error(ErrorKind::DegenerateInterval, fmt::format("({}, {}) snaps to one node", t1, t2));
  if (is_kernel_indicator(op, j1, j2, kKernelIndicatorTolerance)) {
    throw Error(ErrorKind::KernelIndicator, fmt::format("A 1_[{}, {}] vanishes", op.ctx().node(j1), op.ctx().node(j2)));
  }
  const GridFunction g = op.interval_image(j1, j2);
  const double gg = g.norm_sq();
  const double b = inner(h, g);
  return std::expm1(-0.5 * b * b / gg) / gg;
}

QuadratureReport theorem3_integral(const OperatorMatrix& op, int k, double delta, const Exec& exec) {
  require_conditions(op);
  QuadratureReport r = theorem3_shell(k, delta);
  r.levels.push_back(
      integrate_level(op, build_simplex_rule(op.ctx().n(), k, delta), Integrand::InverseGram, nullptr, nullptr, exec));
  finish(r);
  return r;
}

QuadratureReport theorem3_integral(const OperatorSpec& spec, int k, double delta, const std::vector<int>& levels,
                                   const Exec& exec) {
  require_levels(levels);
  QuadratureReport r = theorem3_shell(k, delta);
  std::size_t kernel_dim = 0;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const OperatorMatrix op = build_operator(spec, GridContext(levels[i]));
    require_conditions(op);
    if (i > 0 && op.kernel_frame().size() != kernel_dim) {
      throw Error(ErrorKind::ConditionsViolated,
                  fmt::format("kernel dimension changes from {} to {} between n={} and n={}", kernel_dim,
                              op.kernel_frame().size(), levels[i - 1], levels[i]));
    }
    kernel_dim = op.kernel_frame().size();
    r.levels.push_back(
        integrate_level(op, build_simplex_rule(levels[i], k, delta), Integrand::InverseGram, nullptr, nullptr, exec));
  }
  finish(r);
  return r;
}

double wiener_inverse_gram_integral_k2(double delta) { return -std::log(delta) - (1.0 - delta); }

std::string to_string(const FwtMode& mode) {
  switch (mode.kind) {
    case FwtMode::Kind::Thm1FullSimplex: return "thm1_full_simplex";
    case FwtMode::Kind::Thm2K2: return "thm2_k2";
    case FwtMode::Kind::Eq3Delta: return fmt::format("eq3_delta({})", mode.delta);
  }
  return "unknown";
}

QuadratureReport regularized_fwt_quadrature(const OperatorMatrix& op, int k, const FwtProbe& probe,
                                            const FwtMode& mode, const Exec& exec) {
  QuadratureReport r = fwt_shell(k, mode);
  r.levels.push_back(fwt_level(op, k, probe, mode, exec));
  finish(r);
  return r;
}

QuadratureReport regularized_fwt_quadrature(const OperatorSpec& spec, int k, const ProbeSpec& probe,
                                            const FwtMode& mode, const std::vector<int>& levels,
                                            const Exec& exec) {
  require_levels(levels);
  QuadratureReport r = fwt_shell(k, mode);
  for (int n : levels) {
    const GridContext ctx(n);
    const OperatorMatrix op = build_operator(spec, ctx);
    r.levels.push_back(fwt_level(op, k, realize(probe, ctx), mode, exec));
  }
  finish(r);
  return r;
}

double lemma2_pairing(const GridFunction& h, NodePair t0, int a, int b) {
  const GridContext& ctx = h.ctx();
  const GridFunction d = indicator_nodes(ctx, a, b) - indicator_nodes(ctx, t0.j1, t0.j2);
  const double dd = d.norm_sq();
  if (dd == 0.0) throw Error(ErrorKind::DegenerateDifference, "the two indicators coincide");
  const double p = inner(h, d);
  return p * p / dd;
}

std::vector<double> lemma2_weak_convergence_scan(const GridFunction& h, std::pair<double, double> t0,
                                                 const std::vector<double>& radii) {
  const GridContext& ctx = h.ctx();
  const int n = ctx.n();
  const NodePair p0 = snap_pair(ctx, t0);
  const std::vector<int> cells = radii_in_cells(ctx, radii);
  // Prefix sums S_j = sum_{i<j} h_i make every pairing O(1).
  std::vector<double> prefix(static_cast<std::size_t>(n + 1), 0.0);
  for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + h.values()(i);
  const double base = prefix[p0.j2] - prefix[p0.j1];
  std::vector<double> out;
  for (int r : cells) {
    double best = 0.0;
    for (const auto& [a, b] : box_boundary(n, p0, r)) {
      // 1_[a,b] - 1_[j1,j2] is +-1 on the symmetric difference of the intervals.
      const double overlap = std::max(0, std::min(b, p0.j2) - std::max(a, p0.j1));
      const double sym = static_cast<double>((b - a) + (p0.j2 - p0.j1)) - 2 * overlap;
      if (sym == 0.0) throw Error(ErrorKind::DegenerateDifference, "the two indicators coincide");
      const double num = (prefix[b] - prefix[a] - base) / n;
      best = std::max(best, num * num / (sym / n));
    }
    out.push_back(best);
  }
  return out;
}

std::vector<RatioBand> lemma3_ratio_scan(const OperatorMatrix& op, std::pair<double, double> t0,
                                         const std::vector<double>& radii) {
  const GridContext& ctx = op.ctx();
  const NodePair p0 = snap_pair(ctx, t0);
  if (!is_kernel_indicator(op, p0.j1, p0.j2, kKernelIndicatorTolerance)) {
    throw Error(ErrorKind::NotAKernelIndicator,
                fmt::format("1_[{}, {}] is not in the kernel of {}", p0.t1, p0.t2, describe(op.spec())));
  }
  const std::vector<int> cells = radii_in_cells(ctx, radii);
  std::vector<RatioBand> out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    RatioBand band{radii[i], std::numeric_limits<double>::infinity(), 0.0, 0};
    for (const auto& [a, b] : box_boundary(ctx.n(), p0, cells[i])) {
      const double overlap = std::max(0, std::min(b, p0.j2) - std::max(a, p0.j1));
      const double sym = (static_cast<double>((b - a) + (p0.j2 - p0.j1)) - 2 * overlap) / ctx.n();
      const double ratio = op.increment_inner(a, b, a, b) / sym;
      band.min = std::min(band.min, ratio);
      band.max = std::max(band.max, ratio);
      ++band.points;
    }
    out.push_back(band);
  }
  return out;
}

}  // namespace silt
