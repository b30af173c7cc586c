#include "silt/silt_estimators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <ostream>

#include <fmt/core.h>

#include "silt/error.hpp"
#include "small_linalg.hpp"

namespace silt {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_positive_eps(double eps) {
  if (!(eps > 0) || !std::isfinite(eps)) {
    throw Error(ErrorKind::NonpositiveEps, fmt::format("eps must be positive and finite, got {}", eps));
  }
}

void require_nonempty(int n, int k, double delta) {
  if (k < 2) throw Error(ErrorKind::InvalidArgument, fmt::format("k must be >= 2, got {}", k));
  if (!(delta >= 0)) throw Error(ErrorKind::InvalidArgument, fmt::format("delta must be >= 0, got {}", delta));
  if ((k - 1) * delta >= 1.0) {
    throw Error(ErrorKind::EmptySimplex, fmt::format("(k-1)*delta = {} leaves no room in [0,1]", (k - 1) * delta));
  }
  (void)n;
}

// Gram matrices of the increments of every rule tuple, m x m row-major each.
std::vector<double> own_grams(const OperatorMatrix& op, const SimplexRule& rule) {
  const int m = rule.k() - 1;
  std::vector<double> out(rule.size() * static_cast<std::size_t>(m * m));
  for (std::size_t t = 0; t < rule.size(); ++t) {
    const auto nd = rule.nodes(t);
    double* g = out.data() + t * static_cast<std::size_t>(m * m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j <= i; ++j) {
        g[i * m + j] = g[j * m + i] = op.increment_inner(nd[i], nd[i + 1], nd[j], nd[j + 1]);
      }
    }
  }
  return out;
}

}  // namespace

double gaussian_kernel(double z1, double z2, double eps) {
  require_positive_eps(eps);
  return std::exp(-(z1 * z1 + z2 * z2) / (2 * eps)) / (kTwoPi * eps);
}

double gaussian_kernel_1d(double z, double eps) {
  require_positive_eps(eps);
  return std::exp(-z * z / (2 * eps)) / std::sqrt(kTwoPi * eps);
}

double kernel_product_expectation_1d(const Eigen::MatrixXd& c, double eps) {
  require_positive_eps(eps);
  const auto m = c.rows();
  const Eigen::MatrixXd shifted = c + eps * Eigen::MatrixXd::Identity(m, m);
  Eigen::LLT<Eigen::MatrixXd> llt(shifted);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::InvalidArgument, "increment covariance is not PSD");
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) log_det += 2 * std::log(llt.matrixL()(i, i));
  return std::exp(-0.5 * static_cast<double>(m) * std::log(kTwoPi) - 0.5 * log_det);
}

double kernel_product_expectation(const Eigen::MatrixXd& c, double eps) {
  const double v = kernel_product_expectation_1d(c, eps);
  return v * v;
}

double approx_silt(const PathSample& path, double eps, int k, double delta) {
  const int n = path.ctx.n();
  require_nonempty(n, k, delta);
  if (delta * n < 2.0 - 1e-9) {
    throw Error(ErrorKind::EmptySimplex, fmt::format("delta = {} is below two cells (2/n = {})", delta, 2.0 / n));
  }
  return approx_silt(path, eps, build_simplex_rule(n, k, delta));
}

double approx_silt(const PathSample& path, double eps, const SimplexRule& rule) {
  require_positive_eps(eps);
  const int n = path.ctx.n();
  if (rule.n() != n) throw Error(ErrorKind::InvalidArgument, "simplex rule and path grids differ");
  const int k = rule.k();
  // Pair kernel values, filled lazily.
  std::vector<double> pair(static_cast<std::size_t>((n + 1) * (n + 1)), -1.0);
  const auto kern = [&](int a, int b) {
    double& v = pair[static_cast<std::size_t>(a * (n + 1) + b)];
    if (v < 0) {
      const double d1 = path.coord1(b) - path.coord1(a);
      const double d2 = path.coord2(b) - path.coord2(a);
      v = std::exp(-(d1 * d1 + d2 * d2) / (2 * eps)) / (kTwoPi * eps);
    }
    return v;
  };
  CompensatedSum sum;
  for (std::size_t t = 0; t < rule.size(); ++t) {
    const auto nd = rule.nodes(t);
    double prod = rule.weight(t);
    for (int i = 0; i + 1 < k; ++i) prod *= kern(nd[i], nd[i + 1]);
    sum.add(prod);
  }
  return sum.value();
}

double expected_silt(const OperatorMatrix& op, double eps, int k, double delta, const Exec& exec) {
  require_positive_eps(eps);
  require_nonempty(op.ctx().n(), k, delta);
  const SimplexRule rule = build_simplex_rule(op.ctx().n(), k, delta);
  const int m = k - 1;
  const double norm = std::pow(kTwoPi, -m);
  const auto chunks = map_chunks<double>(rule.size(), 4096, exec, [&](std::size_t, std::size_t b, std::size_t e) {
    std::array<double, detail::kMaxSmall * detail::kMaxSmall> a{};
    CompensatedSum s;
    for (std::size_t t = b; t < e; ++t) {
      const auto nd = rule.nodes(t);
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j <= i; ++j) {
          a[i * m + j] = a[j * m + i] = op.increment_inner(nd[i], nd[i + 1], nd[j], nd[j + 1]);
        }
        a[i * m + i] += eps;
      }
      const double det = detail::spd_det_inplace(a.data(), m);
      if (det > 0) s.add(rule.weight(t) * norm / det);
    }
    return s.value();
  });
  CompensatedSum total;
  for (double c : chunks) total.add(c);
  return total.value();
}

Eigen::MatrixXd second_moment_table(const OperatorMatrix& op, const std::vector<double>& eps, int k, double delta,
                                    const SecondMomentOptions& opts) {
  if (eps.empty()) throw Error(ErrorKind::InvalidArgument, "second_moment_table needs at least one eps");
  for (double e : eps) require_positive_eps(e);
  require_nonempty(op.ctx().n(), k, delta);
  if (k > 3 && !opts.expensive) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("second moment for k = {} > 3 requires the expensive flag", k));
  }
  if (2 * (k - 1) > detail::kMaxSmall) throw Error(ErrorKind::InvalidArgument, "k too large for the second moment");
  const SimplexRule rule = build_simplex_rule(op.ctx().n(), k, delta);
  const int m = k - 1;
  const int mm = 2 * m;
  const std::vector<double> own = own_grams(op, rule);
  const std::size_t p_count = eps.size();
  // Flattened upper triangle of (p, q) pairs, p <= q.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t p = 0; p < p_count; ++p) {
    for (std::size_t q = p; q < p_count; ++q) pairs.emplace_back(p, q);
  }
  const double norm = std::pow(kTwoPi, -mm);

  const auto chunks = map_chunks<std::vector<double>>(
      rule.size(), 16, opts.exec, [&](std::size_t, std::size_t b, std::size_t e) {
        std::vector<CompensatedSum> sums(pairs.size());
        std::array<double, detail::kMaxSmall * detail::kMaxSmall> base{};
        std::array<double, detail::kMaxSmall * detail::kMaxSmall> work{};
        const auto inv_det = [&](double x, double y) {
          work = base;
          for (int i = 0; i < m; ++i) {
            work[i * mm + i] += x;
            work[(m + i) * mm + m + i] += y;
          }
          const double d = detail::spd_det_inplace(work.data(), mm);
          return d > 0 ? 1.0 / d : 0.0;
        };
        for (std::size_t a = b; a < e; ++a) {
          const auto na = rule.nodes(a);
          const double* ga = own.data() + a * static_cast<std::size_t>(m * m);
          CompensatedSum* out = sums.data();
          std::vector<CompensatedSum> row(pairs.size());
          for (std::size_t s = a; s < rule.size(); ++s) {
            const auto ns = rule.nodes(s);
            const double* gs = own.data() + s * static_cast<std::size_t>(m * m);
            // Block matrix [[G_a, X], [X^T, G_s]]; tuple a precedes s in rule
            // order, so placing a first is the canonical block order.
            for (int i = 0; i < m; ++i) {
              for (int j = 0; j < m; ++j) {
                base[i * mm + j] = ga[i * m + j];
                base[(m + i) * mm + m + j] = gs[i * m + j];
                const double x = op.increment_inner(na[i], na[i + 1], ns[j], ns[j + 1]);
                base[i * mm + m + j] = x;
                base[(m + j) * mm + i] = x;
              }
            }
            const double w = rule.weight(a) * rule.weight(s) * norm;
            // Off-diagonal pairs stand for both (a, s) and (s, a); the mirror
            // term equals the block determinant with the two eps swapped.
            for (std::size_t r = 0; r < pairs.size(); ++r) {
              const double e1 = eps[pairs[r].first];
              const double e2 = eps[pairs[r].second];
              double term;
              if (s == a) {
                // Both blocks carry the same nodes; order them by eps.
                term = inv_det(std::min(e1, e2), std::max(e1, e2));
              } else {
                term = inv_det(e1, e2) + inv_det(e2, e1);
              }
              row[r].add(w * term);
            }
          }
          for (std::size_t r = 0; r < pairs.size(); ++r) out[r].add(row[r].value());
        }
        std::vector<double> res(pairs.size());
        for (std::size_t r = 0; r < pairs.size(); ++r) res[r] = sums[r].value();
        return res;
      });

  Eigen::MatrixXd table(static_cast<Eigen::Index>(p_count), static_cast<Eigen::Index>(p_count));
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    CompensatedSum total;
    for (const auto& c : chunks) total.add(c[r]);
    const double v = total.value();
    const auto p = static_cast<Eigen::Index>(pairs[r].first);
    const auto q = static_cast<Eigen::Index>(pairs[r].second);
    table(p, q) = v;
    table(q, p) = v;
  }
  return table;
}

double second_moment(const OperatorMatrix& op, double eps1, double eps2, int k, double delta,
                     const SecondMomentOptions& opts) {
  return second_moment_table(op, {eps1, eps2}, k, delta, opts)(0, 1);
}

std::vector<double> rosen_center(const std::vector<double>& values) {
  if (values.empty()) throw Error(ErrorKind::InvalidArgument, "rosen_center needs a nonempty list");
  const double count = static_cast<double>(values.size());
  CompensatedSum s;
  for (double v : values) s.add(v);
  const double mean = s.value() / count;
  std::vector<double> out(values.size());
  CompensatedSum r;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = values[i] - mean;
    r.add(out[i]);
  }
  const double residual = r.value() / count;
  for (double& v : out) v -= residual;
  return out;
}

MomentTable cauchy_diagnostic(const OperatorMatrix& op, const std::vector<double>& eps_ladder, int k, double delta,
                              const SecondMomentOptions& opts) {
  if (eps_ladder.size() < 3) throw Error(ErrorKind::InvalidArgument, "eps ladder needs at least 3 entries");
  for (std::size_t i = 0; i < eps_ladder.size(); ++i) {
    require_positive_eps(eps_ladder[i]);
    if (i > 0 && eps_ladder[i] > eps_ladder[i - 1]) {
      throw Error(ErrorKind::InvalidArgument, "eps ladder must be non-increasing");
    }
  }
  MomentTable t;
  t.epsilons = eps_ladder;
  t.n = op.ctx().n();
  t.k = k;
  t.delta = delta;
  t.cross_moments = second_moment_table(op, eps_ladder, k, delta, opts);
  for (double e : eps_ladder) t.first_moments.push_back(expected_silt(op, e, k, delta, opts.exec));
  const auto& m = t.cross_moments;
  for (Eigen::Index i = 0; i + 1 < m.rows(); ++i) {
    t.cauchy_increments.push_back(m(i, i) - 2 * m(i, i + 1) + m(i + 1, i + 1));
  }
  t.tuples = build_simplex_rule(t.n, k, delta).size();
  t.simplex_volume = simplex_volume(k, delta);
  return t;
}

void write_moment_csv(std::ostream& out, const MomentTable& table) {
  out << "eps1,eps2,moment,cauchy_increment\n";
  const auto& m = table.cross_moments;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::string inc;
      if (j == i + 1) inc = fmt::format("{:.17g}", table.cauchy_increments[static_cast<std::size_t>(i)]);
      out << fmt::format("{:.17g},{:.17g},{:.17g},{}\n", table.epsilons[static_cast<std::size_t>(i)],
                         table.epsilons[static_cast<std::size_t>(j)], m(i, j), inc);
    }
  }
}

MonteCarloSilt monte_carlo_silt(const OperatorMatrix& op, double eps, int k, double delta, std::uint64_t seed,
                                std::size_t count, const Exec& exec) {
  require_positive_eps(eps);
  if (count < 2) throw Error(ErrorKind::InvalidArgument, "monte_carlo_silt needs at least 2 paths");
  const int n = op.ctx().n();
  require_nonempty(n, k, delta);
  if (delta * n < 2.0 - 1e-9) {
    throw Error(ErrorKind::EmptySimplex, fmt::format("delta = {} is below two cells (2/n = {})", delta, 2.0 / n));
  }
  const SimplexRule rule = build_simplex_rule(n, k, delta);
  const PathSampler sampler(op);
  struct Acc {
    double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
  };
  const auto chunks = map_chunks<Acc>(count, 128, exec, [&](std::size_t, std::size_t b, std::size_t e) {
    CompensatedSum s1, s2, s3, s4;
    for (std::size_t i = b; i < e; ++i) {
      const double v = approx_silt(sampler.sample(seed, static_cast<std::uint32_t>(i)), eps, rule);
      const double v2 = v * v;
      s1.add(v);
      s2.add(v2);
      s3.add(v2 * v);
      s4.add(v2 * v2);
    }
    return Acc{s1.value(), s2.value(), s3.value(), s4.value()};
  });
  CompensatedSum s1, s2, s3, s4;
  for (const auto& c : chunks) {
    s1.add(c.s1);
    s2.add(c.s2);
    s3.add(c.s3);
    s4.add(c.s4);
  }
  (void)s3;
  const double nn = static_cast<double>(count);
  MonteCarloSilt out;
  out.paths = count;
  out.mean = s1.value() / nn;
  out.mean_sq = s2.value() / nn;
  const double var1 = std::max(s2.value() / nn - out.mean * out.mean, 0.0) * nn / (nn - 1);
  const double var2 = std::max(s4.value() / nn - out.mean_sq * out.mean_sq, 0.0) * nn / (nn - 1);
  out.std_error = std::sqrt(var1 / nn);
  out.std_error_sq = std::sqrt(var2 / nn);
  return out;
}

}  // namespace silt
