#include "silt/simplex_rule.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>

#include <fmt/core.h>

#include "silt/error.hpp"

namespace silt {

namespace {

// Polynomial in absolute coordinate x, coefficients in increasing degree.
using Poly = std::vector<double>;

struct Piece {
  double a;
  double b;
  Poly c;
};

double polyval(const Poly& c, double x) {
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
  return v;
}

Poly antiderivative(const Poly& c) {
  Poly out(c.size() + 1, 0.0);
  for (std::size_t i = 0; i < c.size(); ++i) out[i + 1] = c[i] / static_cast<double>(i + 1);
  return out;
}

// q(x) = p(x + s)
Poly shifted(const Poly& p, double s) {
  Poly out(p.size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    double binom = 1.0;
    double spow = 1.0;
    // p_i (x + s)^i = p_i sum_j C(i,j) s^(i-j) x^j, walking j downwards from i.
    for (std::size_t m = 0; m <= i; ++m) {
      const std::size_t j = i - m;
      out[j] += p[i] * binom * spow;
      binom = binom * static_cast<double>(j) / static_cast<double>(m + 1);
      spow *= s;
    }
  }
  return out;
}

// Running antiderivative across the pieces; returns the pieces and the total.
std::vector<Piece> cumulative(const std::vector<Piece>& f, double& total) {
  std::vector<Piece> out;
  out.reserve(f.size());
  double acc = 0.0;
  for (const auto& p : f) {
    Poly ic = antiderivative(p.c);
    ic[0] += acc - polyval(ic, p.a);
    acc = polyval(ic, p.b);
    out.push_back({p.a, p.b, std::move(ic)});
  }
  total = acc;
  return out;
}

// Given the marginal density F of x_{i+1} on [lo, hi], returns the density of
// x_i on [nlo, nhi]: G(x) = integral of F over [max(x + c, lo), hi].
std::vector<Piece> chain_step(const std::vector<Piece>& f, double lo, double hi, double c, double nlo,
                              double nhi) {
  double total = 0.0;
  const std::vector<Piece> phi = cumulative(f, total);
  std::vector<double> bps{nlo, nhi};
  for (const auto& p : phi) {
    for (double v : {p.a - c, p.b - c}) {
      if (v > nlo && v < nhi) bps.push_back(v);
    }
  }
  std::sort(bps.begin(), bps.end());
  bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
  std::vector<Piece> out;
  for (std::size_t i = 0; i + 1 < bps.size(); ++i) {
    const double a = bps[i];
    const double b = bps[i + 1];
    const double m = 0.5 * (a + b) + c;
    Poly coef;
    if (m <= lo) {
      coef = {total};
    } else if (m >= hi) {
      coef = {0.0};
    } else {
      const Piece* hit = &phi.back();
      for (const auto& p : phi) {
        if (p.a <= m && m <= p.b) {
          hit = &p;
          break;
        }
      }
      coef = shifted(hit->c, c);
      for (auto& x : coef) x = -x;
      coef[0] += total;
    }
    out.push_back({a, b, std::move(coef)});
  }
  return out;
}

}  // namespace

double chain_box_volume(std::span<const double> lo, std::span<const double> hi, std::span<const double> c) {
  const std::size_t k = lo.size();
  if (k == 0 || hi.size() != k || c.size() + 1 != k) {
    throw Error(ErrorKind::InvalidArgument, "chain_box_volume: inconsistent sizes");
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (!(hi[i] >= lo[i])) return 0.0;
  }
  std::vector<Piece> f{{lo[k - 1], hi[k - 1], Poly{1.0}}};
  for (std::size_t i = k - 1; i-- > 0;) f = chain_step(f, lo[i + 1], hi[i + 1], c[i], lo[i], hi[i]);
  double total = 0.0;
  cumulative(f, total);
  return std::max(total, 0.0);
}

bool SimplexPoint::strictly_increasing() const noexcept {
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (nodes[i] <= nodes[i - 1]) return false;
  }
  return true;
}

bool SimplexPoint::in_delta_simplex() const noexcept {
  if (nodes.empty() || nodes.front() < 0 || nodes.back() > n) return false;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (static_cast<double>(nodes[i] - nodes[i - 1]) < delta * n - 1e-9) return false;
  }
  return true;
}

SimplexPoint make_simplex_point(const GridContext& ctx, std::span<const double> times, double delta) {
  if (times.size() < 2) throw Error(ErrorKind::InvalidArgument, "a simplex point needs k >= 2 times");
  SimplexPoint p{ctx.n(), {}, delta};
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0 && times[i] < times[i - 1]) {
      throw Error(ErrorKind::InvalidArgument, fmt::format("times not sorted at position {}", i));
    }
    p.nodes.push_back(ctx.snap(times[i]));
  }
  return p;
}

double simplex_volume(int k, double delta) {
  const double free = 1.0 - (k - 1) * delta;
  if (free <= 0) return 0.0;
  return std::pow(free, k) / std::tgamma(k + 1.0);
}

SimplexPoint SimplexRule::point(std::size_t i) const {
  const auto ns = nodes(i);
  return SimplexPoint{n_, std::vector<int>(ns.begin(), ns.end()), delta_};
}

SimplexRule build_simplex_rule(int n, int k, double delta) {
  if (n < 2) throw Error(ErrorKind::InvalidArgument, fmt::format("simplex rule needs n >= 2, got {}", n));
  if (k < 2 || k > 16) throw Error(ErrorKind::InvalidArgument, fmt::format("simplex rule needs 2 <= k <= 16, got {}", k));
  if (!(delta >= 0) || !std::isfinite(delta)) {
    throw Error(ErrorKind::InvalidArgument, fmt::format("delta must be finite and >= 0, got {}", delta));
  }
  if ((k - 1) * delta >= 1.0) {
    throw Error(ErrorKind::EmptySimplex, fmt::format("(k-1)*delta = {} >= 1", (k - 1) * delta));
  }
  SimplexRule rule;
  rule.n_ = n;
  rule.k_ = k;
  rule.delta_ = delta;

  const double dn = delta * n;
  const int d_cells = std::max(static_cast<int>(std::ceil(dn - 1e-9)), 0);
  // Gaps below g0 force x_{i+1} - x_i > 1 inside the cube: empty.
  const int g0 = std::max(d_cells - 1, 0);
  const double cell_volume = std::pow(static_cast<double>(n), -k);
  std::unordered_map<std::uint64_t, double> memo;

  std::vector<int> t(static_cast<std::size_t>(k));
  std::vector<double> lo(static_cast<std::size_t>(k)), hi(static_cast<std::size_t>(k)),
      c(static_cast<std::size_t>(k - 1));

  const auto weight_of = [&]() {
    // Gap classes beyond 2 leave the chain constraint inactive on the cube.
    std::uint64_t key = (t.front() == 0 ? 1u : 0u) | (t.back() == n ? 2u : 0u);
    for (int i = 0; i + 1 < k; ++i) {
      const auto cls = static_cast<std::uint64_t>(std::min(t[i + 1] - t[i] - g0, 3));
      key |= cls << (2 + 2 * i);
    }
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    for (int i = 0; i < k; ++i) {
      lo[i] = -0.5;
      hi[i] = 0.5;
    }
    if (t.front() == 0) lo[0] = 0.0;
    if (t.back() == n) hi[k - 1] = 0.0;
    for (int i = 0; i + 1 < k; ++i) c[i] = dn - (t[i + 1] - t[i]);
    const double w = chain_box_volume(lo, hi, c) * cell_volume;
    memo.emplace(key, w);
    return w;
  };

  const auto recurse = [&](auto&& self, int depth) -> void {
    if (depth == k) {
      const double w = weight_of();
      if (w > 1e-13 * cell_volume) {
        rule.nodes_.insert(rule.nodes_.end(), t.begin(), t.end());
        rule.weights_.push_back(w);
      }
      return;
    }
    const int start = depth == 0 ? 0 : t[depth - 1] + g0;
    const int stop = n - (k - 1 - depth) * g0;
    for (int j = start; j <= stop; ++j) {
      t[depth] = j;
      self(self, depth + 1);
    }
  };
  recurse(recurse, 0);
  rule.distinct_weights_ = memo.size();
  if (rule.weights_.empty()) {
    throw Error(ErrorKind::EmptySimplex, fmt::format("no node tuples in the delta-simplex (n={}, k={}, delta={})", n, k, delta));
  }
  return rule;
}

}  // namespace silt
