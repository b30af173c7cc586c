// Acceptance suite: one line per criterion, nonzero exit when any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <fmt/core.h>

#include "silt/error.hpp"
#include "silt/experiment_config.hpp"
#include "silt/fwt_regularization.hpp"
#include "silt/integrator_process.hpp"
#include "silt/lemma_audits.hpp"
#include "silt/silt_estimators.hpp"
#include "silt_cli/cli.hpp"

namespace {

using namespace silt;
namespace fs = std::filesystem;

struct Outcome {
  bool ok = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string description;
  double budget_seconds;
  std::function<Outcome()> check;
};

const Exec kExec{static_cast<int>(std::max(1u, std::thread::hardware_concurrency()))};
constexpr std::uint64_t kSeed = 20260417;

OperatorSpec bridge() { return ProjectorComplementSpec{{ConstantFunction{1.0}}}; }
OperatorSpec generalized_bridge() { return default_config().op; }

double relative_change(double a, double b) { return std::abs(a - b) / std::abs(b); }

Outcome complement_gram_identity() {
  const SuiteResult r = lemma4_suite(kSeed, 1000);
  return {r.passed && r.instances == 1000 && r.worst < 1e-10,
          fmt::format("{} instances, worst residual {:.2e} < 1e-10", r.instances, r.worst)};
}

Outcome gram_lower_bound() {
  const SuiteResult r = lemma5_suite(kSeed, 1000);
  return {r.passed && r.worst >= -1e-10,
          fmt::format("{} instances (incl. exact scaled identities), worst margin {:.2e} >= -1e-10", r.instances,
                      r.worst)};
}

Outcome terminal_variances() {
  const GridContext ctx(256);
  const auto wiener = sample_paths(build_operator(IdentitySpec{}, ctx), kSeed, 10000, kExec);
  double s1 = 0, s2 = 0, s4 = 0;
  for (const auto& p : wiener) {
    const double x = p.coord1(256);
    s1 += x;
    s2 += x * x;
    s4 += x * x * x * x;
  }
  const double n = 10000;
  const double mean = s1 / n;
  const double var = s2 / n - mean * mean;
  const double se = std::sqrt((s4 / n - (s2 / n) * (s2 / n)) / n);
  const auto pinned = sample_paths(build_operator(bridge(), ctx), kSeed, 10000, kExec);
  double b2 = 0;
  for (const auto& p : pinned) b2 += p.coord1(256) * p.coord1(256);
  const double bridge_var = b2 / n;
  const double z = std::abs(var - 1.0) / se;
  return {z < 3 && bridge_var < 1e-10,
          fmt::format("Wiener var(1) = {:.4f} ({:.2f} s.e. from 1), bridge var(1) = {:.1e}", var, z, bridge_var)};
}

Outcome wiener_inverse_gram() {
  const QuadratureReport r = theorem3_integral(IdentitySpec{}, 2, 0.1, {64, 128, 256}, kExec);
  const double exact = wiener_inverse_gram_integral_k2(0.1);
  const double err = relative_change(r.value, exact);
  return {err < 1e-3, fmt::format("value {:.6f} vs -ln(0.1) - 0.9 = {:.6f}, relative error {:.1e}", r.value, exact,
                                  err)};
}

Outcome kernel_case_refinement() {
  bool ok = true;
  std::string detail;
  for (const auto& [k, levels] : {std::pair{2, std::vector<int>{64, 128, 256}}, std::pair{3, std::vector<int>{32, 64, 128}}}) {
    const QuadratureReport r = theorem3_integral(generalized_bridge(), k, 0.1, levels, kExec);
    detail += fmt::format("k={}:", k);
    for (std::size_t i = 1; i < r.levels.size(); ++i) {
      const double c = relative_change(r.levels[i].value, r.levels[i - 1].value);
      ok = ok && c < 0.01 && std::isfinite(r.levels[i].value);
      detail += fmt::format(" {}->{} {:.2f}%", r.levels[i - 1].n, r.levels[i].n, 100 * c);
    }
    detail += "; ";
  }
  return {ok, detail + "all < 1%"};
}

Outcome moment_consistency() {
  const OperatorMatrix op = build_operator(IdentitySpec{}, GridContext(64));
  const MonteCarloSilt mc = monte_carlo_silt(op, 0.1, 2, 0.2, kSeed, 10000, kExec);
  const double m1 = expected_silt(op, 0.1, 2, 0.2, kExec);
  const double m2 = second_moment(op, 0.1, 0.1, 2, 0.2, {false, kExec});
  const double z1 = std::abs(mc.mean - m1) / mc.std_error;
  const double z2 = std::abs(mc.mean_sq - m2) / mc.std_error_sq;
  return {z1 < 3 && z2 < 3, fmt::format("mean {:.2f} s.e., second moment {:.2f} s.e. from quadrature", z1, z2)};
}

Outcome cauchy_diagnostic_decreases() {
  bool ok = true;
  std::string detail;
  for (const auto& [name, spec] : {std::pair{"Wiener", OperatorSpec{IdentitySpec{}}},
                                   std::pair{"generalized bridge", generalized_bridge()}}) {
    const OperatorMatrix op = build_operator(spec, GridContext(64));
    const MomentTable t = cauchy_diagnostic(op, {0.2, 0.1, 0.05, 0.025}, 2, 0.2, {false, kExec});
    detail += fmt::format("{}:", name);
    for (std::size_t i = 0; i < t.cauchy_increments.size(); ++i) {
      const double v = t.cauchy_increments[i];
      ok = ok && v >= 0 && (i == 0 || v < t.cauchy_increments[i - 1]);
      detail += fmt::format(" {:.3e}", v);
    }
    detail += "; ";
  }
  return {ok, detail + "required: nonnegative and strictly decreasing"};
}

Outcome regularization_identities() {
  std::mt19937_64 rng(kSeed);
  const GridContext ctx(32);
  std::size_t zero_checks = 0, nonzero = 0, pairs = 0;
  double worst = 0.0;
  const std::vector<OperatorSpec> specs{IdentitySpec{}, bridge(), generalized_bridge(), CompactPerturbationSpec{}};
  std::uniform_int_distribution<int> node(0, 32);
  std::normal_distribution<double> g;
  for (const auto& spec : specs) {
    const OperatorMatrix op = build_operator(spec, ctx);
    for (int k = 2; k <= 4; ++k) {
      for (int trial = 0; trial < 200; ++trial) {
        std::vector<int> t(static_cast<std::size_t>(k));
        for (auto& v : t) v = node(rng);
        std::sort(t.begin(), t.end());
        if (std::adjacent_find(t.begin(), t.end()) != t.end()) continue;
        try {
          const double v = regularized_integrand_thm1(op, SimplexPoint{32, t, 0.0}, GridFunction(ctx));
          ++zero_checks;
          nonzero += v != 0.0;
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::SingularGram) throw;
        }
      }
    }
  }
  while (pairs < 10000) {
    const OperatorMatrix op = build_operator(specs[pairs % specs.size()], ctx);
    for (int rep = 0; rep < 100; ++rep, ++pairs) {
      int a = node(rng), b = node(rng);
      while (a == b || is_kernel_indicator(op, std::min(a, b), std::max(a, b))) {
        a = node(rng);
        b = node(rng);
      }
      if (a > b) std::swap(a, b);
      Eigen::VectorXd h(32);
      for (int i = 0; i < 32; ++i) h(i) = g(rng);
      const GridFunction hf(ctx, h);
      const double v1 = regularized_integrand_thm1(op, SimplexPoint{32, {a, b}, 0.0}, hf);
      const double v2 = thm2_integrand(op, ctx.node(a), ctx.node(b), hf);
      worst = std::max(worst, std::abs(v1 + v2) / std::max(1.0, std::abs(v2)));
    }
  }
  return {nonzero == 0 && worst < 1e-12,
          fmt::format("zero probe exact on {} tuples (k=2..4), pair forms agree up to sign on {} tuples, worst {:.1e}",
                      zero_checks, pairs, worst)};
}

Outcome kernel_ratio_scan() {
  const OperatorMatrix op = build_operator(generalized_bridge(), GridContext(512));
  const auto bands = lemma3_ratio_scan(op, {0.0, 0.5}, {0.2, 0.1, 0.05});
  bool monotone = true;
  double prev = std::numeric_limits<double>::infinity();
  std::string detail;
  for (const auto& b : bands) {
    const double dev = std::max(std::abs(b.min - 1), std::abs(b.max - 1));
    monotone = monotone && dev < prev;
    prev = dev;
    detail += fmt::format("r={}: [{:.3f}, {:.3f}] ", b.radius, b.min, b.max);
  }
  const auto& fin = bands.back();
  const bool in_band = fin.min >= 0.85 && fin.max <= 1.15;
  return {in_band && monotone,
          detail + fmt::format("; finest in [0.85, 1.15]: {}, deviation decreasing: {}", in_band ? "yes" : "no",
                               monotone ? "yes" : "no")};
}

Outcome weak_convergence_scan() {
  const GridContext ctx(512);
  const auto v = lemma2_weak_convergence_scan(make_indicator(ctx, 0, 1), {0.25, 0.75}, {0.2, 0.1, 0.05, 0.025});
  bool ok = v.back() < 0.2 * v.front();
  std::string detail = "maxima";
  for (std::size_t i = 0; i < v.size(); ++i) {
    ok = ok && (i == 0 || v[i] < v[i - 1]);
    detail += fmt::format(" {:.4f}", v[i]);
  }
  return {ok, detail + fmt::format(", finest/first = {:.3f} < 0.2", v.back() / v.front())};
}

Outcome fbm_self_similarity() {
  const OperatorMatrix op = build_operator(FbmVolterraSpec{0.75}, GridContext(256));
  Eigen::MatrixXd x(13, 2);
  Eigen::VectorXd y(13);
  for (int j = 4; j <= 16; ++j) {
    x(j - 4, 0) = std::log(j / 16.0);
    x(j - 4, 1) = 1.0;
    y(j - 4) = std::log(op.interval_image(0, 16 * j).norm_sq());
  }
  const double slope = x.colPivHouseholderQr().solve(y)(0);
  return {std::abs(slope - 1.5) < 0.03, fmt::format("fitted exponent {:.4f} vs 1.5 (tolerance 0.03)", slope)};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome cli_reproducibility() {
  const fs::path root = fs::temp_directory_path() / "silt_acceptance_repro";
  fs::remove_all(root);
  std::size_t compared = 0;
  std::string mismatch;
  std::ostringstream out, err;
  for (const std::string cmd : {"verify", "convergence", "fwt", "sample"}) {
    for (const auto& [dir, threads] : {std::pair{"a", "1"}, std::pair{"b", "4"}}) {
      const int code = cli::run({cmd, "--out", (root / dir).string(), "--threads", threads}, out, err);
      if (code != 0) return {false, fmt::format("silt {} exited with {}: {}", cmd, code, err.str())};
    }
    const fs::path a = root / "a" / config_hash(default_config());
    const fs::path b = root / "b" / config_hash(default_config());
    for (const auto& entry : fs::directory_iterator(a)) {
      ++compared;
      if (read_file(entry.path()) != read_file(b / entry.path().filename())) mismatch += entry.path().filename().string() + " ";
    }
  }
  fs::remove_all(root);
  return {compared > 0 && mismatch.empty(),
          mismatch.empty() ? fmt::format("verify/convergence/fwt/sample repeated (1 vs 4 threads): {} files identical",
                                         compared)
                           : "differing files: " + mismatch};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "complement Gram identity on random instances", 10, complement_gram_identity},
      {2, "Gram lower bound under invertible operators", 10, gram_lower_bound},
      {3, "terminal variance: Wiener equals 1, bridge pinned", 30, terminal_variances},
      {4, "Wiener pair inverse-Gram integral matches closed form", 5, wiener_inverse_gram},
      {5, "inverse-Gram integral stable under refinement with a kernel", 300, kernel_case_refinement},
      {6, "Monte Carlo moments match exact first and second moments", 300, moment_consistency},
      {7, "L2 Cauchy increments nonnegative and decreasing", 600, cauchy_diagnostic_decreases},
      {8, "regularized integrands: zero probe exact, pair forms agree", 30, regularization_identities},
      {9, "kernel indicator ratio approaches 1 on shrinking boxes", 60, kernel_ratio_scan},
      {10, "weak convergence of indicator differences", 60, weak_convergence_scan},
      {11, "fBM kernel self-similarity exponent", 10, fbm_self_similarity},
      {12, "CLI runs are byte-reproducible", 600, cli_reproducibility},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = secs < c.budget_seconds;
    const bool pass = o.ok && in_budget;
    failed += !pass;
    std::cout << fmt::format("[{}] {:2d} {} ({:.2f} s{}) :: {}\n", pass ? "PASS" : "FAIL", c.id, c.description, secs,
                             in_budget ? "" : fmt::format(", over {} s budget", c.budget_seconds), o.detail)
              << std::flush;
  }
  std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - static_cast<std::size_t>(failed),
                           criteria.size());
  return failed == 0 ? 0 : 1;
}
