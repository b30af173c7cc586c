#include "silt/experiments.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <fmt/core.h>

#include "silt/error.hpp"
#include "silt/fwt_regularization.hpp"
#include "silt/integrator_process.hpp"
#include "silt/lemma_audits.hpp"
#include "silt/philox.hpp"
#include "silt/report_io.hpp"
#include "silt/silt_estimators.hpp"
#include "silt/version.hpp"

namespace silt {

using nlohmann::json;

namespace {

class RunWriter {
 public:
  RunWriter(const ExperimentConfig& config, const RunOptions& opts, RunResult& result) : result_(result) {
    const std::filesystem::path base = opts.out_dir ? *opts.out_dir : std::filesystem::path(config.output_dir);
    result_.run_dir = base / config_hash(config);
    std::filesystem::create_directories(result_.run_dir);
    write("config.json", dump_json(to_json(config)));
  }

  void write(const std::string& name, const std::string& content) {
    write_file_atomic(result_.run_dir / name, content);
    result_.files.push_back(name);
  }

 private:
  RunResult& result_;
};

ExperimentConfig prepared(ExperimentConfig config, const RunOptions& opts) {
  if (opts.seed_override) config.seed = *opts.seed_override;
  validate(config);
  return config;
}

void fail_if(RunResult& r, bool bad, std::string what) {
  if (bad) {
    r.failures.push_back(std::move(what));
    r.exit_code = kExitSuiteFailure;
  }
}

}  // namespace

json run_metadata(const ExperimentConfig& config, const std::string& command) {
  return json{{"command", command},
              {"config_hash", config_hash(config)},
              {"grid_n", config.grid_n},
              {"seed", config.seed},
              {"rng", kRngAlgorithm},
              {"version", kLibraryVersion}};
}

RunResult run_verify(ExperimentConfig config, const RunOptions& opts) {
  config = prepared(std::move(config), opts);
  RunResult result;
  RunWriter out(config, opts, result);
  const GridContext ctx(config.grid_n);
  const OperatorMatrix op = build_operator(config.op, ctx);

  std::vector<SuiteResult> suites;
  suites.push_back(lemma4_suite(config.seed));
  suites.push_back(lemma5_suite(config.seed));
  suites.push_back(operator_lemma5_suite(op, config.k, config.seed));
  suites.push_back(kernel_audit(op, config.seed));
  suites.push_back(lemma7_audit(config.op, ctx, config.k, config.seed));
  suites.push_back(lemma8_audit(config.op, ctx, config.k, config.seed));
  suites.push_back(lemma1_stability(config.op, ctx));

  json list = json::array();
  for (const auto& s : suites) {
    list.push_back(to_json(s));
    fail_if(result, s.applicable && !s.passed, s.name);
  }
  result.report = json{{"metadata", run_metadata(config, "verify")},
                       {"operator", describe(config.op)},
                       {"passed", result.exit_code == kExitOk},
                       {"suites", list}};
  out.write("verify.json", dump_json(result.report));
  return result;
}

RunResult run_convergence(ExperimentConfig config, const RunOptions& opts) {
  config = prepared(std::move(config), opts);
  RunResult result;
  RunWriter out(config, opts, result);

  const QuadratureReport t3 = theorem3_integral(config.op, config.k, config.delta, config.levels, opts.exec);
  const bool closed_form = std::holds_alternative<IdentitySpec>(config.op) && config.k == 2;
  const double exact = closed_form ? wiener_inverse_gram_integral_k2(config.delta) : 0.0;
  std::string csv = "n,value,tuples,singular_hits,singular_weight,relative_change,closed_form,relative_error\n";
  double worst_closed_form_error = 0.0;
  for (std::size_t i = 0; i < t3.levels.size(); ++i) {
    const auto& l = t3.levels[i];
    std::string change, cf, err;
    if (i > 0) change = format_double(std::abs(l.value - t3.levels[i - 1].value) / std::abs(l.value));
    if (closed_form) {
      const double e = std::abs(l.value - exact) / exact;
      cf = format_double(exact);
      err = format_double(e);
      if (i + 1 == t3.levels.size()) worst_closed_form_error = e;
    }
    csv += fmt::format("{},{},{},{},{},{},{},{}\n", l.n, format_double(l.value), l.tuples, l.singular_hits,
                       format_double(l.singular_weight), change, cf, err);
  }
  out.write("theorem3.csv", csv);

  json stability{{"threshold", 0.01}};
  if (t3.levels.size() >= 2) {
    const double rel = t3.error_estimate / std::abs(t3.value);
    stability["last_relative_change"] = rel;
    stability["passed"] = rel < 0.01;
    fail_if(result, !(rel < 0.01), "theorem3_refinement_stability");
  } else {
    stability["passed"] = nullptr;
  }
  json t3_json = to_json(t3);
  if (closed_form) {
    t3_json["closed_form"] = exact;
    t3_json["closed_form_relative_error"] = worst_closed_form_error;
    fail_if(result, !(worst_closed_form_error < 1e-3), "theorem3_closed_form");
  }

  const OperatorMatrix op = build_operator(config.op, GridContext(config.grid_n));
  const MomentTable table =
      cauchy_diagnostic(op, config.eps_ladder, config.k, config.delta, {config.expensive, opts.exec});
  std::ostringstream mcsv;
  write_moment_csv(mcsv, table);
  out.write("moments.csv", mcsv.str());
  const double scale = table.cross_moments.cwiseAbs().maxCoeff();
  bool nonnegative = true;
  bool decreasing = true;
  for (std::size_t i = 0; i < table.cauchy_increments.size(); ++i) {
    nonnegative = nonnegative && table.cauchy_increments[i] >= -1e-12 * scale;
    if (i > 0) decreasing = decreasing && table.cauchy_increments[i] < table.cauchy_increments[i - 1];
  }
  fail_if(result, !nonnegative, "cauchy_increments_nonnegative");
  json moments = to_json(table);
  out.write("moments.json", dump_json(json{{"metadata", run_metadata(config, "convergence")}, {"moments", moments}}));

  result.report = json{{"metadata", run_metadata(config, "convergence")},
                       {"operator", describe(config.op)},
                       {"theorem3", t3_json},
                       {"stability", stability},
                       {"cauchy", {{"increments", moments["cauchy_increments"]},
                                   {"nonnegative", nonnegative},
                                   {"strictly_decreasing", decreasing}}},
                       {"passed", result.exit_code == kExitOk},
                       {"failures", result.failures}};
  out.write("theorem3.json", dump_json(json{{"metadata", run_metadata(config, "convergence")}, {"report", t3_json}}));
  out.write("convergence.json", dump_json(result.report));
  return result;
}

RunResult run_fwt(ExperimentConfig config, const RunOptions& opts) {
  config = prepared(std::move(config), opts);
  RunResult result;
  RunWriter out(config, opts, result);

  std::string csv = "probe,mode,n,value,tuples,singular_hits,singular_weight,error_estimate\n";
  json reports = json::array();
  json checks = json::array();
  const bool thm2_ok = config.k == 2 && is_identity_plus_compact(config.op);
  for (const auto& probe : config.probes) {
    std::optional<double> thm1_value, thm2_value;
    double thm_err = 0.0;
    for (const auto& mode_name : config.modes) {
      const FwtMode mode = parse_mode(mode_name, config.delta);
      if (mode.kind == FwtMode::Kind::Thm2K2 && !thm2_ok) {
        reports.push_back({{"probe", probe.label},
                           {"mode", mode_name},
                           {"skipped", "thm2_k2 needs k = 2 and an identity-plus-compact operator"}});
        continue;
      }
      const QuadratureReport r = regularized_fwt_quadrature(config.op, config.k, probe, mode, config.levels, opts.exec);
      for (const auto& l : r.levels) {
        csv += fmt::format("{},{},{},{},{},{},{},{}\n", probe.label, mode_name, l.n, format_double(l.value), l.tuples,
                           l.singular_hits, format_double(l.singular_weight), format_double(r.error_estimate));
      }
      json rj = to_json(r);
      rj["probe"] = probe.label;
      rj["mode"] = mode_name;
      reports.push_back(rj);
      if (mode.kind != FwtMode::Kind::Eq3Delta && is_zero(probe.h1)) {
        const bool exact_zero = r.value == 0.0;
        checks.push_back({{"check", "zero_probe_vanishes"}, {"probe", probe.label}, {"mode", mode_name},
                          {"value", r.value}, {"passed", exact_zero}});
        fail_if(result, !exact_zero, fmt::format("zero probe {} in {}", probe.label, mode_name));
      }
      if (mode.kind == FwtMode::Kind::Thm1FullSimplex) thm1_value = r.value;
      if (mode.kind == FwtMode::Kind::Thm2K2) thm2_value = r.value;
      if (mode.kind != FwtMode::Kind::Eq3Delta) thm_err = std::max(thm_err, r.error_estimate);
    }
    if (thm1_value && thm2_value) {
      // Both forms integrate the same function up to sign on the same rule.
      const double gap = std::abs(*thm1_value + *thm2_value);
      const double tol = thm_err + 1e-12 * std::max(1.0, std::abs(*thm1_value));
      checks.push_back({{"check", "thm1_equals_minus_thm2"}, {"probe", probe.label}, {"gap", gap},
                        {"tolerance", tol}, {"passed", gap <= tol}});
      fail_if(result, !(gap <= tol), fmt::format("thm1/thm2 disagreement for probe {}", probe.label));
    }
  }
  out.write("fwt.csv", csv);
  result.report = json{{"metadata", run_metadata(config, "fwt")},
                       {"operator", describe(config.op)},
                       {"reports", reports},
                       {"checks", checks},
                       {"passed", result.exit_code == kExitOk},
                       {"failures", result.failures}};
  out.write("fwt.json", dump_json(result.report));
  return result;
}

RunResult run_sample(ExperimentConfig config, const RunOptions& opts) {
  config = prepared(std::move(config), opts);
  RunResult result;
  RunWriter out(config, opts, result);
  const GridContext ctx(config.grid_n);
  const OperatorMatrix op = build_operator(config.op, ctx);
  const auto paths = sample_paths(op, config.seed, config.paths, opts.exec);
  std::ostringstream csv;
  write_paths_csv(csv, paths);
  out.write("paths.csv", csv.str());

  const int n = config.grid_n;
  CompensatedSum s1, s11, s2, s22, s12;
  for (const auto& p : paths) {
    const double a = p.coord1(n);
    const double b = p.coord2(n);
    s1.add(a);
    s11.add(a * a);
    s2.add(b);
    s22.add(b * b);
    s12.add(a * b);
  }
  const double cnt = static_cast<double>(paths.size());
  const double m1 = s1.value() / cnt;
  const double m2 = s2.value() / cnt;
  const double v1 = s11.value() / cnt - m1 * m1;
  const double v2 = s22.value() / cnt - m2 * m2;
  const double cov = s12.value() / cnt - m1 * m2;
  const double corr = (v1 > 0 && v2 > 0) ? cov / std::sqrt(v1 * v2) : 0.0;
  const double eps = config.eps_ladder.front();
  const MonteCarloSilt mc = monte_carlo_silt(op, eps, config.k, config.delta, config.seed, config.paths, opts.exec);
  const double expected = expected_silt(op, eps, config.k, config.delta, opts.exec);

  result.report = json{{"metadata", run_metadata(config, "sample")},
                       {"operator", describe(config.op)},
                       {"paths", config.paths},
                       {"terminal",
                        {{"variance_x1", v1},
                         {"variance_x2", v2},
                         {"covariance_model", covariance(op, 1.0, 1.0)},
                         {"correlation_x1_x2", corr}}},
                       {"silt",
                        {{"eps", eps},
                         {"k", config.k},
                         {"delta", config.delta},
                         {"mc_mean", mc.mean},
                         {"mc_std_error", mc.std_error},
                         {"mc_mean_sq", mc.mean_sq},
                         {"mc_std_error_sq", mc.std_error_sq},
                         {"expected", expected}}}};
  out.write("sample.json", dump_json(result.report));
  return result;
}

}  // namespace silt
