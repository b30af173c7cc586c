#include "silt/experiment_config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/core.h>

#include "silt/error.hpp"

namespace silt {

namespace {

using nlohmann::json;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::ConfigError, fmt::format("{}: {}", where, what));
}

std::string path(const std::string& where, const std::string& key) { return where.empty() ? key : where + "." + key; }

void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) fail(path(where, key), "unknown key");
  }
}

const json& require_object(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  return j;
}

double as_double(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(where, "must be finite");
  return v;
}

long long as_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<long long>();
}

double double_or(const json& j, const char* key, const std::string& where, double fallback) {
  return j.contains(key) ? as_double(j.at(key), path(where, key)) : fallback;
}

std::string string_at(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) fail(path(where, key), "missing");
  if (!j.at(key).is_string()) fail(path(where, key), "expected a string");
  return j.at(key).get<std::string>();
}

KernelShape shape_from(const std::string& s, const std::string& where) {
  if (s == "exponential") return KernelShape::Exponential;
  if (s == "gaussian") return KernelShape::Gaussian;
  if (s == "brownian") return KernelShape::Brownian;
  fail(where, fmt::format("unknown kernel '{}' (exponential, gaussian, brownian)", s));
}

}  // namespace

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.op = ProjectorComplementSpec{{IndicatorFunction{0.0, 0.5}, SinusoidFunction{1}}};
  c.grid_n = 32;
  c.k = 3;
  c.delta = 0.1;
  c.eps_ladder = {0.2, 0.1, 0.05, 0.025};
  c.probes = {
      {"zero", ZeroFunction{}, ZeroFunction{}},
      {"indicator_full", IndicatorFunction{0.0, 1.0}, ZeroFunction{}},
      {"sinusoid_2", SinusoidFunction{2}, SinusoidFunction{2}},
  };
  c.seed = 20260417;
  c.paths = 10000;
  c.output_dir = "runs";
  c.levels = {32, 64, 128};
  c.expensive = false;
  c.modes = {"thm1_full_simplex", "thm2_k2", "eq3_delta"};
  return c;
}

json to_json(const FunctionSpec& spec) {
  return std::visit(Overloaded{
                        [](const ZeroFunction&) { return json{{"type", "zero"}}; },
                        [](const ConstantFunction& f) { return json{{"type", "constant"}, {"value", f.value}}; },
                        [](const IndicatorFunction& f) { return json{{"type", "indicator"}, {"a", f.a}, {"b", f.b}}; },
                        [](const SinusoidFunction& f) { return json{{"type", "sinusoid"}, {"m", f.m}}; },
                        [](const PowerFunction& f) { return json{{"type", "power"}, {"p", f.p}}; },
                    },
                    spec);
}

json to_json(const OperatorSpec& spec) {
  return std::visit(Overloaded{
                        [](const IdentitySpec&) { return json{{"kind", "identity"}}; },
                        [](const ProjectorComplementSpec& s) {
                          json dirs = json::array();
                          for (const auto& d : s.directions) dirs.push_back(to_json(d));
                          return json{{"kind", "projector_complement"}, {"directions", dirs}};
                        },
                        [](const CompactPerturbationSpec& s) {
                          return json{{"kind", "compact_perturbation"},
                                      {"kernel", std::string(to_string(s.shape))},
                                      {"scale", s.scale},
                                      {"length", s.length}};
                        },
                        [](const FbmVolterraSpec& s) { return json{{"kind", "fbm_volterra"}, {"alpha", s.alpha}}; },
                        [](const CustomMatrixSpec& s) {
                          json rows = json::array();
                          for (Eigen::Index i = 0; i < s.matrix.rows(); ++i) {
                            json row = json::array();
                            for (Eigen::Index j = 0; j < s.matrix.cols(); ++j) row.push_back(s.matrix(i, j));
                            rows.push_back(row);
                          }
                          json out{{"kind", "custom"}, {"matrix", rows}};
                          if (s.declared_sigma_min) out["declared_sigma_min"] = *s.declared_sigma_min;
                          return out;
                        },
                    },
                    spec);
}

json to_json(const ExperimentConfig& c) {
  json probes = json::array();
  for (const auto& p : c.probes) probes.push_back({{"label", p.label}, {"h1", to_json(p.h1)}, {"h2", to_json(p.h2)}});
  return json{
      {"operator", to_json(c.op)}, {"grid_n", c.grid_n},   {"k", c.k},
      {"delta", c.delta},          {"eps_ladder", c.eps_ladder}, {"probes", probes},
      {"seed", c.seed},            {"paths", c.paths},     {"output_dir", c.output_dir},
      {"levels", c.levels},        {"expensive", c.expensive}, {"modes", c.modes},
  };
}

FunctionSpec function_from_json(const json& j, const std::string& where) {
  require_object(j, where);
  const std::string type = string_at(j, "type", where);
  if (type == "zero") {
    reject_unknown(j, where, {"type"});
    return ZeroFunction{};
  }
  if (type == "constant") {
    reject_unknown(j, where, {"type", "value"});
    return ConstantFunction{double_or(j, "value", where, 1.0)};
  }
  if (type == "indicator") {
    reject_unknown(j, where, {"type", "a", "b"});
    const double a = double_or(j, "a", where, 0.0);
    const double b = double_or(j, "b", where, 1.0);
    if (!(0.0 <= a && a < b && b <= 1.0)) fail(where, fmt::format("indicator needs 0 <= a < b <= 1, got [{}, {}]", a, b));
    return IndicatorFunction{a, b};
  }
  if (type == "sinusoid") {
    reject_unknown(j, where, {"type", "m"});
    const long long m = j.contains("m") ? as_int(j.at("m"), path(where, "m")) : 1;
    if (m < 1 || m > 1000000) fail(path(where, "m"), "must be a positive integer");
    return SinusoidFunction{static_cast<int>(m)};
  }
  if (type == "power") {
    reject_unknown(j, where, {"type", "p"});
    const double p = double_or(j, "p", where, 1.0);
    if (!(p >= 1.0)) fail(path(where, "p"), "must be >= 1");
    return PowerFunction{p};
  }
  fail(path(where, "type"), fmt::format("unknown function type '{}' (zero, constant, indicator, sinusoid, power)", type));
}

OperatorSpec operator_from_json(const json& j, const std::string& where) {
  require_object(j, where);
  const std::string kind = string_at(j, "kind", where);
  if (kind == "identity") {
    reject_unknown(j, where, {"kind"});
    return IdentitySpec{};
  }
  if (kind == "projector_complement") {
    reject_unknown(j, where, {"kind", "directions"});
    const std::string dw = path(where, "directions");
    if (!j.contains("directions") || !j.at("directions").is_array() || j.at("directions").empty()) {
      fail(dw, "expected a nonempty array");
    }
    ProjectorComplementSpec s;
    for (std::size_t i = 0; i < j.at("directions").size(); ++i) {
      const std::string w = fmt::format("{}[{}]", dw, i);
      FunctionSpec f = function_from_json(j.at("directions")[i], w);
      if (is_zero(f)) fail(w, "projector direction must be nonzero");
      s.directions.push_back(std::move(f));
    }
    return s;
  }
  if (kind == "compact_perturbation") {
    reject_unknown(j, where, {"kind", "kernel", "scale", "length"});
    CompactPerturbationSpec s;
    if (j.contains("kernel")) s.shape = shape_from(string_at(j, "kernel", where), path(where, "kernel"));
    s.scale = double_or(j, "scale", where, s.scale);
    s.length = double_or(j, "length", where, s.length);
    if (!(s.length > 0)) fail(path(where, "length"), "must be positive");
    return s;
  }
  if (kind == "fbm_volterra") {
    reject_unknown(j, where, {"kind", "alpha"});
    FbmVolterraSpec s;
    s.alpha = double_or(j, "alpha", where, s.alpha);
    if (!(s.alpha > 0.5 && s.alpha < 1.0)) fail(path(where, "alpha"), "must lie in (1/2, 1)");
    return s;
  }
  if (kind == "custom") {
    reject_unknown(j, where, {"kind", "matrix", "declared_sigma_min"});
    const std::string mw = path(where, "matrix");
    if (!j.contains("matrix") || !j.at("matrix").is_array() || j.at("matrix").empty()) fail(mw, "expected rows");
    const auto& rows = j.at("matrix");
    const auto n = static_cast<Eigen::Index>(rows.size());
    CustomMatrixSpec s;
    s.matrix.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& row = rows[static_cast<std::size_t>(i)];
      const std::string rw = fmt::format("{}[{}]", mw, i);
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) fail(rw, fmt::format("expected {} entries", n));
      for (Eigen::Index c = 0; c < n; ++c) {
        s.matrix(i, c) = as_double(row[static_cast<std::size_t>(c)], fmt::format("{}[{}]", rw, c));
      }
    }
    if (j.contains("declared_sigma_min")) {
      const double d = as_double(j.at("declared_sigma_min"), path(where, "declared_sigma_min"));
      if (!(d > 0)) fail(path(where, "declared_sigma_min"), "must be positive");
      s.declared_sigma_min = d;
    }
    return s;
  }
  fail(path(where, "kind"),
       fmt::format("unknown operator kind '{}' (identity, projector_complement, compact_perturbation, fbm_volterra, "
                   "custom)",
                   kind));
}

ExperimentConfig config_from_json(const json& j) {
  require_object(j, "config");
  reject_unknown(j, "", {"operator", "grid_n", "k", "delta", "eps_ladder", "probes", "seed", "paths", "output_dir",
                         "levels", "expensive", "modes"});
  ExperimentConfig c = default_config();
  if (j.contains("operator")) c.op = operator_from_json(j.at("operator"));
  if (j.contains("grid_n")) c.grid_n = static_cast<int>(std::clamp<long long>(as_int(j.at("grid_n"), "grid_n"), -1, 1 << 20));
  if (j.contains("k")) c.k = static_cast<int>(std::clamp<long long>(as_int(j.at("k"), "k"), -1, 1 << 10));
  if (j.contains("delta")) c.delta = as_double(j.at("delta"), "delta");
  if (j.contains("eps_ladder")) {
    if (!j.at("eps_ladder").is_array()) fail("eps_ladder", "expected an array");
    c.eps_ladder.clear();
    for (std::size_t i = 0; i < j.at("eps_ladder").size(); ++i) {
      c.eps_ladder.push_back(as_double(j.at("eps_ladder")[i], fmt::format("eps_ladder[{}]", i)));
    }
  }
  if (j.contains("probes")) {
    if (!j.at("probes").is_array()) fail("probes", "expected an array");
    c.probes.clear();
    for (std::size_t i = 0; i < j.at("probes").size(); ++i) {
      const std::string w = fmt::format("probes[{}]", i);
      const json& p = require_object(j.at("probes")[i], w);
      reject_unknown(p, w, {"label", "h1", "h2"});
      ProbeSpec ps;
      ps.label = string_at(p, "label", w);
      if (!p.contains("h1")) fail(path(w, "h1"), "missing");
      ps.h1 = function_from_json(p.at("h1"), path(w, "h1"));
      ps.h2 = p.contains("h2") ? function_from_json(p.at("h2"), path(w, "h2")) : FunctionSpec{ZeroFunction{}};
      c.probes.push_back(std::move(ps));
    }
  }
  if (j.contains("seed")) {
    const json& s = j.at("seed");
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() && s.get<long long>() < 0)) {
      fail("seed", "expected a nonnegative integer");
    }
    c.seed = s.get<std::uint64_t>();
  }
  if (j.contains("paths")) {
    const long long p = as_int(j.at("paths"), "paths");
    if (p < 2) fail("paths", "must be >= 2");
    c.paths = static_cast<std::size_t>(p);
  }
  if (j.contains("output_dir")) c.output_dir = string_at(j, "output_dir", "");
  if (j.contains("levels")) {
    if (!j.at("levels").is_array()) fail("levels", "expected an array");
    c.levels.clear();
    for (std::size_t i = 0; i < j.at("levels").size(); ++i) {
      c.levels.push_back(static_cast<int>(
          std::clamp<long long>(as_int(j.at("levels")[i], fmt::format("levels[{}]", i)), -1, 1 << 20)));
    }
  }
  if (j.contains("expensive")) {
    if (!j.at("expensive").is_boolean()) fail("expensive", "expected true or false");
    c.expensive = j.at("expensive").get<bool>();
  }
  if (j.contains("modes")) {
    if (!j.at("modes").is_array()) fail("modes", "expected an array");
    c.modes.clear();
    for (std::size_t i = 0; i < j.at("modes").size(); ++i) {
      const auto& m = j.at("modes")[i];
      if (!m.is_string()) fail(fmt::format("modes[{}]", i), "expected a string");
      c.modes.push_back(m.get<std::string>());
    }
  }
  validate(c);
  return c;
}

void validate(const ExperimentConfig& c) {
  if (c.grid_n < 2) fail("grid_n", fmt::format("must be >= 2, got {}", c.grid_n));
  if (c.k < 2) fail("k", fmt::format("must be >= 2, got {}", c.k));
  if (c.k > 3 && !c.expensive) fail("k", fmt::format("k = {} > 3 requires \"expensive\": true", c.k));
  if (c.k > 8) fail("k", "must be <= 8");
  if (!(c.delta > 0)) fail("delta", "must be positive");
  if (c.delta * c.grid_n < 2.0 - 1e-9) {
    fail("delta", fmt::format("delta = {} is below two cells of grid_n = {} (needs delta >= {})", c.delta, c.grid_n,
                              2.0 / c.grid_n));
  }
  if ((c.k - 1) * c.delta >= 1.0) fail("delta", fmt::format("(k-1)*delta = {} must be < 1", (c.k - 1) * c.delta));
  if (c.eps_ladder.size() < 3) fail("eps_ladder", "needs at least 3 entries");
  for (std::size_t i = 0; i < c.eps_ladder.size(); ++i) {
    if (!(c.eps_ladder[i] > 0)) fail(fmt::format("eps_ladder[{}]", i), "must be positive");
    if (i > 0 && c.eps_ladder[i] > c.eps_ladder[i - 1]) fail(fmt::format("eps_ladder[{}]", i), "ladder must be non-increasing");
  }
  std::set<std::string> labels;
  for (std::size_t i = 0; i < c.probes.size(); ++i) {
    if (c.probes[i].label.empty()) fail(fmt::format("probes[{}].label", i), "must be nonempty");
    if (!labels.insert(c.probes[i].label).second) fail(fmt::format("probes[{}].label", i), "duplicate label");
  }
  if (c.paths < 2) fail("paths", "must be >= 2");
  if (c.output_dir.empty()) fail("output_dir", "must be nonempty");
  if (c.levels.empty()) fail("levels", "needs at least one grid size");
  for (std::size_t i = 0; i < c.levels.size(); ++i) {
    const std::string w = fmt::format("levels[{}]", i);
    if (c.levels[i] < 2) fail(w, "must be >= 2");
    if (i > 0 && c.levels[i] <= c.levels[i - 1]) fail(w, "levels must be increasing");
    if (c.delta * c.levels[i] < 2.0 - 1e-9) fail(w, fmt::format("delta = {} is below two cells of n = {}", c.delta, c.levels[i]));
  }
  if (const auto* custom = std::get_if<CustomMatrixSpec>(&c.op)) {
    if (custom->matrix.rows() != c.grid_n) {
      fail("operator.matrix", fmt::format("is {}x{} but grid_n = {}", custom->matrix.rows(), custom->matrix.cols(), c.grid_n));
    }
    if (c.levels.size() != 1 || c.levels.front() != c.grid_n) {
      fail("levels", "a custom matrix exists on one grid only; set levels to [grid_n]");
    }
  }
  std::set<std::string> seen;
  for (std::size_t i = 0; i < c.modes.size(); ++i) {
    const std::string w = fmt::format("modes[{}]", i);
    if (c.modes[i] != "thm1_full_simplex" && c.modes[i] != "thm2_k2" && c.modes[i] != "eq3_delta") {
      fail(w, fmt::format("unknown mode '{}' (thm1_full_simplex, thm2_k2, eq3_delta)", c.modes[i]));
    }
    if (!seen.insert(c.modes[i]).second) fail(w, "duplicate mode");
  }
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into line:column.
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string what = e.what();
    const auto pos = what.find("syntax error");
    if (pos != std::string::npos) what = what.substr(pos);
    throw Error(ErrorKind::ConfigError, fmt::format("{}:{}:{}: {}", source, line, col, what));
  }
  try {
    return config_from_json(j);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::ConfigError) throw;
    const std::string what = e.what();
    const std::string prefix = std::string(to_string(ErrorKind::ConfigError)) + ": ";
    throw Error(ErrorKind::ConfigError, fmt::format("{}: {}", source, what.substr(prefix.size())));
  }
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorKind::ConfigError, fmt::format("cannot read config file '{}'", file.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), file.string());
}

std::string config_hash(const ExperimentConfig& config) {
  json j = to_json(config);
  j.erase("output_dir");
  const std::string canon = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : canon) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return fmt::format("{:016x}", h);
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) { return to_json(a) == to_json(b); }

FwtMode parse_mode(const std::string& name, double delta) {
  if (name == "thm1_full_simplex") return FwtMode::thm1_full_simplex();
  if (name == "thm2_k2") return FwtMode::thm2_k2();
  if (name == "eq3_delta") return FwtMode::eq3_delta(delta);
  throw Error(ErrorKind::ConfigError, fmt::format("unknown mode '{}'", name));
}

}  // namespace silt
