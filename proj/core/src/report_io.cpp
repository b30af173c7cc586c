#include "silt/report_io.hpp"

#include <cmath>
#include <fstream>

#include <fmt/core.h>

#include "silt/error.hpp"

namespace silt {

using nlohmann::json;

namespace {

// JSON has no infinities or NaN; they are written as null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json to_json(const QuadratureReport& r) {
  json levels = json::array();
  for (const auto& l : r.levels) {
    levels.push_back({{"n", l.n},
                      {"value", number(l.value)},
                      {"tuples", l.tuples},
                      {"singular_hits", l.singular_hits},
                      {"singular_weight", number(l.singular_weight)}});
  }
  return json{{"integrand", r.integrand},
              {"k", r.k},
              {"delta", r.delta},
              {"value", number(r.value)},
              {"levels", levels},
              {"error_estimate", number(r.error_estimate)},
              {"singular_hits", r.singular_hits},
              {"conventions",
               {{"two_pi_factor", r.two_pi_factor}, {"sign", r.sign_convention}, {"domain", r.domain}}}};
}

json to_json(const MomentTable& t) {
  json cross = json::array();
  for (Eigen::Index i = 0; i < t.cross_moments.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < t.cross_moments.cols(); ++j) row.push_back(number(t.cross_moments(i, j)));
    cross.push_back(row);
  }
  json inc = json::array();
  for (double v : t.cauchy_increments) inc.push_back(number(v));
  json first = json::array();
  for (double v : t.first_moments) first.push_back(number(v));
  return json{{"epsilons", t.epsilons},     {"first_moments", first}, {"cross_moments", cross},
              {"cauchy_increments", inc},   {"n", t.n},               {"k", t.k},
              {"delta", t.delta},           {"tuples", t.tuples},     {"simplex_volume", number(t.simplex_volume)}};
}

json to_json(const SuiteResult& s) {
  return json{{"name", s.name},
              {"applicable", s.applicable},
              {"passed", s.passed},
              {"instances", s.instances},
              {"failures", s.failures},
              {"worst", number(s.worst)},
              {"threshold", number(s.threshold)},
              {"comparison", s.comparison},
              {"note", s.note}};
}

json to_json(const RatioBand& b) {
  return json{{"radius", b.radius}, {"min", number(b.min)}, {"max", number(b.max)}, {"points", b.points}};
}

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

std::string quadrature_levels_csv(const QuadratureReport& r) {
  std::string out = "n,value,tuples,singular_hits,singular_weight,relative_change\n";
  for (std::size_t i = 0; i < r.levels.size(); ++i) {
    const auto& l = r.levels[i];
    std::string change;
    if (i > 0) change = format_double(std::abs(l.value - r.levels[i - 1].value) / std::abs(l.value));
    out += fmt::format("{},{},{},{},{},{}\n", l.n, format_double(l.value), l.tuples, l.singular_hits,
                       format_double(l.singular_weight), change);
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::InvalidArgument, fmt::format("cannot write '{}'", tmp.string()));
    out << content;
    out.flush();
    if (!out) throw Error(ErrorKind::InvalidArgument, fmt::format("short write to '{}'", tmp.string()));
  }
  std::filesystem::rename(tmp, path);
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

}  // namespace silt
