#include "silt_cli/cli.hpp"

#include <cstdlib>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "silt/error.hpp"
#include "silt/experiments.hpp"
#include "silt/report_io.hpp"
#include "silt/version.hpp"

namespace silt::cli {

namespace {

constexpr const char* kThreadsEnv = "INTEGRATOR_SILT_THREADS";

struct CommonFlags {
  std::string config;
  std::string out;
  int threads = 0;
  std::optional<std::uint64_t> seed_override;
};

void add_common(CLI::App* sub, CommonFlags& flags) {
  sub->add_option("--config", flags.config, "Experiment configuration (JSON); defaults are used when omitted");
  sub->add_option("--out", flags.out, "Output root; the run directory is <out>/<config hash>");
  sub->add_option("--threads", flags.threads, "Worker threads (fallback: $" + std::string(kThreadsEnv) + ")")
      ->check(CLI::PositiveNumber);
  sub->add_option("--seed-override", flags.seed_override, "Replace the configured seed");
}

int resolve_threads(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv(kThreadsEnv); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1 || v > 4096) {
      throw Error(ErrorKind::ConfigError, fmt::format("{}='{}' is not a positive thread count", kThreadsEnv, env));
    }
    return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void print_result(const std::string& command, const RunResult& r, std::ostream& out) {
  out << fmt::format("{}: run directory {}\n", command, r.run_dir.string());
  for (const auto& f : r.files) out << fmt::format("  wrote {}\n", f);
  if (r.failures.empty()) {
    out << fmt::format("{}: all checks passed\n", command);
  } else {
    for (const auto& f : r.failures) out << fmt::format("  FAILED {}\n", f);
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation and quadrature for self-intersection local times of planar Gaussian integrators", "silt"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kLibraryVersion);

  CommonFlags flags;
  struct Command {
    const char* name;
    const char* help;
    RunResult (*fn)(ExperimentConfig, const RunOptions&);
  };
  const Command commands[] = {
      {"verify", "Run the Gram-determinant property suites and kernel audits", run_verify},
      {"convergence", "Refinement study of the 1/G integral and the L2 Cauchy diagnostic", run_convergence},
      {"fwt", "Quadratures of the regularized Fourier-Wiener integrands", run_fwt},
      {"sample", "Export sampled paths as CSV with moment summaries", run_sample},
  };
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_common(sub, flags);
    subs.emplace_back(sub, &c);
  }
  CLI::App* show = app.add_subcommand("config", "Print the effective configuration as JSON");
  std::string show_config;
  show->add_option("--config", show_config, "Configuration file to validate and print");

  std::vector<std::string> argv_store{"silt"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (show->parsed()) {
      const ExperimentConfig c = show_config.empty() ? default_config() : load_config(show_config);
      out << dump_json(to_json(c));
      return kExitOk;
    }
    for (const auto& [sub, cmd] : subs) {
      if (!sub->parsed()) continue;
      ExperimentConfig config = flags.config.empty() ? default_config() : load_config(flags.config);
      RunOptions opts;
      if (!flags.out.empty()) opts.out_dir = flags.out;
      opts.seed_override = flags.seed_override;
      opts.exec.threads = resolve_threads(flags.threads);
      const RunResult r = cmd->fn(std::move(config), opts);
      print_result(cmd->name, r, out);
      return r.exit_code;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::ConfigError ? kExitConfigError : kExitInternalError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternalError;
  }
  return kExitInternalError;
}

}  // namespace silt::cli
