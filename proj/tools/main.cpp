#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "cpdg/cli.hpp"
#include "cpdg/parallel.hpp"
#include "cpdg/version.hpp"

namespace {
void error_report(const std::string& kind, const std::vector<std::string>& msgs) {
  std::cerr << "status=error\nerror_kind=" << kind << "\n";
  for (std::size_t i = 0; i < msgs.size(); ++i) std::cerr << "error[" << i << "]=" << msgs[i] << "\n";
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contact process on dynamical graphs"};
  app.set_version_flag("--version", cpdg::kVersion);
  std::string cmd, config_path;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string out_dir;
  app.add_option("command", cmd, "simulate | star | path | phase | edge-law | oracle | check")->required();
  app.add_option("--config", config_path, "JSON experiment config");
  auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides the config)");
  app.add_option("--threads", threads, "worker threads (default: $CPDG_THREADS or all cores)");
  app.add_option("--out", out_dir, "output directory (default: $CPDG_OUT or .)");
  CLI11_PARSE(app, argc, argv);

  if (!cpdg::cli::known_command(cmd)) {
    error_report("usage", {"unknown subcommand '" + cmd + "'"});
    return cpdg::cli::kExitConfig;
  }
  cpdg::cli::Flags flags;
  if (!out_dir.empty()) flags.out_dir = out_dir;
  else if (const char* e = std::getenv("CPDG_OUT")) flags.out_dir = e;
  if (threads > 0) flags.threads = threads;
  else if (const char* e = std::getenv("CPDG_THREADS")) flags.threads = static_cast<unsigned>(std::max(1, std::atoi(e)));
  else flags.threads = cpdg::default_threads();

  cpdg::config::ExperimentConfig cfg;
  try {
    cfg = config_path.empty() ? cpdg::config::parse_config("{}") : cpdg::config::load_config(config_path);
    if (seed_opt->count() > 0) {
      cfg.seed = seed;
      cfg.canonical = cpdg::config::canonicalize(cfg);
      cfg.hash = cpdg::config::fnv1a(cfg.canonical);
    }
  } catch (const cpdg::config::ConfigError& e) {
    error_report("config", e.violations);
    return cpdg::cli::kExitConfig;
  } catch (const std::exception& e) {
    error_report("io", {e.what()});
    return cpdg::cli::kExitRuntime;
  }
  try {
    return cpdg::cli::dispatch(cmd, cfg, flags, std::cout);
  } catch (const std::exception& e) {
    error_report("runtime", {e.what()});
    return cpdg::cli::kExitRuntime;
  }
}
