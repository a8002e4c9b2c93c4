#pragma once
#include <iosfwd>
#include <string>

#include "cpdg/config.hpp"

namespace cpdg::cli {

struct Flags {
  std::string out_dir = ".";
  unsigned threads = 1;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitAssert = 3;

bool known_command(const std::string& cmd);
// Runs one subcommand; writes artifacts to flags.out_dir and the key=value report to `out`.
int dispatch(const std::string& cmd, const config::ExperimentConfig& cfg, const Flags& flags, std::ostream& out);

}  // namespace cpdg::cli
