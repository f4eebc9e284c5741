#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace tractorlab::cli {

enum ExitCode : int { kPass = 0, kFail = 1, kUsage = 2 };

// Settings after merging flags, config file, TRACTORLAB_SEED and defaults.
struct Settings {
  std::string command;
  std::string model;
  int m = 1;
  int p = 2;
  int q = 0;
  std::optional<double> tol;
  int points = 20;
  std::uint64_t seed = 0;
  std::string report;  // empty: JSON on stdout
  std::string suite;
  int jobs = 1;
  bool timing = false;
};

// Parses "P,Q".
std::pair<int, int> parse_signature(const std::string& text);

// Runs the driver; returns the process exit code. `env_seed` stands in for
// the TRACTORLAB_SEED environment variable.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        std::optional<std::string> env_seed);

// Same resolution without running anything; throws std::invalid_argument on
// configuration errors.
Settings resolve(const std::vector<std::string>& args, std::optional<std::string> env_seed);

}  // namespace tractorlab::cli
