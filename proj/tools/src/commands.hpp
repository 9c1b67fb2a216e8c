#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace osl::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfigError = 2, kIoError = 3 };

struct Options {
  std::string command;
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool complex = false;
};

/// Runs one command and maps every error class to its exit code. Progress and
/// diagnostics go to `log`; result files go to options.out_dir.
int run(const Options& options, std::ostream& log);

/// Full command line entry point (argument parsing included).
int main_entry(int argc, char** argv);

const std::vector<std::string>& command_names();

}  // namespace osl::cli
