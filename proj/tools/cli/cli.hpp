#pragma once

#include <exception>
#include <iosfwd>
#include <string>
#include <vector>

namespace mfg::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kCflViolation = 3,
  kDmpBreach = 4,
};

/**
 * Everything a run needs. Field names double as the snake_case keys of the
 * optional JSON config file; zero / empty / negative values mean "use the
 * default for this subcommand and problem".
 */
struct CliConfig {
  std::string command;     // solve | reference | study
  std::string study_kind;  // dx | k (study only)
  std::string problem = "ex1d";
  int nt = 0;
  int nx = 0;
  double k1 = 0.0;
  double k2 = 0.0;
  long iters = -1;
  std::string initial_guess = "uncontrolled";
  std::string reference;
  std::string out = ".";
  int threads = 0;
  std::vector<long> snapshots;
  double plateau_tol = -1.0;
  std::string name;
  // study options
  std::vector<std::string> ladder;
  std::vector<std::string> schedules;
  std::vector<long> k_samples;
  long fit_k_min = -1;
  double cfl_ratio = 0.0;
  int ref_nt = 0;
  int ref_nx = 0;
  long ref_iters = 0;
};

/// Parses `args` (without the program name), runs the subcommand and returns
/// the exit code. Diagnostics go to `err`; on success `out` receives one
/// summary line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Maps a library exception to its exit code.
int exit_code_for(const std::exception_ptr& e);

}  // namespace mfg::cli
