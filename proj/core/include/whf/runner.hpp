#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace whf {

/// Options of one command-line run; values given here override the problem
/// file.
struct RunConfig {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  std::string format = "csv";
  std::optional<double> L;
  std::optional<std::size_t> steps;
  bool validate = false;
  bool b_invariance = false;
  std::optional<std::filesystem::path> trajectory_dump;
  std::optional<std::filesystem::path> report;
  std::size_t threads = 0;
};

/// Exit codes: 0 = everything requested succeeded and passed its tolerance,
/// 1 = a solver error or a failed check, 2 = unusable input.
enum ExitCode : int { kExitOk = 0, kExitFailed = 1, kExitBadInput = 2 };

/// Solves the problem at the configured points and writes the U table to
/// `out` (or `result`). Progress and a summary go to `log`.
int run_factorize(const RunConfig& run, std::ostream& result, std::ostream& log);

/// Runs the validation suite and writes a JSON report to `report`/`out` (or
/// `result`).
int run_validate(const RunConfig& run, std::ostream& result, std::ostream& log);

}  // namespace whf
