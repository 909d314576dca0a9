#pragma once

// Anytime-performance metrics and per-run CSV logging.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

#include "photonbench/problems.hpp"

namespace photonbench {

/// Clip bounds of the area-over-convergence-curve metric. With log_scale the
/// clipped values are compared in log10 space, which requires lb > 0.
struct AoccConfig {
  double lb = 0.0;
  double ub = 1.0;
  bool log_scale = false;

  void validate() const;
  static AoccConfig for_instance(const ProblemInstance& instance, bool log_scale = false);
};

/// Area over the convergence curve of best-so-far values, normalised to
/// [0, 1] (1 is best). Runs shorter than `budget` are padded with their
/// last best-so-far value.
double aocc(const RunTrajectory& trajectory, const AoccConfig& cfg, std::size_t budget);

struct RunSummary {
  double aocc = 0.0;
  double y_best = 0.0;
  std::size_t n_evals = 0;
};

RunSummary summarize_run(const RunTrajectory& trajectory, const AoccConfig& cfg, std::size_t budget);

/// Mean and population standard deviation (N denominator).
struct SummaryStats {
  double aocc_mean = 0.0;
  double aocc_std = 0.0;
  double y_best_mean = 0.0;
  double y_best_std = 0.0;
  std::size_t runs = 0;
};

SummaryStats summarize_runs(std::span<const RunSummary> summaries);

struct RunMetadata {
  std::string instance;
  std::string algorithm;
  std::size_t run_id = 0;
  std::size_t budget = 0;
  std::uint64_t seed = 0;
  friend bool operator==(const RunMetadata&, const RunMetadata&) = default;
};

/// Writes '# key=value' metadata lines, then evaluation,raw_fitness,best_so_far
/// rows with 17 significant digits and LF endings.
void write_run_csv(std::ostream& out, const RunTrajectory& trajectory, const RunMetadata& meta);
void emit_run_csv(const std::filesystem::path& path, const RunTrajectory& trajectory, const RunMetadata& meta);

struct RunRecord {
  RunMetadata meta;
  RunTrajectory trajectory;
};

RunRecord parse_run_csv(std::istream& in, const std::string& source = "<stream>");
RunRecord read_run_csv(const std::filesystem::path& path);

/// Shortest-round-trip-safe formatting with 17 significant digits.
std::string format_double(double value);

}  // namespace photonbench
