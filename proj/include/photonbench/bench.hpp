#pragma once

// Seeded benchmark plans over (instance, algorithm, run) cells, and 2-D
// landscape scans.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "photonbench/metrics.hpp"
#include "photonbench/optimizers.hpp"
#include "photonbench/problems.hpp"
#include "photonbench/sandbox.hpp"

namespace photonbench {

class KeyValueConfig;

/// A built-in optimizer or an external candidate command.
struct BenchAlgorithm {
  std::string name;
  std::optional<OptimizerConfig> optimizer;
  std::vector<std::string> command;
};

struct BenchPlan {
  std::string name = "bench";
  std::vector<ProblemInstance> instances;
  std::vector<BenchAlgorithm> algorithms;
  std::size_t runs = 15;
  std::uint64_t base_seed = 0;  ///< run k uses base_seed + k
  std::size_t workers = 1;
  std::filesystem::path out_dir = "results";
  SandboxOptions sandbox;
  ProblemContext context;

  void validate() const;
  std::filesystem::path result_dir() const { return out_dir / name; }
};

/// Resolves an algorithm name: an optimizer id, optionally tuned by
/// `algo.<name>.<field>` keys, or an external `algo.<name>.command` list.
BenchAlgorithm resolve_algorithm(const std::string& name, const KeyValueConfig& cfg);
/// An instance id or a path to an instance file.
ProblemInstance resolve_instance(const std::string& spec);

/// Keys: name, instances, algorithms, runs, seed, workers, out,
/// budget_override, timeout, algo.<name>.*.
BenchPlan parse_plan(const KeyValueConfig& cfg);
BenchPlan load_plan(const std::filesystem::path& path);

struct CellResult {
  std::string instance;
  std::string algorithm;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  RunSummary summary;
  std::filesystem::path file;
};

struct AggregateRow {
  std::string instance;
  std::string algorithm;
  std::size_t runs_ok = 0;
  std::size_t runs_failed = 0;
  SummaryStats stats;
};

struct BenchResult {
  std::vector<CellResult> cells;
  std::vector<AggregateRow> aggregate;
  std::filesystem::path dir;
};

/// Runs every cell, writing <dir>/<instance>/<algorithm>/run_<k>.csv,
/// aggregate.csv and failures.csv. Failing cells are recorded and skipped.
BenchResult run_bench(const BenchPlan& plan);

/// Per (instance, algorithm) statistics over successful cells, independent
/// of cell order.
std::vector<AggregateRow> aggregate_cells(std::vector<CellResult> cells);
void write_aggregate_csv(const std::filesystem::path& path, const std::vector<AggregateRow>& rows);

// ---------------------------------------------------------------------------

struct LandscapeScan {
  std::size_t i = 0;
  std::size_t j = 0;
  std::vector<double> xi;  ///< grid values of coordinate i (rows)
  std::vector<double> xj;  ///< grid values of coordinate j (columns)
  std::vector<std::vector<double>> values;
  std::vector<double> fixed;
  std::size_t evaluations = 0;

  /// Row and column of the smallest value.
  std::pair<std::size_t, std::size_t> argmin() const;
};

/// Evaluates f on a grid x grid lattice over coordinates (i, j) with the
/// other coordinates taken from `fixed` (default: bounds midpoint).
/// No budget accounting.
LandscapeScan landscape_scan(const FitnessFunction& f, const Bounds& bounds, std::size_t i, std::size_t j,
                             std::size_t grid, std::optional<std::vector<double>> fixed = std::nullopt);
void write_landscape_csv(std::ostream& out, const LandscapeScan& scan, const std::string& instance);

}  // namespace photonbench
