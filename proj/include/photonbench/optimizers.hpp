#pragma once

// Baseline black-box optimizers. Every optimizer draws points strictly inside
// the objective's bounds and runs until the objective's budget is spent.

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "photonbench/problems.hpp"

namespace photonbench {

class KeyValueConfig;

enum class OptimizerKind { de, qode, qnde, bfgs_restart, cma_es };

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer_kind(std::string_view name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::de;
  std::size_t population_size = 0;  ///< 0 selects min(10 d, 50) for the DE family, 4 + 3 ln d for CMA-ES
  double de_f = 0.5;
  double de_cr = 0.9;
  double jumping_rate = 0.3;
  double hybrid_split = 0.75;
  double sigma0 = 0.3;  ///< CMA-ES initial step as a fraction of the box width
  std::uint64_t seed = 0;

  void validate() const;
};

/// Applies 'key = value' overrides named after the OptimizerConfig fields.
OptimizerConfig apply_overrides(OptimizerConfig cfg, const std::map<std::string, std::string>& overrides);

struct OptimizerResult {
  RunTrajectory trajectory;
  std::vector<double> best_x;
  double best_fitness = 0.0;

  // Diagnostics.
  std::size_t init_candidates = 0;  ///< QODE: points evaluated during initialisation
  std::size_t init_survivors = 0;   ///< QODE: population kept after initialisation
  std::size_t restarts = 0;         ///< BFGS family: local searches started
  std::vector<double> local_start;  ///< QNDE: first BFGS starting point
  double min_covariance_eigenvalue = 0.0;  ///< CMA-ES: smallest eigenvalue seen
};

/// Deterministic generator shared by every optimizer.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n; }
  double normal() { return normal_(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Quasi-opposite point: uniform per coordinate between the box centre and
/// the opposite point lb + ub - x.
std::vector<double> quasi_opposite(std::span<const double> x, std::span<const double> lb, std::span<const double> ub,
                                   Rng& rng);

/// Folds v back into [lo, hi] by mirror reflection at the bounds.
double reflect_into(double v, double lo, double hi);

OptimizerResult run_de(BudgetedObjective& objective, const OptimizerConfig& cfg);
OptimizerResult run_qode(BudgetedObjective& objective, const OptimizerConfig& cfg);
OptimizerResult run_bfgs_restart(BudgetedObjective& objective, const OptimizerConfig& cfg);
OptimizerResult run_qnde(BudgetedObjective& objective, const OptimizerConfig& cfg);
OptimizerResult run_cmaes(BudgetedObjective& objective, const OptimizerConfig& cfg);

/// Dispatches on cfg.kind.
OptimizerResult run_optimizer(BudgetedObjective& objective, const OptimizerConfig& cfg);

/// Forward-difference gradient with step h_i = 1e-6 (ub_i - lb_i); falls back
/// to a backward step at the upper bound. Costs x.size() evaluations.
std::vector<double> finite_difference_gradient(BudgetedObjective& objective, std::span<const double> x, double fx);

}  // namespace photonbench
