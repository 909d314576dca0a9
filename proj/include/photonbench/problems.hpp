#pragma once

// The three photonic objectives and the six benchmark instances, exposed as
// bounded minimisation black boxes with optional budget accounting.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "photonbench/materials.hpp"
#include "photonbench/tmm.hpp"

namespace photonbench {

class KeyValueConfig;

enum class ProblemId { mini_bragg, bragg, ellipsometry, photovoltaic, big_photovoltaic, huge_photovoltaic };

std::string_view to_string(ProblemId id);
ProblemId parse_problem_id(std::string_view name);
const std::array<ProblemId, 6>& all_problem_ids();

enum class ProblemFamily { bragg, ellipsometry, photovoltaic };
ProblemFamily family_of(ProblemId id);

struct Bounds {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t size() const { return lower.size(); }
  double width(std::size_t i) const { return upper[i] - lower[i]; }
  bool contains(std::span<const double> x) const;
  /// std::invalid_argument on dimension mismatch or any coordinate outside.
  void check(std::span<const double> x) const;
  std::vector<double> center() const;

  static Bounds uniform(std::size_t dim, double lo, double hi);
  friend bool operator==(const Bounds&, const Bounds&) = default;
};

struct ProblemInstance {
  ProblemId id = ProblemId::mini_bragg;
  std::size_t dimension = 0;
  Bounds bounds;
  std::size_t budget = 0;
  double aocc_lb = 0.0;
  double aocc_ub = 1.0;
  /// Alternating layer permittivities (first optimised layer first);
  /// empty for ellipsometry, whose permittivity is a variable.
  std::vector<double> layer_permittivities;

  std::string name() const { return std::string(to_string(id)); }
  friend bool operator==(const ProblemInstance&, const ProblemInstance&) = default;
};

/// Built-in instance settings (layers, bounds, budget, AOCC bounds).
ProblemInstance standard_instance(ProblemId id);

ProblemInstance parse_instance(const KeyValueConfig& cfg);
ProblemInstance load_instance(const std::filesystem::path& path);
void write_instance(std::ostream& out, const ProblemInstance& instance);
std::filesystem::path default_instances_dir();

using FitnessFunction = std::function<double(std::span<const double>)>;

// ---------------------------------------------------------------------------
// Objectives

/// 1 - R of an alternating two-material stack at a single wavelength,
/// normal incidence, s polarisation.
class BraggObjective {
 public:
  struct Options {
    double wavelength_nm = 600.0;
    double superstrate_index = 1.0;
    double substrate_index = 1.0;
  };

  BraggObjective(Bounds bounds, std::vector<double> permittivities, Options options);
  BraggObjective(const ProblemInstance& instance, Options options) : BraggObjective(instance.bounds, instance.layer_permittivities, options) {}

  double operator()(std::span<const double> thicknesses) const;
  tmm::LayerStack stack(std::span<const double> thicknesses) const;
  /// Quarter-wave thickness of every layer at the design wavelength.
  std::vector<double> quarter_wave_point() const;
  const Bounds& bounds() const { return bounds_; }

 private:
  Bounds bounds_;
  std::vector<tmm::ComplexIndex> indices_;
  Options options_;
};

enum class EllipsometryCost { absolute, quadratic };

/// Mean absolute (or squared) psi and wrapped-delta mismatch, in degrees,
/// between a one-layer film on gold and a reference film.
class EllipsometryObjective {
 public:
  struct Options {
    double truth_thickness_nm = 100.0;
    double truth_permittivity = 2.25;
    double angle_deg = 40.0;
    std::size_t wavelength_count = 100;
    double wavelength_min_nm = 400.0;
    double wavelength_max_nm = 800.0;
    EllipsometryCost cost = EllipsometryCost::absolute;
  };

  EllipsometryObjective(Bounds bounds, materials::DispersionTable gold, Options options);

  double operator()(std::span<const double> params) const;
  std::vector<tmm::EllipsometricAngles> spectrum(double thickness_nm, double permittivity) const;
  const std::vector<double>& wavelengths() const { return wavelengths_; }
  const std::vector<tmm::EllipsometricAngles>& reference() const { return reference_; }
  const Options& options() const { return options_; }

  static double cost(std::span<const tmm::EllipsometricAngles> model,
                     std::span<const tmm::EllipsometricAngles> reference, EllipsometryCost form);

 private:
  Bounds bounds_;
  materials::DispersionTable gold_;
  Options options_;
  std::vector<double> wavelengths_;
  std::vector<tmm::ComplexIndex> gold_indices_;
  std::vector<tmm::EllipsometricAngles> reference_;
};

/// Wraps an angle difference in degrees into (-180, 180].
double wrap_degrees(double angle_deg);

/// 1 - j_sc / j_ideal for an anti-reflection coating on a thick silicon slab.
class PhotovoltaicObjective {
 public:
  struct Options {
    double silicon_thickness_nm = 30000.0;
    std::size_t wavelength_count = 300;
    double wavelength_min_nm = 375.0;
    double wavelength_max_nm = 750.0;
  };

  PhotovoltaicObjective(Bounds bounds, std::vector<double> permittivities, materials::DispersionTable silicon,
                        const materials::SolarSpectrum& spectrum, Options options);

  double operator()(std::span<const double> thicknesses) const;
  /// Absorbed fraction at every grid wavelength.
  std::vector<double> absorptance(std::span<const double> thicknesses) const;
  /// Fitness from an arbitrary absorptance curve sampled on wavelengths().
  double fitness_from_absorptance(std::span<const double> absorptance) const;
  tmm::LayerStack stack(std::span<const double> thicknesses, std::size_t wavelength_index) const;

  const std::vector<double>& wavelengths() const { return wavelengths_; }
  const std::vector<double>& photon_flux() const { return flux_; }
  double ideal_current() const { return ideal_; }

 private:
  Bounds bounds_;
  std::vector<tmm::ComplexIndex> indices_;
  Options options_;
  std::vector<double> wavelengths_;
  std::vector<double> flux_;
  std::vector<double> weights_;  // trapezoid weights
  std::vector<tmm::ComplexIndex> silicon_indices_;
  double ideal_ = 0.0;
};

/// Everything objective construction needs beyond the instance itself.
struct ProblemContext {
  std::filesystem::path data_dir = materials::default_data_dir();
  BraggObjective::Options bragg;
  EllipsometryObjective::Options ellipsometry;
  PhotovoltaicObjective::Options photovoltaic;
};

FitnessFunction make_objective(const ProblemInstance& instance, const ProblemContext& context = {});

// ---------------------------------------------------------------------------
// Budget accounting

struct EvaluationRecord {
  std::size_t index = 0;  ///< 1-based evaluation number
  double raw_fitness = 0.0;
  double best_so_far = 0.0;
  friend bool operator==(const EvaluationRecord&, const EvaluationRecord&) = default;
};

struct RunTrajectory {
  std::string instance_id;
  std::vector<EvaluationRecord> evals;

  std::size_t size() const { return evals.size(); }
  bool empty() const { return evals.empty(); }
  double final_best() const;
  /// Appends the next evaluation and updates the running minimum.
  void record(double raw_fitness);
  friend bool operator==(const RunTrajectory&, const RunTrajectory&) = default;
};

class BudgetExhausted : public std::runtime_error {
 public:
  explicit BudgetExhausted(std::size_t budget);
};

/// Owns a fitness function, a counter and the trajectory of one run.
/// Single owner; not thread-safe.
class BudgetedObjective {
 public:
  BudgetedObjective(FitnessFunction f, Bounds bounds, std::size_t budget, std::string instance_id = {});

  /// Throws BudgetExhausted once the budget is spent and std::invalid_argument
  /// for a wrong dimension or an out-of-bounds point; neither consumes budget.
  double operator()(std::span<const double> x);

  std::size_t used() const { return trajectory_.size(); }
  std::size_t budget() const { return budget_; }
  std::size_t remaining() const { return budget_ - used(); }
  bool exhausted() const { return used() >= budget_; }
  std::size_t dimension() const { return bounds_.size(); }
  const Bounds& bounds() const { return bounds_; }
  const RunTrajectory& trajectory() const { return trajectory_; }
  const std::vector<double>& best_x() const { return best_x_; }

 private:
  FitnessFunction f_;
  Bounds bounds_;
  std::size_t budget_;
  RunTrajectory trajectory_;
  std::vector<double> best_x_;
};

BudgetedObjective make_budgeted(const ProblemInstance& instance, const ProblemContext& context = {});

}  // namespace photonbench
