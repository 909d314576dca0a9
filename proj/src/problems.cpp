#include "photonbench/problems.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "photonbench/config.hpp"

namespace photonbench {

namespace {

constexpr std::array<ProblemId, 6> kAllProblems = {ProblemId::mini_bragg,   ProblemId::bragg,
                                                   ProblemId::ellipsometry, ProblemId::photovoltaic,
                                                   ProblemId::big_photovoltaic, ProblemId::huge_photovoltaic};

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + step * static_cast<double>(i);
  out.back() = hi;
  return out;
}

std::vector<tmm::ComplexIndex> alternating_indices(std::size_t layers, const std::vector<double>& permittivities) {
  if (permittivities.empty()) throw std::invalid_argument("layered problem needs at least one permittivity");
  std::vector<tmm::ComplexIndex> out(layers);
  for (std::size_t i = 0; i < layers; ++i)
    out[i] = tmm::ComplexIndex::from_permittivity(permittivities[i % permittivities.size()]);
  return out;
}

}  // namespace

std::string_view to_string(ProblemId id) {
  switch (id) {
    case ProblemId::mini_bragg: return "mini-bragg";
    case ProblemId::bragg: return "bragg";
    case ProblemId::ellipsometry: return "ellipsometry";
    case ProblemId::photovoltaic: return "photovoltaic";
    case ProblemId::big_photovoltaic: return "big-photovoltaic";
    case ProblemId::huge_photovoltaic: return "huge-photovoltaic";
  }
  return "unknown";
}

ProblemId parse_problem_id(std::string_view name) {
  for (auto id : kAllProblems)
    if (to_string(id) == name) return id;
  throw std::invalid_argument(fmt::format("unknown problem instance '{}'", name));
}

const std::array<ProblemId, 6>& all_problem_ids() { return kAllProblems; }

ProblemFamily family_of(ProblemId id) {
  switch (id) {
    case ProblemId::mini_bragg:
    case ProblemId::bragg: return ProblemFamily::bragg;
    case ProblemId::ellipsometry: return ProblemFamily::ellipsometry;
    default: return ProblemFamily::photovoltaic;
  }
}

// ---------------------------------------------------------------------------

bool Bounds::contains(std::span<const double> x) const {
  if (x.size() != size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!(x[i] >= lower[i] && x[i] <= upper[i])) return false;
  return true;
}

void Bounds::check(std::span<const double> x) const {
  if (x.size() != size())
    throw std::invalid_argument(fmt::format("dimension mismatch: expected {}, got {}", size(), x.size()));
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!(x[i] >= lower[i] && x[i] <= upper[i]))
      throw std::invalid_argument(
          fmt::format("coordinate {} = {} outside bounds [{}, {}]", i, x[i], lower[i], upper[i]));
}

std::vector<double> Bounds::center() const {
  std::vector<double> c(size());
  for (std::size_t i = 0; i < size(); ++i) c[i] = 0.5 * (lower[i] + upper[i]);
  return c;
}

Bounds Bounds::uniform(std::size_t dim, double lo, double hi) {
  return {std::vector<double>(dim, lo), std::vector<double>(dim, hi)};
}

ProblemInstance standard_instance(ProblemId id) {
  ProblemInstance p;
  p.id = id;
  auto layered = [&](std::size_t layers, double lo, double hi, std::size_t budget, std::vector<double> eps) {
    p.dimension = layers;
    p.bounds = Bounds::uniform(layers, lo, hi);
    p.budget = budget;
    p.aocc_lb = 0.0;
    p.aocc_ub = 1.0;
    p.layer_permittivities = std::move(eps);
  };
  switch (id) {
    case ProblemId::mini_bragg: layered(10, 0.0, 218.0, 10000, {1.96, 3.24}); break;
    case ProblemId::bragg: layered(20, 0.0, 218.0, 20000, {1.96, 3.24}); break;
    case ProblemId::photovoltaic: layered(10, 30.0, 250.0, 5000, {2.0, 3.0}); break;
    case ProblemId::big_photovoltaic: layered(20, 30.0, 250.0, 10000, {2.0, 3.0}); break;
    case ProblemId::huge_photovoltaic: layered(32, 30.0, 250.0, 16000, {2.0, 3.0}); break;
    case ProblemId::ellipsometry:
      p.dimension = 2;
      p.bounds = {{50.0, 1.1}, {150.0, 3.0}};
      p.budget = 1000;
      p.aocc_lb = 0.0;
      p.aocc_ub = 40.0;
      break;
  }
  return p;
}

ProblemInstance parse_instance(const KeyValueConfig& cfg) {
  cfg.require_known({"id", "dimension", "lower", "upper", "budget", "aocc.lb", "aocc.ub", "permittivity"});
  ProblemInstance p;
  p.id = parse_problem_id(cfg.get_string("id"));
  p.dimension = cfg.get_uint("dimension");
  if (p.dimension == 0) throw std::invalid_argument(cfg.source() + ": dimension must be positive");
  auto expand = [&](const std::string& key) {
    auto v = cfg.get_doubles(key);
    if (v.size() == 1) v.assign(p.dimension, v[0]);
    if (v.size() != p.dimension)
      throw std::invalid_argument(fmt::format("{}: '{}' needs 1 or {} values", cfg.source(), key, p.dimension));
    return v;
  };
  p.bounds = {expand("lower"), expand("upper")};
  for (std::size_t i = 0; i < p.dimension; ++i)
    if (!(p.bounds.lower[i] <= p.bounds.upper[i]))
      throw std::invalid_argument(fmt::format("{}: lower > upper at coordinate {}", cfg.source(), i));
  p.budget = cfg.get_uint("budget");
  if (p.budget == 0) throw std::invalid_argument(cfg.source() + ": budget must be positive");
  p.aocc_lb = cfg.get_double("aocc.lb", 0.0);
  p.aocc_ub = cfg.get_double("aocc.ub");
  if (!(p.aocc_lb < p.aocc_ub)) throw std::invalid_argument(cfg.source() + ": aocc.lb must be < aocc.ub");
  if (cfg.contains("permittivity")) p.layer_permittivities = cfg.get_doubles("permittivity");
  if (family_of(p.id) != ProblemFamily::ellipsometry && p.layer_permittivities.empty())
    throw std::invalid_argument(cfg.source() + ": layered instance needs 'permittivity'");
  if (family_of(p.id) == ProblemFamily::ellipsometry && p.dimension != 2)
    throw std::invalid_argument(cfg.source() + ": ellipsometry has exactly 2 parameters");
  return p;
}

ProblemInstance load_instance(const std::filesystem::path& path) { return parse_instance(KeyValueConfig::load(path)); }

void write_instance(std::ostream& out, const ProblemInstance& p) {
  auto uniform_or_list = [](const std::vector<double>& v) {
    if (std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); })) return fmt::format("{}", v.front());
    return fmt::format("{}", fmt::join(v, ", "));
  };
  out << "id = " << p.name() << '\n';
  out << "dimension = " << p.dimension << '\n';
  out << "lower = " << uniform_or_list(p.bounds.lower) << '\n';
  out << "upper = " << uniform_or_list(p.bounds.upper) << '\n';
  out << "budget = " << p.budget << '\n';
  out << fmt::format("aocc.lb = {}\naocc.ub = {}\n", p.aocc_lb, p.aocc_ub);
  if (!p.layer_permittivities.empty()) out << fmt::format("permittivity = {}\n", fmt::join(p.layer_permittivities, ", "));
}

std::filesystem::path default_instances_dir() { return std::filesystem::path(PHOTONBENCH_SHARE_DIR) / "instances"; }

// ---------------------------------------------------------------------------

BraggObjective::BraggObjective(Bounds bounds, std::vector<double> permittivities, Options options)
    : bounds_(std::move(bounds)), indices_(alternating_indices(bounds_.size(), permittivities)), options_(options) {}

tmm::LayerStack BraggObjective::stack(std::span<const double> thicknesses) const {
  tmm::LayerStack s;
  s.superstrate = {options_.superstrate_index, 0.0};
  s.substrate = {options_.substrate_index, 0.0};
  s.layers.reserve(thicknesses.size());
  for (std::size_t i = 0; i < thicknesses.size(); ++i) s.layers.push_back({thicknesses[i], indices_[i]});
  return s;
}

double BraggObjective::operator()(std::span<const double> thicknesses) const {
  bounds_.check(thicknesses);
  const auto response = tmm::stack_response(stack(thicknesses), {options_.wavelength_nm, 0.0, tmm::Polarization::s});
  return 1.0 - response.R;
}

std::vector<double> BraggObjective::quarter_wave_point() const {
  std::vector<double> x(indices_.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = options_.wavelength_nm / (4.0 * indices_[i].n);
  return x;
}

// ---------------------------------------------------------------------------

double wrap_degrees(double angle_deg) {
  double d = std::fmod(angle_deg, 360.0);
  if (d > 180.0) d -= 360.0;
  if (d <= -180.0) d += 360.0;
  return d;
}

EllipsometryObjective::EllipsometryObjective(Bounds bounds, materials::DispersionTable gold, Options options)
    : bounds_(std::move(bounds)), gold_(std::move(gold)), options_(options) {
  if (bounds_.size() != 2) throw std::invalid_argument("ellipsometry bounds must be 2-dimensional");
  if (options_.wavelength_count < 1) throw std::invalid_argument("ellipsometry needs >= 1 wavelength");
  wavelengths_ = linspace(options_.wavelength_min_nm, options_.wavelength_max_nm, options_.wavelength_count);
  gold_indices_.reserve(wavelengths_.size());
  for (double w : wavelengths_) gold_indices_.push_back(gold_.index_at(w));
  reference_ = spectrum(options_.truth_thickness_nm, options_.truth_permittivity);
}

std::vector<tmm::EllipsometricAngles> EllipsometryObjective::spectrum(double thickness_nm, double permittivity) const {
  std::vector<tmm::EllipsometricAngles> out;
  out.reserve(wavelengths_.size());
  tmm::LayerStack s;
  s.superstrate = {1.0, 0.0};
  s.layers = {{thickness_nm, tmm::ComplexIndex::from_permittivity(permittivity)}};
  for (std::size_t i = 0; i < wavelengths_.size(); ++i) {
    s.substrate = gold_indices_[i];
    out.push_back(tmm::ellipsometric_angles(s, wavelengths_[i], options_.angle_deg));
  }
  return out;
}

double EllipsometryObjective::cost(std::span<const tmm::EllipsometricAngles> model,
                                   std::span<const tmm::EllipsometricAngles> reference, EllipsometryCost form) {
  if (model.size() != reference.size() || model.empty())
    throw std::invalid_argument("ellipsometric spectra must be non-empty and of equal length");
  double sum = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    const double dpsi = model[i].psi_deg - reference[i].psi_deg;
    const double ddelta = wrap_degrees(model[i].delta_deg - reference[i].delta_deg);
    sum += form == EllipsometryCost::absolute ? std::abs(dpsi) + std::abs(ddelta) : dpsi * dpsi + ddelta * ddelta;
  }
  return sum / static_cast<double>(model.size());
}

double EllipsometryObjective::operator()(std::span<const double> params) const {
  bounds_.check(params);
  return cost(spectrum(params[0], params[1]), reference_, options_.cost);
}

// ---------------------------------------------------------------------------

PhotovoltaicObjective::PhotovoltaicObjective(Bounds bounds, std::vector<double> permittivities,
                                             materials::DispersionTable silicon,
                                             const materials::SolarSpectrum& spectrum, Options options)
    : bounds_(std::move(bounds)), indices_(alternating_indices(bounds_.size(), permittivities)), options_(options) {
  if (options_.wavelength_count < 2) throw std::invalid_argument("photovoltaic grid needs >= 2 wavelengths");
  wavelengths_ = linspace(options_.wavelength_min_nm, options_.wavelength_max_nm, options_.wavelength_count);
  const double h = wavelengths_[1] - wavelengths_[0];
  weights_.assign(wavelengths_.size(), h);
  weights_.front() = weights_.back() = 0.5 * h;
  for (std::size_t i = 0; i < wavelengths_.size(); ++i) {
    flux_.push_back(materials::photon_flux(spectrum, wavelengths_[i]));
    silicon_indices_.push_back(silicon.index_at(wavelengths_[i]));
    ideal_ += weights_[i] * flux_[i];
  }
  if (!(ideal_ > 0.0)) throw std::invalid_argument("solar spectrum carries no photons in the photovoltaic band");
}

tmm::LayerStack PhotovoltaicObjective::stack(std::span<const double> thicknesses, std::size_t wavelength_index) const {
  tmm::LayerStack s;
  s.superstrate = {1.0, 0.0};
  s.substrate = {1.0, 0.0};
  s.layers.reserve(thicknesses.size() + 1);
  for (std::size_t i = 0; i < thicknesses.size(); ++i) s.layers.push_back({thicknesses[i], indices_[i]});
  s.layers.push_back({options_.silicon_thickness_nm, silicon_indices_[wavelength_index]});
  return s;
}

std::vector<double> PhotovoltaicObjective::absorptance(std::span<const double> thicknesses) const {
  bounds_.check(thicknesses);
  std::vector<double> a(wavelengths_.size());
  auto s = stack(thicknesses, 0);
  for (std::size_t i = 0; i < wavelengths_.size(); ++i) {
    s.layers.back().index = silicon_indices_[i];
    a[i] = tmm::stack_response(s, {wavelengths_[i], 0.0, tmm::Polarization::s}).A;
  }
  return a;
}

double PhotovoltaicObjective::fitness_from_absorptance(std::span<const double> absorptance) const {
  if (absorptance.size() != wavelengths_.size())
    throw std::invalid_argument("absorptance must be sampled on the photovoltaic wavelength grid");
  double current = 0.0;
  for (std::size_t i = 0; i < absorptance.size(); ++i) current += weights_[i] * absorptance[i] * flux_[i];
  return 1.0 - current / ideal_;
}

double PhotovoltaicObjective::operator()(std::span<const double> thicknesses) const {
  return fitness_from_absorptance(absorptance(thicknesses));
}

// ---------------------------------------------------------------------------

FitnessFunction make_objective(const ProblemInstance& instance, const ProblemContext& context) {
  switch (family_of(instance.id)) {
    case ProblemFamily::bragg: {
      BraggObjective f(instance, context.bragg);
      return [f = std::move(f)](std::span<const double> x) { return f(x); };
    }
    case ProblemFamily::ellipsometry: {
      EllipsometryObjective f(instance.bounds, materials::load_dispersion(context.data_dir / "au_nk.csv"),
                              context.ellipsometry);
      return [f = std::move(f)](std::span<const double> x) { return f(x); };
    }
    case ProblemFamily::photovoltaic: {
      PhotovoltaicObjective f(instance.bounds, instance.layer_permittivities,
                              materials::load_dispersion(context.data_dir / "si_nk.csv"),
                              materials::load_spectrum(context.data_dir / "am15.csv"), context.photovoltaic);
      return [f = std::move(f)](std::span<const double> x) { return f(x); };
    }
  }
  throw std::logic_error("unhandled problem family");
}

// ---------------------------------------------------------------------------

double RunTrajectory::final_best() const {
  if (evals.empty()) throw std::logic_error("empty trajectory has no best value");
  return evals.back().best_so_far;
}

void RunTrajectory::record(double raw_fitness) {
  const double best = evals.empty() ? raw_fitness : std::min(evals.back().best_so_far, raw_fitness);
  evals.push_back({evals.size() + 1, raw_fitness, best});
}

BudgetExhausted::BudgetExhausted(std::size_t budget)
    : std::runtime_error(fmt::format("evaluation budget of {} exhausted", budget)) {}

BudgetedObjective::BudgetedObjective(FitnessFunction f, Bounds bounds, std::size_t budget, std::string instance_id)
    : f_(std::move(f)), bounds_(std::move(bounds)), budget_(budget) {
  trajectory_.instance_id = std::move(instance_id);
  trajectory_.evals.reserve(budget_);
}

double BudgetedObjective::operator()(std::span<const double> x) {
  if (exhausted()) throw BudgetExhausted(budget_);
  bounds_.check(x);
  const double value = f_(x);
  const bool improved = trajectory_.empty() || value < trajectory_.final_best();
  trajectory_.record(value);
  if (improved) best_x_.assign(x.begin(), x.end());
  return value;
}

BudgetedObjective make_budgeted(const ProblemInstance& instance, const ProblemContext& context) {
  return BudgetedObjective(make_objective(instance, context), instance.bounds, instance.budget, instance.name());
}

}  // namespace photonbench
