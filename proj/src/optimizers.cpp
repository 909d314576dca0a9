#include "photonbench/optimizers.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>

#include <fmt/format.h>

namespace photonbench {

std::string_view to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::de: return "de";
    case OptimizerKind::qode: return "qode";
    case OptimizerKind::qnde: return "qnde";
    case OptimizerKind::bfgs_restart: return "bfgs-restart";
    case OptimizerKind::cma_es: return "cma-es";
  }
  return "unknown";
}

OptimizerKind parse_optimizer_kind(std::string_view name) {
  for (auto k : {OptimizerKind::de, OptimizerKind::qode, OptimizerKind::qnde, OptimizerKind::bfgs_restart,
                 OptimizerKind::cma_es})
    if (to_string(k) == name) return k;
  if (name == "bfgs") return OptimizerKind::bfgs_restart;
  if (name == "cmaes") return OptimizerKind::cma_es;
  throw std::invalid_argument(fmt::format("unknown optimizer '{}'", name));
}

void OptimizerConfig::validate() const {
  const bool de_family = kind == OptimizerKind::de || kind == OptimizerKind::qode || kind == OptimizerKind::qnde;
  if (de_family && population_size != 0 && population_size < 4)
    throw std::invalid_argument("DE variants need population_size >= 4");
  if (kind == OptimizerKind::cma_es && population_size != 0 && population_size < 2)
    throw std::invalid_argument("CMA-ES needs population_size >= 2");
  if (!(de_f >= 0.0 && de_f <= 2.0)) throw std::invalid_argument("de_f must lie in [0, 2]");
  if (!(de_cr >= 0.0 && de_cr <= 1.0)) throw std::invalid_argument("de_cr must lie in [0, 1]");
  if (!(jumping_rate >= 0.0 && jumping_rate <= 1.0)) throw std::invalid_argument("jumping_rate must lie in [0, 1]");
  if (!(hybrid_split > 0.0 && hybrid_split < 1.0)) throw std::invalid_argument("hybrid_split must lie in (0, 1)");
  if (!(sigma0 > 0.0)) throw std::invalid_argument("sigma0 must be positive");
}

OptimizerConfig apply_overrides(OptimizerConfig cfg, const std::map<std::string, std::string>& overrides) {
  auto as_double = [](const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
      throw std::invalid_argument(fmt::format("optimizer option '{}' is not a number: '{}'", key, v));
    return out;
  };
  auto as_uint = [](const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
      throw std::invalid_argument(fmt::format("optimizer option '{}' is not an integer: '{}'", key, v));
    return out;
  };
  for (const auto& [key, value] : overrides) {
    if (key == "kind") cfg.kind = parse_optimizer_kind(value);
    else if (key == "population_size") cfg.population_size = as_uint(key, value);
    else if (key == "de_f") cfg.de_f = as_double(key, value);
    else if (key == "de_cr") cfg.de_cr = as_double(key, value);
    else if (key == "jumping_rate") cfg.jumping_rate = as_double(key, value);
    else if (key == "hybrid_split") cfg.hybrid_split = as_double(key, value);
    else if (key == "sigma0") cfg.sigma0 = as_double(key, value);
    else if (key == "seed") cfg.seed = as_uint(key, value);
    else throw std::invalid_argument(fmt::format("unknown optimizer option '{}'", key));
  }
  cfg.validate();
  return cfg;
}

std::vector<double> quasi_opposite(std::span<const double> x, std::span<const double> lb, std::span<const double> ub,
                                   Rng& rng) {
  std::vector<double> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double opposite = lb[j] + ub[j] - x[j];
    const double center = 0.5 * (lb[j] + ub[j]);
    const double lo = std::min(center, opposite);
    const double hi = std::max(center, opposite);
    out[j] = std::clamp(rng.uniform(lo, hi), lb[j], ub[j]);
  }
  return out;
}

double reflect_into(double v, double lo, double hi) {
  if (v >= lo && v <= hi) return v;
  const double width = hi - lo;
  if (!(width > 0.0)) return lo;
  double y = std::fmod(v - lo, 2.0 * width);
  if (y < 0.0) y += 2.0 * width;
  if (y > width) y = 2.0 * width - y;
  return std::clamp(lo + y, lo, hi);
}

namespace {

struct Population {
  std::vector<std::vector<double>> x;
  std::vector<double> f;
  std::size_t size() const { return x.size(); }
};

std::size_t de_population_size(const OptimizerConfig& cfg, std::size_t dim) {
  return cfg.population_size != 0 ? cfg.population_size : std::clamp<std::size_t>(10 * dim, 4, 50);
}

std::vector<double> uniform_point(const Bounds& b, Rng& rng) {
  std::vector<double> x(b.size());
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = rng.uniform(b.lower[j], b.upper[j]);
  return x;
}

// Keeps the `keep` best members, ties resolved by position.
Population select_best(Population pool, std::size_t keep) {
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pool.f[a] < pool.f[b]; });
  Population out;
  for (std::size_t i = 0; i < std::min(keep, order.size()); ++i) {
    out.x.push_back(std::move(pool.x[order[i]]));
    out.f.push_back(pool.f[order[i]]);
  }
  return out;
}

// One rand/1/bin generation against a frozen copy of the population.
// Stops early once `limit` evaluations have been used.
void de_generation(Population& pop, BudgetedObjective& objective, std::size_t limit, const OptimizerConfig& cfg,
                   Rng& rng) {
  const std::size_t np = pop.size();
  const std::size_t dim = objective.dimension();
  const auto& b = objective.bounds();
  const auto parents = pop.x;
  std::vector<double> trial(dim);
  for (std::size_t i = 0; i < np; ++i) {
    if (objective.used() >= limit) return;
    std::size_t r1, r2, r3;
    do r1 = rng.index(np); while (r1 == i);
    do r2 = rng.index(np); while (r2 == i || r2 == r1);
    do r3 = rng.index(np); while (r3 == i || r3 == r1 || r3 == r2);
    const std::size_t forced = rng.index(dim);
    trial = parents[i];
    for (std::size_t j = 0; j < dim; ++j) {
      const bool take = rng.uniform() < cfg.de_cr;
      if (j == forced || take) {
        const double v = parents[r1][j] + cfg.de_f * (parents[r2][j] - parents[r3][j]);
        trial[j] = reflect_into(v, b.lower[j], b.upper[j]);
      }
    }
    const double ft = objective(trial);
    if (ft <= pop.f[i]) {
      pop.x[i] = trial;
      pop.f[i] = ft;
    }
  }
}

Population random_population(BudgetedObjective& objective, std::size_t np, Rng& rng) {
  Population pop;
  for (std::size_t i = 0; i < np; ++i) {
    pop.x.push_back(uniform_point(objective.bounds(), rng));
    pop.f.push_back(objective(pop.x.back()));
  }
  return pop;
}

OptimizerResult finish(const BudgetedObjective& objective, OptimizerResult result) {
  result.trajectory = objective.trajectory();
  result.best_x = objective.best_x();
  result.best_fitness = objective.trajectory().empty() ? std::numeric_limits<double>::infinity()
                                                       : objective.trajectory().final_best();
  return result;
}

// Runs DE until `limit` evaluations have been used in total.
void de_until(BudgetedObjective& objective, std::size_t limit, const OptimizerConfig& cfg, Rng& rng) {
  const std::size_t np = de_population_size(cfg, objective.dimension());
  if (limit - objective.used() < np)
    throw std::invalid_argument(fmt::format("DE needs a budget of at least the population size {}", np));
  auto pop = random_population(objective, np, rng);
  while (objective.used() < limit) de_generation(pop, objective, limit, cfg, rng);
}

// ---------------------------------------------------------------------------
// Bound-constrained BFGS on the unit cube.

struct UnitBox {
  const Bounds& b;
  std::vector<double> to_x(const std::vector<double>& u) const {
    std::vector<double> x(u.size());
    for (std::size_t j = 0; j < u.size(); ++j) x[j] = std::clamp(b.lower[j] + u[j] * b.width(j), b.lower[j], b.upper[j]);
    return x;
  }
  std::vector<double> to_u(std::span<const double> x) const {
    std::vector<double> u(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) u[j] = b.width(j) > 0.0 ? (x[j] - b.lower[j]) / b.width(j) : 0.0;
    return u;
  }
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

constexpr int kMaxLineSearchSteps = 20;
constexpr std::size_t kMaxIterations = 10000;

// Local BFGS descent from (u, f). Returns when converged or stalled; throws
// BudgetExhausted when the budget runs out.
void bfgs_descent(BudgetedObjective& objective, std::vector<double> u, double f) {
  const UnitBox box{objective.bounds()};
  const std::size_t dim = u.size();
  auto unit_gradient = [&](const std::vector<double>& uu, double fu) {
    auto g = finite_difference_gradient(objective, box.to_x(uu), fu);
    for (std::size_t j = 0; j < dim; ++j) g[j] *= objective.bounds().width(j);
    return g;
  };

  std::vector<double> H(dim * dim, 0.0);
  auto reset = [&] {
    std::fill(H.begin(), H.end(), 0.0);
    for (std::size_t j = 0; j < dim; ++j) H[j * dim + j] = 1.0;
  };
  reset();

  auto g = unit_gradient(u, f);
  std::vector<double> p(dim), u_new(dim), s(dim), y(dim);
  for (std::size_t iter = 0; iter < kMaxIterations; ++iter) {
    // Coordinates pinned at a bound with the gradient pushing outward are inactive.
    std::vector<double> pg = g;
    for (std::size_t j = 0; j < dim; ++j)
      if ((u[j] <= 0.0 && g[j] > 0.0) || (u[j] >= 1.0 && g[j] < 0.0)) pg[j] = 0.0;
    if (std::sqrt(dot(pg, pg)) < 1e-12) return;

    for (std::size_t i = 0; i < dim; ++i) {
      p[i] = 0.0;
      for (std::size_t j = 0; j < dim; ++j) p[i] -= H[i * dim + j] * pg[j];
    }
    if (dot(p, pg) >= 0.0) {
      reset();
      for (std::size_t j = 0; j < dim; ++j) p[j] = -pg[j];
    }

    bool accepted = false;
    double f_new = f;
    double alpha = 1.0;
    for (int ls = 0; ls < kMaxLineSearchSteps; ++ls, alpha *= 0.5) {
      for (std::size_t j = 0; j < dim; ++j) u_new[j] = std::clamp(u[j] + alpha * p[j], 0.0, 1.0);
      for (std::size_t j = 0; j < dim; ++j) s[j] = u_new[j] - u[j];
      if (std::all_of(s.begin(), s.end(), [](double v) { return v == 0.0; })) return;
      f_new = objective(box.to_x(u_new));
      if (f_new <= f + 1e-4 * dot(g, s)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) return;

    const auto g_new = unit_gradient(u_new, f_new);
    for (std::size_t j = 0; j < dim; ++j) y[j] = g_new[j] - g[j];
    const double sy = dot(s, y);
    if (sy > 1e-12 * std::sqrt(dot(s, s) * dot(y, y))) {
      // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
      const double rho = 1.0 / sy;
      std::vector<double> hy(dim, 0.0);
      for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) hy[i] += H[i * dim + j] * y[j];
      const double yhy = dot(y, hy);
      for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j)
          H[i * dim + j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
    }
    const double step = std::sqrt(dot(s, s));
    u = u_new;
    f = f_new;
    g = g_new;
    if (step < 1e-12) return;
  }
}

// Restarted BFGS until the budget is spent; the first descent starts from
// `start` when given.
void bfgs_restarts(BudgetedObjective& objective, Rng& rng, OptimizerResult& result,
                   std::optional<std::pair<std::vector<double>, double>> start) {
  const UnitBox box{objective.bounds()};
  try {
    while (!objective.exhausted()) {
      std::vector<double> u;
      double f;
      if (start) {
        u = box.to_u(start->first);
        f = start->second;
        start.reset();
      } else {
        u.resize(objective.dimension());
        for (auto& v : u) v = rng.uniform();
        f = objective(box.to_x(u));
      }
      ++result.restarts;
      bfgs_descent(objective, std::move(u), f);
    }
  } catch (const BudgetExhausted&) {
  }
}

}  // namespace

std::vector<double> finite_difference_gradient(BudgetedObjective& objective, std::span<const double> x, double fx) {
  const auto& b = objective.bounds();
  std::vector<double> g(x.size(), 0.0);
  std::vector<double> probe(x.begin(), x.end());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double h = 1e-6 * b.width(j);
    if (!(h > 0.0)) continue;
    const bool forward = x[j] + h <= b.upper[j];
    probe[j] = forward ? x[j] + h : x[j] - h;
    const double step = probe[j] - x[j];
    const double fp = objective(probe);
    g[j] = (fp - fx) / step;
    probe[j] = x[j];
  }
  return g;
}

OptimizerResult run_de(BudgetedObjective& objective, const OptimizerConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  de_until(objective, objective.budget(), cfg, rng);
  return finish(objective, {});
}

OptimizerResult run_qode(BudgetedObjective& objective, const OptimizerConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const std::size_t np = de_population_size(cfg, objective.dimension());
  if (objective.remaining() < 2 * np)
    throw std::invalid_argument(fmt::format("QODE needs a budget of at least twice the population size {}", np));
  const auto& b = objective.bounds();

  // Quasi-oppositional initialisation: np random points and their quasi-opposites.
  Population pool = random_population(objective, np, rng);
  for (std::size_t i = 0; i < np; ++i) {
    pool.x.push_back(quasi_opposite(pool.x[i], b.lower, b.upper, rng));
    pool.f.push_back(objective(pool.x.back()));
  }
  OptimizerResult result;
  result.init_candidates = pool.size();
  Population pop = select_best(std::move(pool), np);
  result.init_survivors = pop.size();

  const std::size_t limit = objective.budget();
  while (objective.used() < limit) {
    if (rng.uniform() < cfg.jumping_rate) {
      // Generation jumping over the population's current extent.
      std::vector<double> lo(b.size(), std::numeric_limits<double>::infinity());
      std::vector<double> hi(b.size(), -std::numeric_limits<double>::infinity());
      for (const auto& x : pop.x)
        for (std::size_t j = 0; j < x.size(); ++j) {
          lo[j] = std::min(lo[j], x[j]);
          hi[j] = std::max(hi[j], x[j]);
        }
      Population jumped = pop;
      for (std::size_t i = 0; i < np && objective.used() < limit; ++i) {
        jumped.x.push_back(quasi_opposite(pop.x[i], lo, hi, rng));
        jumped.f.push_back(objective(jumped.x.back()));
      }
      pop = select_best(std::move(jumped), np);
    } else {
      de_generation(pop, objective, limit, cfg, rng);
    }
  }
  return finish(objective, std::move(result));
}

OptimizerResult run_bfgs_restart(BudgetedObjective& objective, const OptimizerConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  OptimizerResult result;
  bfgs_restarts(objective, rng, result, std::nullopt);
  return finish(objective, std::move(result));
}

OptimizerResult run_qnde(BudgetedObjective& objective, const OptimizerConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const auto phase_one = static_cast<std::size_t>(std::floor(cfg.hybrid_split * static_cast<double>(objective.remaining())));
  de_until(objective, objective.used() + phase_one, cfg, rng);

  OptimizerResult result;
  result.local_start = objective.best_x();
  bfgs_restarts(objective, rng, result, std::make_pair(objective.best_x(), objective.trajectory().final_best()));
  return finish(objective, std::move(result));
}

OptimizerResult run_optimizer(BudgetedObjective& objective, const OptimizerConfig& cfg) {
  switch (cfg.kind) {
    case OptimizerKind::de: return run_de(objective, cfg);
    case OptimizerKind::qode: return run_qode(objective, cfg);
    case OptimizerKind::qnde: return run_qnde(objective, cfg);
    case OptimizerKind::bfgs_restart: return run_bfgs_restart(objective, cfg);
    case OptimizerKind::cma_es: return run_cmaes(objective, cfg);
  }
  throw std::logic_error("unhandled optimizer kind");
}

}  // namespace photonbench
