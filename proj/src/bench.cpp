#include "photonbench/bench.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include <fmt/format.h>

#include "photonbench/config.hpp"

namespace photonbench {

void BenchPlan::validate() const {
  if (runs < 1) throw std::invalid_argument("a plan needs runs >= 1");
  if (workers < 1) throw std::invalid_argument("a plan needs workers >= 1");
  if (instances.empty()) throw std::invalid_argument("a plan needs at least one instance");
  if (algorithms.empty()) throw std::invalid_argument("a plan needs at least one algorithm");
  if (name.empty() || name.find('/') != std::string::npos) throw std::invalid_argument("invalid plan name");
  for (const auto& a : algorithms) {
    if (a.name.empty() || a.name.find('/') != std::string::npos)
      throw std::invalid_argument(fmt::format("invalid algorithm name '{}'", a.name));
    if (!a.optimizer && a.command.empty())
      throw std::invalid_argument(fmt::format("algorithm '{}' has neither an optimizer nor a command", a.name));
  }
}

BenchAlgorithm resolve_algorithm(const std::string& name, const KeyValueConfig& cfg) {
  BenchAlgorithm algo;
  algo.name = name;
  auto options = cfg.with_prefix("algo." + name + ".");
  if (auto it = options.find("command"); it != options.end()) {
    algo.command = split_list(it->second);
    if (algo.command.empty()) throw std::invalid_argument(fmt::format("algorithm '{}' has an empty command", name));
    return algo;
  }
  OptimizerConfig oc;
  if (!options.count("kind")) oc.kind = parse_optimizer_kind(name);
  algo.optimizer = apply_overrides(oc, options);
  return algo;
}

ProblemInstance resolve_instance(const std::string& spec) {
  if (spec.ends_with(".cfg") || spec.find('/') != std::string::npos) return load_instance(spec);
  return standard_instance(parse_problem_id(spec));
}

BenchPlan parse_plan(const KeyValueConfig& cfg) {
  cfg.require_known({"name", "instances", "algorithms", "runs", "seed", "workers", "out", "budget_override", "timeout"},
                    {"algo."});
  BenchPlan plan;
  plan.name = cfg.get_string("name", plan.name);
  for (const auto& spec : cfg.get_list("instances")) plan.instances.push_back(resolve_instance(spec));
  for (const auto& name : cfg.get_list("algorithms")) plan.algorithms.push_back(resolve_algorithm(name, cfg));
  plan.runs = cfg.get_uint("runs", plan.runs);
  plan.base_seed = cfg.get_uint("seed", plan.base_seed);
  plan.workers = cfg.get_uint("workers", plan.workers);
  plan.out_dir = cfg.get_string("out", plan.out_dir.string());
  plan.sandbox.timeout_s = cfg.get_double("timeout", plan.sandbox.timeout_s);
  if (cfg.contains("budget_override")) {
    const auto budget = cfg.get_uint("budget_override");
    if (budget == 0) throw std::invalid_argument("budget_override must be positive");
    for (auto& inst : plan.instances) inst.budget = budget;
  }
  plan.validate();
  return plan;
}

BenchPlan load_plan(const std::filesystem::path& path) {
  auto plan = parse_plan(KeyValueConfig::load(path));
  return plan;
}

namespace {

struct Cell {
  const ProblemInstance* instance;
  const BenchAlgorithm* algorithm;
  std::size_t run;
};

CellResult run_cell(const BenchPlan& plan, const Cell& cell) {
  CellResult r;
  r.instance = cell.instance->name();
  r.algorithm = cell.algorithm->name;
  r.run = cell.run;
  r.seed = plan.base_seed + cell.run;
  r.file = plan.result_dir() / r.instance / r.algorithm / fmt::format("run_{}.csv", cell.run);
  try {
    RunTrajectory trajectory;
    if (cell.algorithm->optimizer) {
      auto objective = make_budgeted(*cell.instance, plan.context);
      auto oc = *cell.algorithm->optimizer;
      oc.seed = r.seed;
      trajectory = run_optimizer(objective, oc).trajectory;
    } else {
      auto res = run_candidate(cell.algorithm->command, *cell.instance, r.seed, plan.sandbox, plan.context);
      if (res.status != RunStatus::ok) {
        r.error = fmt::format("{}: {}", to_string(res.status), res.detail);
        return r;
      }
      trajectory = std::move(res.trajectory);
    }
    if (trajectory.empty()) {
      r.error = "no evaluations";
      return r;
    }
    r.summary = summarize_run(trajectory, AoccConfig::for_instance(*cell.instance), cell.instance->budget);
    emit_run_csv(r.file, trajectory,
                 {r.instance, r.algorithm, cell.run, cell.instance->budget, r.seed});
    r.ok = true;
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  return r;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

}  // namespace

BenchResult run_bench(const BenchPlan& plan) {
  plan.validate();
  std::vector<Cell> cells;
  for (const auto& inst : plan.instances)
    for (const auto& algo : plan.algorithms)
      for (std::size_t k = 0; k < plan.runs; ++k) cells.push_back({&inst, &algo, k});

  BenchResult result;
  result.dir = plan.result_dir();
  std::filesystem::create_directories(result.dir);
  result.cells.resize(cells.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) result.cells[i] = run_cell(plan, cells[i]);
  };
  const std::size_t n_threads = std::min(plan.workers, cells.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  result.aggregate = aggregate_cells(result.cells);
  write_aggregate_csv(result.dir / "aggregate.csv", result.aggregate);
  std::ofstream failures(result.dir / "failures.csv", std::ios::binary | std::ios::trunc);
  failures << "instance,algorithm,run,seed,error\n";
  for (const auto& c : result.cells)
    if (!c.ok)
      failures << c.instance << ',' << c.algorithm << ',' << c.run << ',' << c.seed << ',' << csv_field(c.error)
               << '\n';
  return result;
}

std::vector<AggregateRow> aggregate_cells(std::vector<CellResult> cells) {
  std::sort(cells.begin(), cells.end(), [](const CellResult& a, const CellResult& b) {
    return std::tie(a.instance, a.algorithm, a.run) < std::tie(b.instance, b.algorithm, b.run);
  });
  std::vector<AggregateRow> rows;
  std::vector<RunSummary> ok;
  auto flush = [&] {
    if (!ok.empty()) rows.back().stats = summarize_runs(ok);
    ok.clear();
  };
  for (const auto& c : cells) {
    if (rows.empty() || rows.back().instance != c.instance || rows.back().algorithm != c.algorithm) {
      flush();
      rows.push_back({c.instance, c.algorithm, 0, 0, {}});
    }
    if (c.ok) {
      ++rows.back().runs_ok;
      ok.push_back(c.summary);
    } else {
      ++rows.back().runs_failed;
    }
  }
  flush();
  return rows;
}

void write_aggregate_csv(const std::filesystem::path& path, const std::vector<AggregateRow>& rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  out << "instance,algorithm,runs_ok,runs_failed,aocc_mean,aocc_std,y_best_mean,y_best_std\n";
  for (const auto& r : rows)
    out << r.instance << ',' << r.algorithm << ',' << r.runs_ok << ',' << r.runs_failed << ','
        << format_double(r.stats.aocc_mean) << ',' << format_double(r.stats.aocc_std) << ','
        << format_double(r.stats.y_best_mean) << ',' << format_double(r.stats.y_best_std) << '\n';
}

std::pair<std::size_t, std::size_t> LandscapeScan::argmin() const {
  std::pair<std::size_t, std::size_t> best{0, 0};
  for (std::size_t a = 0; a < values.size(); ++a)
    for (std::size_t b = 0; b < values[a].size(); ++b)
      if (values[a][b] < values[best.first][best.second]) best = {a, b};
  return best;
}

LandscapeScan landscape_scan(const FitnessFunction& f, const Bounds& bounds, std::size_t i, std::size_t j,
                             std::size_t grid, std::optional<std::vector<double>> fixed) {
  const std::size_t dim = bounds.size();
  if (dim < 2) throw std::invalid_argument("landscape scans need at least two dimensions");
  if (i >= dim || j >= dim)
    throw std::out_of_range(fmt::format("coordinates ({}, {}) out of range for dimension {}", i, j, dim));
  if (i == j) throw std::invalid_argument("landscape coordinates must differ");
  if (grid < 2) throw std::invalid_argument("landscape grid must be at least 2");

  LandscapeScan scan;
  scan.i = i;
  scan.j = j;
  scan.fixed = fixed ? std::move(*fixed) : bounds.center();
  bounds.check(scan.fixed);
  auto axis = [&](std::size_t c) {
    std::vector<double> v(grid);
    for (std::size_t a = 0; a < grid; ++a)
      v[a] = a + 1 == grid ? bounds.upper[c]
                           : bounds.lower[c] + bounds.width(c) * static_cast<double>(a) / static_cast<double>(grid - 1);
    return v;
  };
  scan.xi = axis(i);
  scan.xj = axis(j);
  scan.values.assign(grid, std::vector<double>(grid));
  auto x = scan.fixed;
  for (std::size_t a = 0; a < grid; ++a)
    for (std::size_t b = 0; b < grid; ++b) {
      x[i] = scan.xi[a];
      x[j] = scan.xj[b];
      scan.values[a][b] = f(x);
      ++scan.evaluations;
    }
  return scan;
}

void write_landscape_csv(std::ostream& out, const LandscapeScan& scan, const std::string& instance) {
  out << "# instance=" << instance << '\n'
      << "# rows=x" << scan.i << '\n'
      << "# columns=x" << scan.j << '\n'
      << "# budget=bypassed\n"
      << "# fixed=";
  for (std::size_t k = 0; k < scan.fixed.size(); ++k) out << (k ? ";" : "") << format_double(scan.fixed[k]);
  out << '\n' << "x" << scan.i << "\\x" << scan.j;
  for (double v : scan.xj) out << ',' << format_double(v);
  out << '\n';
  for (std::size_t a = 0; a < scan.xi.size(); ++a) {
    out << format_double(scan.xi[a]);
    for (double v : scan.values[a]) out << ',' << format_double(v);
    out << '\n';
  }
}

}  // namespace photonbench
