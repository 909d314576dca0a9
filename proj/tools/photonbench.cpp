// photonbench command-line interface.
//
// Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "photonbench/bench.hpp"
#include "photonbench/config.hpp"
#include "photonbench/discovery.hpp"
#include "photonbench/llm_client.hpp"
#include "photonbench/materials.hpp"
#include "photonbench/metrics.hpp"
#include "photonbench/problems.hpp"
#include "photonbench/svg.hpp"
#include "photonbench/tmm.hpp"

namespace pb = photonbench;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kFailure = 2;

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Shared physics options

struct ContextFlags {
  std::string data_dir;
  double truth_thickness = 100.0;
  double truth_permittivity = 2.25;
  std::string ellipsometry_cost = "absolute";

  void attach(CLI::App* app) {
    app->add_option("--data-dir", data_dir, "Directory holding au_nk.csv, si_nk.csv and am15.csv");
    app->add_option("--truth-thickness", truth_thickness, "Ellipsometry reference thickness (nm)");
    app->add_option("--truth-permittivity", truth_permittivity, "Ellipsometry reference permittivity");
    app->add_option("--ellipsometry-cost", ellipsometry_cost, "absolute or quadratic")
        ->check(CLI::IsMember({"absolute", "quadratic"}));
  }

  pb::ProblemContext build() const {
    pb::ProblemContext ctx;
    if (!data_dir.empty()) ctx.data_dir = data_dir;
    ctx.ellipsometry.truth_thickness_nm = truth_thickness;
    ctx.ellipsometry.truth_permittivity = truth_permittivity;
    ctx.ellipsometry.cost =
        ellipsometry_cost == "quadratic" ? pb::EllipsometryCost::quadratic : pb::EllipsometryCost::absolute;
    return ctx;
  }
};

pb::ProblemInstance resolve_instance(const std::string& spec, std::size_t budget_override) {
  pb::ProblemInstance inst;
  try {
    inst = pb::resolve_instance(spec);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (budget_override) inst.budget = budget_override;
  return inst;
}

// ---------------------------------------------------------------------------
// Config file merging: keys name long options of the active subcommand and
// are only applied when the flag is absent from the command line.

std::optional<std::string> find_config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].starts_with("--config=")) return args[i].substr(9);
  }
  return std::nullopt;
}

std::vector<std::string> merge_config(CLI::App& app, std::vector<std::string> args) {
  const auto path = find_config_path(args);
  if (!path) return args;
  CLI::App* sub = nullptr;
  for (const auto& a : args)
    if (!a.starts_with("-")) {
      sub = app.get_subcommand_no_throw(a);
      break;
    }
  if (!sub) return args;

  const auto cfg = pb::KeyValueConfig::load(*path);
  auto present = [&](const CLI::Option* opt) {
    for (const auto& a : args) {
      if (!a.starts_with("--")) continue;
      const auto name = a.substr(0, a.find('='));
      if (opt->check_name(name)) return true;
    }
    return false;
  };
  for (const auto& key : cfg.keys()) {
    if (key == "config") throw UsageError("config files cannot include other config files");
    const auto* opt = sub->get_option_no_throw("--" + key);
    if (!opt) throw UsageError(fmt::format("{}: unknown key '{}' for '{}'", *path, key, sub->get_name()));
    if (present(opt)) continue;
    if (opt->get_expected_max() == 0) {
      if (cfg.get_bool(key, false)) args.push_back("--" + key);
      continue;
    }
    const auto values = pb::split_list(cfg.get_string(key));
    if (values.empty()) continue;
    args.push_back("--" + key);
    for (const auto& v : values) args.push_back(v);
  }
  return args;
}

void print_resolved(const CLI::App* sub) {
  std::cout << "# resolved configuration for '" << sub->get_name() << "'\n";
  std::istringstream in(sub->config_to_str(true, false));
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && !line.starts_with("config")) std::cout << "#   " << line << '\n';
  std::cout.flush();
}

// ---------------------------------------------------------------------------
// validate

struct Check {
  std::string name;
  bool pass;
  std::string detail;
};

std::vector<Check> run_checks(const pb::ProblemContext& ctx) {
  std::vector<Check> checks;
  auto guard = [&](const std::string& name, auto&& fn) {
    try {
      checks.push_back(fn());
    } catch (const std::exception& e) {
      checks.push_back({name, false, e.what()});
    }
  };

  std::optional<pb::materials::DispersionTable> gold, silicon;
  std::optional<pb::materials::SolarSpectrum> sun;
  guard("data:au_nk", [&] {
    gold = pb::materials::load_dispersion(ctx.data_dir / "au_nk.csv");
    (void)gold->index_at(400.0), (void)gold->index_at(800.0);
    return Check{"data:au_nk", true, fmt::format("{} rows", gold->samples().size())};
  });
  guard("data:si_nk", [&] {
    silicon = pb::materials::load_dispersion(ctx.data_dir / "si_nk.csv");
    (void)silicon->index_at(375.0), (void)silicon->index_at(750.0);
    return Check{"data:si_nk", true, fmt::format("{} rows", silicon->samples().size())};
  });
  guard("data:am15", [&] {
    sun = pb::materials::load_spectrum(ctx.data_dir / "am15.csv");
    (void)sun->irradiance_at(375.0), (void)sun->irradiance_at(750.0);
    return Check{"data:am15", true, fmt::format("{} rows", sun->samples().size())};
  });

  guard("fresnel:normal", [&] {
    const pb::tmm::PlaneWave w{600.0, 0.0, pb::tmm::Polarization::s};
    const double R = std::norm(pb::tmm::fresnel_interface({1.0, 0.0}, {1.5, 0.0}, w).r);
    return Check{"fresnel:normal", std::abs(R - 0.04) < 1e-12, fmt::format("R = {:.17g}", R)};
  });
  guard("fresnel:brewster", [&] {
    const double theta = std::atan(1.5) * 180.0 / M_PI;
    const pb::tmm::PlaneWave w{600.0, theta, pb::tmm::Polarization::p};
    const double R = std::norm(pb::tmm::fresnel_interface({1.0, 0.0}, {1.5, 0.0}, w).r);
    return Check{"fresnel:brewster", R < 1e-12, fmt::format("R_p = {:.3g} at {:.6f} deg", R, theta)};
  });
  guard("energy-conservation", [&] {
    std::mt19937_64 gen(12345);
    std::uniform_real_distribution<double> idx(1.0, 3.0), thick(0.0, 300.0), ang(0.0, 80.0), wl(400.0, 800.0);
    double worst = 0.0;
    for (int s = 0; s < 200; ++s) {
      pb::tmm::LayerStack st{{1.0, 0.0}, {}, {idx(gen), 0.0}};
      for (int l = 0; l < 8; ++l) st.layers.push_back({thick(gen), {idx(gen), 0.0}});
      for (auto pol : {pb::tmm::Polarization::s, pb::tmm::Polarization::p}) {
        const auto r = pb::tmm::stack_response(st, {wl(gen), ang(gen), pol});
        worst = std::max(worst, std::abs(r.R + r.T - 1.0));
      }
    }
    return Check{"energy-conservation", worst < 1e-9, fmt::format("max |R+T-1| = {:.3g} over 400 cases", worst)};
  });
  guard("quarter-wave", [&] {
    const auto inst = pb::standard_instance(pb::ProblemId::mini_bragg);
    const pb::BraggObjective f(inst, ctx.bragg);
    const double fqw = f(f.quarter_wave_point());
    // Closed form for a lossless quarter-wave stack between identical media.
    double y = 1.0;
    const auto& eps = inst.layer_permittivities;
    for (std::size_t l = 0; l < inst.dimension; ++l) y *= l % 2 == 0 ? 1.0 / eps[l % eps.size()] : eps[l % eps.size()];
    const double r = (1.0 - y) / (1.0 + y);
    const double analytic = 1.0 - r * r;
    return Check{"quarter-wave", std::abs(fqw - analytic) < 1e-12,
                 fmt::format("f_qw = {:.17g} (closed form {:.17g})", fqw, analytic)};
  });
  guard("aocc:hand-cases", [&] {
    pb::RunTrajectory t;
    t.record(0.5);
    t.record(0.25);
    const double a = pb::aocc(t, {0.0, 1.0, false}, 2);
    pb::RunTrajectory top, bottom;
    top.record(1.0), top.record(1.0);
    bottom.record(0.0), bottom.record(0.0);
    const double a_top = pb::aocc(top, {0.0, 1.0, false}, 2);
    const double a_bottom = pb::aocc(bottom, {0.0, 1.0, false}, 2);
    const bool ok = a == 0.625 && a_top == 0.0 && a_bottom == 1.0;
    return Check{"aocc:hand-cases", ok, fmt::format("{} / {} / {}", a, a_top, a_bottom)};
  });
  guard("ellipsometry:self-match", [&] {
    const auto inst = pb::standard_instance(pb::ProblemId::ellipsometry);
    const auto f = pb::make_objective(inst, ctx);
    const std::vector<double> truth{ctx.ellipsometry.truth_thickness_nm, ctx.ellipsometry.truth_permittivity};
    const double v = f(truth);
    return Check{"ellipsometry:self-match", std::abs(v) < 1e-10, fmt::format("cost at truth = {:.3g}", v)};
  });
  guard("photovoltaic:range", [&] {
    const auto inst = pb::standard_instance(pb::ProblemId::photovoltaic);
    const auto f = pb::make_objective(inst, ctx);
    const double v = f(inst.bounds.center());
    return Check{"photovoltaic:range", v > 0.0 && v < 1.0, fmt::format("fitness at bounds centre = {:.6f}", v)};
  });
  return checks;
}

int cmd_validate(const ContextFlags& flags) {
  const auto checks = run_checks(flags.build());
  int failed = 0;
  for (const auto& c : checks) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    failed += !c.pass;
  }
  std::cout << fmt::format("{} checks, {} failed\n", checks.size(), failed);
  if (failed) {
    for (const auto& c : checks)
      if (!c.pass) std::cerr << "validate: check '" << c.name << "' failed\n";
    return kFailure;
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// bench

struct BenchFlags {
  std::string plan_file;
  std::vector<std::string> instances;
  std::vector<std::string> algorithms;
  std::size_t runs = 15;
  std::uint64_t seed = 0;
  std::size_t budget_override = 0;
  std::size_t workers = 1;
  std::string out = "results";
  std::string name = "bench";
  double timeout = 120.0;
  std::vector<std::string> candidate_cmd;
};

int cmd_bench(const BenchFlags& f, const ContextFlags& ctx_flags, const CLI::App* sub) {
  pb::BenchPlan plan;
  try {
    if (!f.plan_file.empty()) plan = pb::load_plan(f.plan_file);
    if (f.plan_file.empty() || sub->count("--name")) plan.name = f.name;
    if (f.plan_file.empty() || sub->count("--runs")) plan.runs = f.runs;
    if (f.plan_file.empty() || sub->count("--seed")) plan.base_seed = f.seed;
    if (f.plan_file.empty() || sub->count("--workers")) plan.workers = f.workers;
    if (f.plan_file.empty() || sub->count("--out")) plan.out_dir = f.out;
    if (f.plan_file.empty() || sub->count("--timeout")) plan.sandbox.timeout_s = f.timeout;
    if (!f.instances.empty()) {
      plan.instances.clear();
      for (const auto& i : f.instances) plan.instances.push_back(resolve_instance(i, 0));
    }
    if (f.budget_override)
      for (auto& inst : plan.instances) inst.budget = f.budget_override;
    if (!f.algorithms.empty()) {
      plan.algorithms.clear();
      pb::KeyValueConfig empty;
      for (const auto& a : f.algorithms) {
        if (a == "candidate") {
          if (f.candidate_cmd.empty()) throw UsageError("--algo candidate needs --candidate-cmd");
          plan.algorithms.push_back({"candidate", std::nullopt, f.candidate_cmd});
        } else {
          plan.algorithms.push_back(pb::resolve_algorithm(a, empty));
        }
      }
    }
    plan.context = ctx_flags.build();
    plan.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const auto result = pb::run_bench(plan);
  std::size_t failed = 0;
  for (const auto& c : result.cells)
    if (!c.ok) {
      ++failed;
      std::cerr << fmt::format("cell {}/{}/run_{} failed: {}\n", c.instance, c.algorithm, c.run, c.error);
    }
  std::cout << fmt::format("{:<20} {:<14} {:>4} {:>12} {:>12} {:>14} {:>14}\n", "instance", "algorithm", "runs",
                           "aocc_mean", "aocc_std", "y_best_mean", "y_best_std");
  for (const auto& r : result.aggregate)
    std::cout << fmt::format("{:<20} {:<14} {:>4} {:>12.6f} {:>12.6f} {:>14.6g} {:>14.6g}\n", r.instance, r.algorithm,
                             r.runs_ok, r.stats.aocc_mean, r.stats.aocc_std, r.stats.y_best_mean, r.stats.y_best_std);
  std::cout << fmt::format("results in {} ({} cells, {} failed)\n", result.dir.string(), result.cells.size(), failed);
  return failed == result.cells.size() ? kFailure : kOk;
}

// ---------------------------------------------------------------------------
// discover

struct DiscoverFlags {
  std::string instance = "mini-bragg";
  std::size_t mu = 1;
  std::size_t lambda = 1;
  bool plus = true;
  std::size_t total = 100;
  std::size_t runs_per_candidate = 3;
  std::uint64_t seed = 0;
  std::size_t budget_override = 0;
  std::string llm_endpoint = "https://api.openai.com/v1";
  std::string llm_model = "gpt-4o-2024-08-06";
  double llm_temperature = 1.0;
  std::string api_key_env = "OPENAI_API_KEY";
  std::string mock_script;
  std::string seed_candidate;
  bool description = true;
  bool insight = true;
  std::string prompts_dir;
  std::vector<std::string> candidate_cmd;
  std::string candidate_ext = ".py";
  double timeout = 120.0;
  std::string out = "results/discovery";
  std::string quota_rule = "at-least-one";
  double beta = 1.5;
};

int cmd_discover(const DiscoverFlags& f, const ContextFlags& ctx_flags) {
  pb::EsConfig es{f.mu, f.lambda, f.plus, f.total, f.runs_per_candidate};
  pb::ProblemInstance instance;
  pb::PromptBundle prompts;
  std::unique_ptr<pb::LlmClient> llm;
  pb::DiscoveryOptions options;
  std::vector<std::string> command = f.candidate_cmd;
  try {
    es.validate();
    instance = resolve_instance(f.instance, f.budget_override);
    const auto dir = f.prompts_dir.empty() ? pb::default_prompts_dir() : std::filesystem::path(f.prompts_dir);
    prompts = pb::PromptBundle::load(dir, instance, f.description, f.insight);
    if (!f.mock_script.empty()) {
      llm = std::make_unique<pb::MockLlmClient>(pb::MockLlmClient::load(f.mock_script));
    } else {
      llm = std::make_unique<pb::ChatCompletionClient>(
          pb::ChatCompletionClient::Options{f.llm_endpoint, f.llm_model, f.llm_temperature, f.api_key_env, 300.0});
    }
    options.seed = f.seed;
    options.quota_rule = f.quota_rule == "as-printed" ? pb::QuotaRule::as_printed : pb::QuotaRule::at_least_one;
    options.mutation.beta = f.beta;
    if (!f.seed_candidate.empty()) {
      std::ifstream in(f.seed_candidate, std::ios::binary);
      if (!in) throw std::invalid_argument(fmt::format("cannot open seed candidate {}", f.seed_candidate));
      std::ostringstream ss;
      ss << in.rdbuf();
      options.seed_candidate = ss.str();
    }
    if (command.empty()) {
      const auto runner = std::filesystem::path(PHOTONBENCH_SHARE_DIR) / "tools" / "candidate_runner.py";
      command = {"python3", runner.string(), "{script}", "{name}"};
    }
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const std::filesystem::path out = f.out;
  options.on_candidate = [](const pb::CandidateAlgorithm& c) {
    if (c.status == pb::CandidateStatus::evaluated)
      std::cout << fmt::format("[{:>3}] gen {:>3} {:<32} aocc {:.4f} +- {:.4f}  y* {:.4g}\n", c.id, c.generation,
                               c.name, c.aocc_mean, c.aocc_std, c.y_best_mean);
    else
      std::cout << fmt::format("[{:>3}] gen {:>3} {:<32} failed: {}\n", c.id, c.generation, c.name,
                               c.error.substr(0, c.error.find('\n')));
    std::cout.flush();
  };
  pb::SandboxOptions sandbox;
  sandbox.timeout_s = f.timeout;
  const auto runner =
      pb::make_sandbox_runner(command, out / "work", f.candidate_ext, instance, sandbox, ctx_flags.build());
  const auto result = pb::run_discovery(instance, es, prompts, *llm, runner, options);
  pb::write_archive(out, result, f.candidate_ext);

  const auto& best = result.archive[result.final_parents.front()];
  std::cout << fmt::format("{} candidates archived in {}; best {} (aocc {:.4f}, status {})\n", result.archive.size(),
                           out.string(), best.name, best.aocc_mean, pb::to_string(best.status));
  return kOk;
}

// ---------------------------------------------------------------------------
// landscape

struct LandscapeFlags {
  std::string instance = "ellipsometry";
  std::vector<std::size_t> coords{0, 1};
  std::size_t grid = 50;
  std::vector<double> fixed;
  std::string out;
};

int cmd_landscape(const LandscapeFlags& f, const ContextFlags& ctx_flags) {
  pb::ProblemInstance instance = resolve_instance(f.instance, 0);
  if (f.coords.size() != 2) throw UsageError("--coords takes exactly two indices");
  const auto fn = pb::make_objective(instance, ctx_flags.build());
  std::optional<std::vector<double>> fixed;
  if (!f.fixed.empty()) fixed = f.fixed;
  pb::LandscapeScan scan;
  try {
    scan = pb::landscape_scan(fn, instance.bounds, f.coords[0], f.coords[1], f.grid, fixed);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  } catch (const std::out_of_range& e) {
    throw UsageError(e.what());
  }
  const std::filesystem::path out =
      f.out.empty() ? std::filesystem::path("results") / fmt::format("landscape_{}.csv", instance.name())
                    : std::filesystem::path(f.out);
  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
  std::ofstream file(out, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error(fmt::format("cannot write {}", out.string()));
  pb::write_landscape_csv(file, scan, instance.name());
  const auto [a, b] = scan.argmin();
  std::cout << fmt::format("{} evaluations written to {}; minimum {:.6g} at x{} = {:.6g}, x{} = {:.6g}\n",
                           scan.evaluations, out.string(), scan.values[a][b], scan.i, scan.xi[a], scan.j, scan.xj[b]);
  return kOk;
}

// ---------------------------------------------------------------------------
// plot

int cmd_plot(const std::string& dir, bool log_y) {
  const auto written = pb::plot_results(dir, log_y);
  for (const auto& p : written) std::cout << "wrote " << p.string() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("Photonic multilayer optimisation benchmark and LLM-driven algorithm discovery", "photonbench");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::string config_file;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_file, "key = value file; command-line flags take precedence");
  };

  ContextFlags ctx_flags;

  auto* validate = app.add_subcommand("validate", "Run the built-in physics self-checks");
  add_config(validate);
  validate->add_option("--data-dir", ctx_flags.data_dir, "Directory holding the material tables");

  BenchFlags bf;
  auto* bench = app.add_subcommand("bench", "Run seeded benchmark cells and aggregate them");
  add_config(bench);
  bench->add_option("--plan", bf.plan_file, "Plan file (flags given here override it)");
  bench->add_option("--instance", bf.instances, "Instance ids or instance files")->delimiter(',');
  bench->add_option("--algo", bf.algorithms, "de, qode, qnde, bfgs-restart, cma-es or candidate")->delimiter(',');
  bench->add_option("--runs", bf.runs, "Runs per cell")->check(CLI::PositiveNumber);
  bench->add_option("--seed", bf.seed, "Base seed; run k uses seed + k");
  bench->add_option("--budget-override", bf.budget_override, "Replace every instance budget");
  bench->add_option("--workers", bf.workers, "Parallel cells")->check(CLI::PositiveNumber);
  bench->add_option("--out", bf.out, "Output root");
  bench->add_option("--name", bf.name, "Plan name (results/<name>)");
  bench->add_option("--timeout", bf.timeout, "Candidate wall-clock limit in seconds");
  bench->add_option("--candidate-cmd", bf.candidate_cmd, "Command for --algo candidate")->delimiter(',');
  ctx_flags.attach(bench);

  DiscoverFlags df;
  auto* discover = app.add_subcommand("discover", "Evolve optimizer code with an LLM");
  add_config(discover);
  discover->add_option("--instance", df.instance, "Instance id or file");
  discover->add_option("--mu", df.mu, "Parents")->check(CLI::PositiveNumber);
  discover->add_option("--lambda", df.lambda, "Offspring per generation")->check(CLI::PositiveNumber);
  discover->add_flag("--plus,!--comma", df.plus, "Plus (elitist) or comma selection");
  discover->add_option("--total", df.total, "Candidates to generate");
  discover->add_option("--runs-per-candidate", df.runs_per_candidate, "Runs per candidate")
      ->check(CLI::PositiveNumber);
  discover->add_option("--seed", df.seed, "Seed for parent choice, mutation rates and runs");
  discover->add_option("--budget-override", df.budget_override, "Replace the instance budget");
  discover->add_option("--llm-endpoint", df.llm_endpoint, "Chat-completion base URL");
  discover->add_option("--llm-model", df.llm_model, "Model id");
  discover->add_option("--llm-temperature", df.llm_temperature, "Sampling temperature");
  discover->add_option("--api-key-env", df.api_key_env, "Environment variable holding the API key");
  discover->add_option("--mock-script", df.mock_script, "Scripted responses instead of a live endpoint");
  discover->add_option("--seed-candidate", df.seed_candidate, "Response file used as the first candidate");
  discover->add_flag("--description,!--no-description", df.description, "Include the problem description");
  discover->add_flag("--insight,!--no-insight", df.insight, "Include the algorithmic insight");
  discover->add_option("--prompts-dir", df.prompts_dir, "Prompt template directory");
  discover->add_option("--candidate-cmd", df.candidate_cmd, "Launch template; {script} and {name} are substituted")
      ->delimiter(',');
  discover->add_option("--candidate-ext", df.candidate_ext, "File extension for candidate sources");
  discover->add_option("--timeout", df.timeout, "Per-run wall-clock limit in seconds");
  discover->add_option("--out", df.out, "Archive directory");
  discover->add_option("--quota-rule", df.quota_rule, "at-least-one or as-printed")
      ->check(CLI::IsMember({"at-least-one", "as-printed"}));
  discover->add_option("--beta", df.beta, "Power-law exponent of the mutation rate")->check(CLI::PositiveNumber);
  ctx_flags.attach(discover);

  LandscapeFlags lf;
  auto* landscape = app.add_subcommand("landscape", "Scan fitness over two coordinates");
  add_config(landscape);
  landscape->add_option("--instance", lf.instance, "Instance id or file");
  landscape->add_option("--coords", lf.coords, "Two coordinate indices")->delimiter(',')->expected(2);
  landscape->add_option("--grid", lf.grid, "Points per axis");
  landscape->add_option("--fixed", lf.fixed, "Values of the other coordinates (default: bounds midpoint)")
      ->delimiter(',');
  landscape->add_option("--out", lf.out, "Output CSV");
  ctx_flags.attach(landscape);

  std::string plot_dir;
  bool log_y = false;
  auto* plot = app.add_subcommand("plot", "Render convergence and box-plot SVGs from a results directory");
  add_config(plot);
  plot->add_option("--results,results", plot_dir, "Results directory of one plan")->required();
  plot->add_flag("--log-y", log_y, "Logarithmic fitness axis");

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = merge_config(app, args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "photonbench: " << e.what() << '\n';
    return kUsage;
  }

  try {
    for (auto* sub : app.get_subcommands()) print_resolved(sub);
    if (*validate) return cmd_validate(ctx_flags);
    if (*bench) return cmd_bench(bf, ctx_flags, bench);
    if (*discover) return cmd_discover(df, ctx_flags);
    if (*landscape) return cmd_landscape(lf, ctx_flags);
    if (*plot) return cmd_plot(plot_dir, log_y);
  } catch (const UsageError& e) {
    std::cerr << "photonbench: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "photonbench: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}
