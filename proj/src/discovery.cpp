#include "photonbench/discovery.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>

#include <fmt/format.h>

#include "photonbench/llm_client.hpp"
#include "photonbench/metrics.hpp"

namespace photonbench {

std::string_view to_string(CandidateStatus status) {
  return status == CandidateStatus::evaluated ? "evaluated" : "failed";
}

void EsConfig::validate() const {
  if (mu < 1 || lambda < 1) throw std::invalid_argument("mu and lambda must be at least 1");
  if (!plus && lambda < mu) throw std::invalid_argument(fmt::format("comma strategy needs lambda >= mu, got {}", label()));
  if (total_candidates < mu + lambda)
    throw std::invalid_argument(fmt::format("total_candidates {} is below mu + lambda for {}", total_candidates, label()));
  if (runs_per_candidate < 1) throw std::invalid_argument("runs_per_candidate must be at least 1");
}

std::string EsConfig::label() const { return fmt::format("({}{}{})", mu, plus ? '+' : ',', lambda); }

namespace {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  return text;
}

std::string family_name(ProblemFamily f) {
  switch (f) {
    case ProblemFamily::bragg: return "bragg";
    case ProblemFamily::ellipsometry: return "ellipsometry";
    case ProblemFamily::photovoltaic: return "photovoltaic";
  }
  return "unknown";
}

std::string format_rate(double x) { return fmt::format("{:g}", x); }

}  // namespace

PromptBundle PromptBundle::load(const std::filesystem::path& dir, const ProblemInstance& instance,
                                bool with_description, bool with_insight) {
  PromptBundle p;
  p.task = read_text(dir / "task.txt");
  p.mutation_template = read_text(dir / "mutation.txt");
  p.feedback_template = read_text(dir / "feedback.txt");
  p.error_template = read_text(dir / "error_feedback.txt");
  p.selected_template = read_text(dir / "selected_solution.txt");
  p.output_format = read_text(dir / "output_format.txt");
  const auto family = family_name(family_of(instance.id));
  if (with_description) p.problem_description = read_text(dir / fmt::format("description_{}.txt", family));
  if (with_insight) p.algorithmic_insight = read_text(dir / fmt::format("insight_{}.txt", family));
  return p;
}

std::filesystem::path default_prompts_dir() {
  if (const char* env = std::getenv("PHOTONBENCH_PROMPTS_DIR"); env && *env) return env;
  return std::filesystem::path(PHOTONBENCH_SHARE_DIR) / "prompts";
}

std::string fill_template(const std::string& text, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '{') {
      const auto close = text.find('}', i + 1);
      if (close != std::string::npos) {
        const auto it = values.find(text.substr(i + 1, close - i - 1));
        if (it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += text[i++];
  }
  return out;
}

std::vector<double> mutation_rate_distribution(const MutationRateOptions& options) {
  if (options.max_rate < 1) throw std::invalid_argument("max_rate must be at least 1");
  if (!(options.beta > 0.0)) throw std::invalid_argument("beta must be positive");
  std::vector<double> p(options.max_rate);
  double z = 0.0;
  for (std::size_t k = 1; k <= options.max_rate; ++k) z += p[k - 1] = std::pow(static_cast<double>(k), -options.beta);
  for (auto& v : p) v /= z;
  return p;
}

double sample_mutation_rate(std::size_t line_count, Rng& rng, const MutationRateOptions& options) {
  if (line_count < 1) throw std::invalid_argument("mutation rate needs a parent with at least one line");
  const auto p = mutation_rate_distribution(options);
  const double u = rng.uniform();
  double cdf = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    cdf += p[k];
    if (u < cdf) return static_cast<double>(k + 1);
  }
  return static_cast<double>(p.size());
}

std::size_t line_quota(std::size_t line_count, double rate, QuotaRule rule) {
  const auto raw = static_cast<std::size_t>(std::floor(static_cast<double>(line_count) * rate / 100.0));
  return rule == QuotaRule::at_least_one ? std::max<std::size_t>(raw, 1) : std::min<std::size_t>(raw, 1);
}

std::size_t count_lines(const std::string& source) {
  if (source.empty()) return 0;
  auto n = static_cast<std::size_t>(std::count(source.begin(), source.end(), '\n'));
  return source.back() == '\n' ? n : n + 1;
}

std::string build_mutation_prompt(const CandidateAlgorithm& parent, double rate, const std::string& mutation_template,
                                  QuotaRule rule) {
  if (!(rate >= 1.0 && rate <= 100.0)) throw std::invalid_argument("mutation rate must be a percentage");
  const std::size_t n = std::max<std::size_t>(parent.line_count, 1);
  const std::size_t quota = line_quota(n, rate, rule);
  return fill_template(mutation_template, {{"x", format_rate(rate)},
                                           {"x_floor", fmt::format("{}", static_cast<long long>(std::floor(rate)))},
                                           {"n", fmt::format("{}", n)},
                                           {"quota", fmt::format("{}", quota)},
                                           {"rest", fmt::format("{}", n - std::min(quota, n))}});
}

std::string build_feedback_prompt(const CandidateAlgorithm& c, const std::string& feedback_template,
                                  const std::string& error_template) {
  if (c.status == CandidateStatus::failed)
    return fill_template(error_template, {{"name", c.name}, {"stderr", c.error}});
  return fill_template(feedback_template, {{"name", c.name},
                                           {"aocc", fmt::format("{:.4g}", c.aocc_mean)},
                                           {"aocc_std", fmt::format("{:.4g}", c.aocc_std)},
                                           {"y_best", fmt::format("{:.4g}", c.y_best_mean)},
                                           {"y_best_std", fmt::format("{:.4g}", c.y_best_std)}});
}

std::string build_task_prompt(const PromptBundle& prompts) {
  std::istringstream in(prompts.task);
  std::string line, out;
  while (std::getline(in, line)) {
    if (line == "{description}") {
      if (prompts.problem_description) out += *prompts.problem_description + '\n';
      continue;
    }
    if (line == "{insight}") {
      if (prompts.algorithmic_insight) out += *prompts.algorithmic_insight + '\n';
      continue;
    }
    out += line + '\n';
  }
  return out;
}

std::string build_offspring_prompt(const PromptBundle& prompts, const CandidateAlgorithm& parent, double rate,
                                   QuotaRule rule) {
  std::string out = build_task_prompt(prompts);
  out += '\n';
  out += fill_template(prompts.selected_template, {{"description", parent.description}, {"source", parent.source}});
  out += "\n\n";
  out += build_feedback_prompt(parent, prompts.feedback_template, prompts.error_template);
  out += "\n\n";
  out += build_mutation_prompt(parent, rate, prompts.mutation_template, rule);
  out += "\n\n";
  out += prompts.output_format;
  out += '\n';
  return out;
}

ExtractedCode extract_code(const std::string& response) {
  std::vector<std::string> lines;
  {
    std::istringstream in(response);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(std::move(line));
    }
  }
  auto is_fence = [](const std::string& l) {
    const auto s = l.find_first_not_of(" \t");
    return s != std::string::npos && l.compare(s, 3, "```") == 0;
  };

  std::size_t open = lines.size(), close = lines.size();
  for (std::size_t i = 0; i < lines.size(); ++i)
    if (is_fence(lines[i])) {
      open = i;
      break;
    }
  if (open == lines.size()) throw ParseFailure("response contains no fenced code block");
  for (std::size_t i = open + 1; i < lines.size(); ++i)
    if (is_fence(lines[i])) {
      close = i;
      break;
    }
  if (close == lines.size()) throw ParseFailure("code block is not closed");

  ExtractedCode out;
  for (std::size_t i = open + 1; i < close; ++i) out.source += lines[i] + '\n';
  if (out.source.find_first_not_of(" \t\n") == std::string::npos) throw ParseFailure("code block is empty");

  static const std::regex decl(R"(^\s*(?:class|struct|def)\s+([A-Za-z_][A-Za-z0-9_]*))");
  static const std::regex assign(R"(^\s*name\s*=\s*([A-Za-z_][A-Za-z0-9_]*))");
  for (std::size_t i = open + 1; i < close && out.name.empty(); ++i) {
    std::smatch m;
    if (std::regex_search(lines[i], m, decl) || std::regex_search(lines[i], m, assign)) out.name = m[1];
  }
  if (out.name.empty()) throw ParseFailure("no algorithm name found in the code block");

  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i >= open && i <= close) continue;
    std::string l = lines[i];
    const auto s = l.find_first_not_of(" \t");
    if (s == std::string::npos) continue;
    l.erase(0, s);
    static constexpr std::string_view tag = "# Description:";
    if (l.starts_with(tag)) l.erase(0, tag.size());
    const auto b = l.find_first_not_of(" \t");
    out.description = b == std::string::npos ? std::string{} : l.substr(b);
    while (!out.description.empty() && (out.description.back() == ' ' || out.description.back() == '\t'))
      out.description.pop_back();
    break;
  }
  return out;
}

void evaluate_candidate(CandidateAlgorithm& c, const ProblemInstance& instance, std::size_t runs,
                        std::uint64_t base_seed, const CandidateRunner& runner) {
  const auto cfg = AoccConfig::for_instance(instance);
  std::vector<RunSummary> summaries;
  std::string first_error;
  for (std::size_t r = 0; r < runs; ++r) {
    std::string error;
    try {
      const auto res = runner(c, base_seed + r);
      if (res.status == RunStatus::ok && !res.trajectory.empty()) {
        summaries.push_back(summarize_run(res.trajectory, cfg, instance.budget));
        continue;
      }
      if (res.status == RunStatus::ok) {
        error = "[ok] the algorithm finished without evaluating the objective";
      } else {
        error = fmt::format("[{}] {}", to_string(res.status), res.detail);
        if (!res.stderr_capture.empty()) error += '\n' + res.stderr_capture;
      }
    } catch (const std::exception& e) {
      error = fmt::format("[harness] {}", e.what());
    }
    if (first_error.empty()) first_error = std::move(error);
  }
  c.completed_runs = summaries.size();
  if (!summaries.empty()) {
    const auto stats = summarize_runs(summaries);
    c.aocc_mean = stats.aocc_mean;
    c.aocc_std = stats.aocc_std;
    c.y_best_mean = stats.y_best_mean;
    c.y_best_std = stats.y_best_std;
  }
  c.status = first_error.empty() ? CandidateStatus::evaluated : CandidateStatus::failed;
  c.error = std::move(first_error);
}

namespace {

std::string safe_file_stem(const CandidateAlgorithm& c) {
  std::string name = c.name.empty() ? "candidate" : c.name;
  for (auto& ch : name)
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-')) ch = '_';
  return fmt::format("{:04}_{}", c.id, name);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  out << text;
}

}  // namespace

CandidateRunner make_sandbox_runner(std::vector<std::string> command_template, std::filesystem::path work_dir,
                                    std::string extension, const ProblemInstance& instance, SandboxOptions options,
                                    ProblemContext context) {
  std::filesystem::create_directories(work_dir);
  return [=](const CandidateAlgorithm& c, std::uint64_t seed) {
    const auto script = std::filesystem::absolute(work_dir / (safe_file_stem(c) + extension));
    write_file(script, c.source);
    auto command = expand_command(command_template, script);
    for (auto& arg : command)
      for (auto pos = arg.find("{name}"); pos != std::string::npos; pos = arg.find("{name}", pos + c.name.size()))
        arg.replace(pos, 6, c.name);
    return run_candidate(command, instance, seed, options, context);
  };
}

bool ranks_before(const CandidateAlgorithm& a, const CandidateAlgorithm& b) {
  const bool ae = a.status == CandidateStatus::evaluated;
  const bool be = b.status == CandidateStatus::evaluated;
  if (ae != be) return ae;
  if (ae) {
    if (a.aocc_mean != b.aocc_mean) return a.aocc_mean > b.aocc_mean;
    if (a.y_best_mean != b.y_best_mean) return a.y_best_mean < b.y_best_mean;
  }
  return a.id < b.id;
}

std::vector<CandidateAlgorithm> select_parents(const std::vector<CandidateAlgorithm>& parents,
                                               const std::vector<CandidateAlgorithm>& offspring, const EsConfig& cfg) {
  std::vector<CandidateAlgorithm> pool = offspring;
  if (cfg.plus) pool.insert(pool.end(), parents.begin(), parents.end());
  std::sort(pool.begin(), pool.end(), ranks_before);
  if (pool.size() > cfg.mu) pool.resize(cfg.mu);
  if (!cfg.plus && pool.size() < cfg.mu) {
    // A truncated last generation cannot fill mu slots; keep the best old parents.
    auto rest = parents;
    std::sort(rest.begin(), rest.end(), ranks_before);
    for (const auto& p : rest) {
      if (pool.size() >= cfg.mu) break;
      pool.push_back(p);
    }
  }
  return pool;
}

namespace {

std::vector<std::size_t> ids_of(const std::vector<CandidateAlgorithm>& v) {
  std::vector<std::size_t> ids;
  for (const auto& c : v) ids.push_back(c.id);
  return ids;
}

}  // namespace

DiscoveryResult run_discovery(const ProblemInstance& instance, const EsConfig& es, const PromptBundle& prompts,
                              LlmClient& llm, const CandidateRunner& runner, const DiscoveryOptions& options) {
  es.validate();
  if (options.llm_attempts < 1) throw std::invalid_argument("llm_attempts must be at least 1");
  Rng rng(options.seed);
  DiscoveryResult result;

  auto create = [&](std::size_t generation, const std::string& prompt, const CandidateAlgorithm* parent, double rate,
                    const std::string* fixed_response) {
    CandidateAlgorithm c;
    c.id = result.archive.size();
    c.generation = generation;
    c.mutation_rate = rate;
    if (parent) {
      c.parent_id = parent->id;
      c.parent_name = parent->name;
    }
    std::string response;
    bool received = fixed_response != nullptr;
    if (fixed_response) response = *fixed_response;
    std::string llm_error;
    for (std::size_t attempt = 0; !received && attempt < options.llm_attempts; ++attempt) {
      try {
        response = llm.complete(prompt);
        received = true;
      } catch (const std::exception& e) {
        llm_error = e.what();
      }
    }
    if (!received) {
      ++result.llm_failures;
      c.name = fmt::format("candidate_{}", c.id);
      c.error = fmt::format("[llm] {} attempts failed: {}", options.llm_attempts, llm_error);
    } else {
      try {
        auto code = extract_code(response);
        c.name = std::move(code.name);
        c.description = std::move(code.description);
        c.source = std::move(code.source);
        c.line_count = count_lines(c.source);
        evaluate_candidate(c, instance, es.runs_per_candidate, options.seed + c.id * es.runs_per_candidate, runner);
      } catch (const ParseFailure& e) {
        c.name = fmt::format("candidate_{}", c.id);
        c.source = response;
        c.line_count = count_lines(response);
        c.error = fmt::format("[parse] {}", e.what());
      }
    }
    result.archive.push_back(c);
    if (options.on_candidate) options.on_candidate(result.archive.back());
    return c;
  };

  const std::string task_prompt = build_task_prompt(prompts) + '\n' + prompts.output_format + '\n';
  std::vector<CandidateAlgorithm> initial;
  for (std::size_t i = 0; i < es.mu; ++i) {
    const bool seeded = i == 0 && options.seed_candidate.has_value();
    initial.push_back(create(0, task_prompt, nullptr, 0.0, seeded ? &*options.seed_candidate : nullptr));
  }
  auto parents = select_parents({}, initial, es);
  result.generations.push_back({0, ids_of(initial), ids_of(parents)});

  for (std::size_t generation = 1; result.archive.size() < es.total_candidates; ++generation) {
    const std::size_t count = std::min(es.lambda, es.total_candidates - result.archive.size());
    std::vector<CandidateAlgorithm> offspring;
    for (std::size_t k = 0; k < count; ++k) {
      const auto& parent = parents[rng.index(parents.size())];
      const double rate = sample_mutation_rate(std::max<std::size_t>(parent.line_count, 1), rng, options.mutation);
      offspring.push_back(
          create(generation, build_offspring_prompt(prompts, parent, rate, options.quota_rule), &parent, rate, nullptr));
    }
    parents = select_parents(parents, offspring, es);
    result.generations.push_back({generation, ids_of(offspring), ids_of(parents)});
  }
  result.final_parents = ids_of(parents);
  return result;
}

std::vector<std::vector<std::size_t>> replay_parent_sets(const std::vector<CandidateAlgorithm>& archive,
                                                         const EsConfig& es) {
  std::vector<std::vector<std::size_t>> sets;
  std::vector<CandidateAlgorithm> parents;
  std::size_t i = 0;
  while (i < archive.size()) {
    const std::size_t generation = archive[i].generation;
    std::vector<CandidateAlgorithm> offspring;
    for (; i < archive.size() && archive[i].generation == generation; ++i) offspring.push_back(archive[i]);
    parents = select_parents(parents, offspring, es);
    sets.push_back(ids_of(parents));
  }
  return sets;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

std::string join_ids(const std::vector<std::size_t>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) out += (i ? ";" : "") + std::to_string(ids[i]);
  return out;
}

}  // namespace

void write_archive(const std::filesystem::path& dir, const DiscoveryResult& result, const std::string& extension) {
  const auto cand_dir = dir / "candidates";
  std::filesystem::create_directories(cand_dir);
  std::ofstream manifest(dir / "manifest.csv", std::ios::binary | std::ios::trunc);
  if (!manifest) throw std::runtime_error(fmt::format("cannot write {}", (dir / "manifest.csv").string()));
  manifest << "id,generation,name,parent_id,parent_name,status,aocc_mean,aocc_std,y_best_mean,y_best_std,"
              "completed_runs,line_count,mutation_rate,file,description\n";
  for (const auto& c : result.archive) {
    const auto file = safe_file_stem(c) + extension;
    write_file(cand_dir / file, c.source);
    if (!c.error.empty()) write_file(cand_dir / (safe_file_stem(c) + ".error.txt"), c.error);
    manifest << c.id << ',' << c.generation << ',' << csv_field(c.name) << ','
             << (c.parent_id ? std::to_string(*c.parent_id) : "") << ',' << csv_field(c.parent_name.value_or(""))
             << ',' << to_string(c.status) << ',' << format_double(c.aocc_mean) << ',' << format_double(c.aocc_std)
             << ',' << format_double(c.y_best_mean) << ',' << format_double(c.y_best_std) << ',' << c.completed_runs
             << ',' << c.line_count << ',' << format_rate(c.mutation_rate) << ',' << csv_field("candidates/" + file)
             << ',' << csv_field(c.description) << '\n';
  }
  std::ofstream gens(dir / "generations.csv", std::ios::binary | std::ios::trunc);
  gens << "generation,offspring,parents\n";
  for (const auto& g : result.generations)
    gens << g.generation << ',' << join_ids(g.offspring) << ',' << join_ids(g.parents) << '\n';
}

}  // namespace photonbench
