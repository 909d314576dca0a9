#pragma once

// LLM-driven evolution of optimizer source code: prompts, mutation-rate
// sampling, candidate scoring and (mu, lambda) / (mu + lambda) selection.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "photonbench/optimizers.hpp"
#include "photonbench/problems.hpp"
#include "photonbench/sandbox.hpp"

namespace photonbench {

class LlmClient;

enum class CandidateStatus { evaluated, failed };
std::string_view to_string(CandidateStatus status);

struct CandidateAlgorithm {
  std::size_t id = 0;  ///< creation order
  std::size_t generation = 0;
  std::string name;
  std::string description;
  std::string source;
  std::size_t line_count = 0;
  std::optional<std::size_t> parent_id;
  std::optional<std::string> parent_name;
  double mutation_rate = 0.0;  ///< percent; 0 for task-prompt candidates
  double aocc_mean = 0.0;
  double aocc_std = 0.0;
  double y_best_mean = 0.0;
  double y_best_std = 0.0;
  std::size_t completed_runs = 0;
  CandidateStatus status = CandidateStatus::failed;
  std::string error;  ///< status and captured stderr of the first failing run
};

struct EsConfig {
  std::size_t mu = 1;
  std::size_t lambda = 1;
  bool plus = true;
  std::size_t total_candidates = 100;
  std::size_t runs_per_candidate = 3;

  void validate() const;
  /// "(1+1)" / "(2,10)" notation.
  std::string label() const;
};

struct PromptBundle {
  std::string task;
  std::optional<std::string> problem_description;
  std::optional<std::string> algorithmic_insight;
  std::string mutation_template;
  std::string feedback_template;
  std::string error_template;
  std::string selected_template;
  std::string output_format;

  /// Loads the shipped text files; description and insight are attached
  /// for the instance's problem family when requested.
  static PromptBundle load(const std::filesystem::path& dir, const ProblemInstance& instance, bool with_description,
                           bool with_insight);
};

std::filesystem::path default_prompts_dir();

/// Replaces "{key}" for every key in `values`; other braces are left alone.
std::string fill_template(const std::string& text, const std::map<std::string, std::string>& values);

// Mutation rate -------------------------------------------------------------

struct MutationRateOptions {
  double beta = 1.5;
  std::size_t max_rate = 50;
};

/// Normalised P(k) for k = 1..max_rate, P(k) proportional to k^-beta.
std::vector<double> mutation_rate_distribution(const MutationRateOptions& options = {});
/// Draws a percentage k in 1..max_rate. Requires line_count >= 1.
double sample_mutation_rate(std::size_t line_count, Rng& rng, const MutationRateOptions& options = {});

enum class QuotaRule {
  at_least_one,  ///< max(floor(n x / 100), 1)
  as_printed     ///< min(floor(n x / 100), 1)
};

std::size_t line_quota(std::size_t line_count, double rate, QuotaRule rule = QuotaRule::at_least_one);
std::size_t count_lines(const std::string& source);

std::string build_mutation_prompt(const CandidateAlgorithm& parent, double rate, const std::string& mutation_template,
                                  QuotaRule rule = QuotaRule::at_least_one);
std::string build_feedback_prompt(const CandidateAlgorithm& c, const std::string& feedback_template,
                                  const std::string& error_template);
std::string build_task_prompt(const PromptBundle& prompts);
/// Task, selected solution, feedback, mutation instruction and output format.
std::string build_offspring_prompt(const PromptBundle& prompts, const CandidateAlgorithm& parent, double rate,
                                   QuotaRule rule = QuotaRule::at_least_one);

// Response parsing ----------------------------------------------------------

class ParseFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExtractedCode {
  std::string name;
  std::string description;
  std::string source;
};

/// First fenced block is the source. The name is the first `class X`,
/// `struct X`, `def X` or `name=X` found in it; the description is the first
/// non-empty line outside the block, minus a leading "# Description:".
ExtractedCode extract_code(const std::string& response);

// Evaluation and selection --------------------------------------------------

/// Executes one run of a candidate with the given seed.
using CandidateRunner = std::function<CandidateRunResult(const CandidateAlgorithm&, std::uint64_t seed)>;

/// Scores `c` in place from `runs` executions with seeds base_seed + r.
void evaluate_candidate(CandidateAlgorithm& c, const ProblemInstance& instance, std::size_t runs,
                        std::uint64_t base_seed, const CandidateRunner& runner);

/// Writes each candidate to work_dir/<id>_<name><extension> and runs it
/// through the sandbox with the command template.
CandidateRunner make_sandbox_runner(std::vector<std::string> command_template, std::filesystem::path work_dir,
                                    std::string extension, const ProblemInstance& instance, SandboxOptions options,
                                    ProblemContext context = {});

/// Evaluated before failed, then aocc_mean descending, y_best_mean ascending,
/// earlier creation first.
bool ranks_before(const CandidateAlgorithm& a, const CandidateAlgorithm& b);

std::vector<CandidateAlgorithm> select_parents(const std::vector<CandidateAlgorithm>& parents,
                                               const std::vector<CandidateAlgorithm>& offspring, const EsConfig& cfg);

// The loop ------------------------------------------------------------------

struct GenerationRecord {
  std::size_t generation = 0;
  std::vector<std::size_t> offspring;
  std::vector<std::size_t> parents;  ///< after selection
};

struct DiscoveryOptions {
  std::uint64_t seed = 0;
  std::optional<std::string> seed_candidate;  ///< response text used for candidate 0
  QuotaRule quota_rule = QuotaRule::at_least_one;
  MutationRateOptions mutation;
  std::size_t llm_attempts = 3;
  /// Called after every candidate is scored.
  std::function<void(const CandidateAlgorithm&)> on_candidate;
};

struct DiscoveryResult {
  std::vector<CandidateAlgorithm> archive;
  std::vector<GenerationRecord> generations;
  std::vector<std::size_t> final_parents;
  std::size_t llm_failures = 0;
};

DiscoveryResult run_discovery(const ProblemInstance& instance, const EsConfig& es, const PromptBundle& prompts,
                              LlmClient& llm, const CandidateRunner& runner, const DiscoveryOptions& options = {});

/// Recomputes the parent set after every generation from archived scores.
std::vector<std::vector<std::size_t>> replay_parent_sets(const std::vector<CandidateAlgorithm>& archive,
                                                         const EsConfig& es);

/// candidates/<id>_<name><ext>, manifest.csv and generations.csv under dir.
void write_archive(const std::filesystem::path& dir, const DiscoveryResult& result, const std::string& extension);

}  // namespace photonbench
