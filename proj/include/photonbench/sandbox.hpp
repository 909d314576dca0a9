#pragma once

// Out-of-process evaluation of candidate optimizers over a line-delimited
// JSON ask/tell protocol. The harness owns the objective and the budget.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "photonbench/problems.hpp"

namespace photonbench {

enum class RunStatus { ok, crashed, timeout, budget_violation, protocol_error };

std::string_view to_string(RunStatus status);

struct CandidateRunResult {
  RunTrajectory trajectory;
  RunStatus status = RunStatus::ok;
  std::string stderr_capture;  ///< last stderr_limit bytes
  double wall_time = 0.0;      ///< seconds
  std::optional<int> exit_code;
  std::string detail;  ///< harness-side reason for a non-ok status
  std::vector<double> best_x;
};

struct SandboxOptions {
  double timeout_s = 120.0;
  std::size_t stderr_limit = 8192;
  std::filesystem::path working_dir;  ///< empty keeps the current directory
};

// Wire messages.
struct AskMessage {
  std::vector<double> x;
};
struct DoneMessage {};
using CandidateMessage = std::variant<AskMessage, DoneMessage>;

std::string init_message(const Bounds& bounds, std::size_t budget, std::uint64_t seed);
std::string tell_message(double fitness, std::size_t remaining);
/// Throws std::invalid_argument on anything that is not a well-formed ask or done.
CandidateMessage parse_candidate_message(std::string_view line);

/// Launches `command` and serves asks from `objective` until the candidate
/// sends done, exits, times out or breaks the contract.
CandidateRunResult run_candidate(const std::vector<std::string>& command, BudgetedObjective& objective,
                                 std::uint64_t seed, const SandboxOptions& options = {});

CandidateRunResult run_candidate(const std::vector<std::string>& command, const ProblemInstance& instance,
                                 std::uint64_t seed, const SandboxOptions& options = {},
                                 const ProblemContext& context = {});

/// Replaces every "{script}" in the template with `script`; appends it when
/// no argument mentions the placeholder.
std::vector<std::string> expand_command(const std::vector<std::string>& command_template,
                                        const std::filesystem::path& script);

}  // namespace photonbench
