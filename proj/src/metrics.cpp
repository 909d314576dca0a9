#include "photonbench/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace photonbench {

void AoccConfig::validate() const {
  if (!(lb < ub)) throw std::invalid_argument(fmt::format("AOCC bounds need lb < ub, got [{}, {}]", lb, ub));
  if (log_scale && !(lb > 0.0)) throw std::invalid_argument("log-scaled AOCC needs lb > 0");
}

AoccConfig AoccConfig::for_instance(const ProblemInstance& instance, bool log_scale) {
  return {instance.aocc_lb, instance.aocc_ub, log_scale};
}

double aocc(const RunTrajectory& trajectory, const AoccConfig& cfg, std::size_t budget) {
  cfg.validate();
  if (trajectory.empty()) throw std::invalid_argument("AOCC of an empty trajectory");
  if (budget < trajectory.size())
    throw std::invalid_argument(fmt::format("budget {} shorter than trajectory of {}", budget, trajectory.size()));

  const double lo = cfg.log_scale ? std::log10(cfg.lb) : cfg.lb;
  const double hi = cfg.log_scale ? std::log10(cfg.ub) : cfg.ub;
  auto area = [&](double best) {
    const double clipped = std::clamp(best, cfg.lb, cfg.ub);
    const double v = cfg.log_scale ? std::log10(clipped) : clipped;
    return 1.0 - (v - lo) / (hi - lo);
  };

  double sum = 0.0;
  for (const auto& e : trajectory.evals) sum += area(e.best_so_far);
  sum += static_cast<double>(budget - trajectory.size()) * area(trajectory.final_best());
  return sum / static_cast<double>(budget);
}

RunSummary summarize_run(const RunTrajectory& trajectory, const AoccConfig& cfg, std::size_t budget) {
  return {aocc(trajectory, cfg, budget), trajectory.final_best(), trajectory.size()};
}

SummaryStats summarize_runs(std::span<const RunSummary> summaries) {
  if (summaries.empty()) throw std::invalid_argument("cannot summarize an empty set of runs");
  const double n = static_cast<double>(summaries.size());
  SummaryStats s;
  s.runs = summaries.size();
  for (const auto& r : summaries) {
    s.aocc_mean += r.aocc;
    s.y_best_mean += r.y_best;
  }
  s.aocc_mean /= n;
  s.y_best_mean /= n;
  for (const auto& r : summaries) {
    s.aocc_std += (r.aocc - s.aocc_mean) * (r.aocc - s.aocc_mean);
    s.y_best_std += (r.y_best - s.y_best_mean) * (r.y_best - s.y_best_mean);
  }
  s.aocc_std = std::sqrt(s.aocc_std / n);
  s.y_best_std = std::sqrt(s.y_best_std / n);
  return s;
}

std::string format_double(double value) { return fmt::format("{:.17g}", value); }

void write_run_csv(std::ostream& out, const RunTrajectory& trajectory, const RunMetadata& meta) {
  out << "# instance=" << meta.instance << '\n'
      << "# algorithm=" << meta.algorithm << '\n'
      << "# run_id=" << meta.run_id << '\n'
      << "# budget=" << meta.budget << '\n'
      << "# seed=" << meta.seed << '\n'
      << "evaluation,raw_fitness,best_so_far\n";
  for (const auto& e : trajectory.evals)
    out << e.index << ',' << format_double(e.raw_fitness) << ',' << format_double(e.best_so_far) << '\n';
}

void emit_run_csv(const std::filesystem::path& path, const RunTrajectory& trajectory, const RunMetadata& meta) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot open {} for writing", path.string()));
  write_run_csv(out, trajectory, meta);
  out.flush();
  if (!out) throw std::runtime_error(fmt::format("failed writing {}", path.string()));
}

namespace {

template <typename T>
T parse_field(std::string_view s, const std::string& source, std::size_t line) {
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::runtime_error(fmt::format("{}:{}: cannot parse '{}'", source, line, s));
  return value;
}

}  // namespace

RunRecord parse_run_csv(std::istream& in, const std::string& source) {
  RunRecord rec;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.starts_with("# ")) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const auto key = line.substr(2, eq - 2);
      const auto value = std::string_view(line).substr(eq + 1);
      if (key == "instance") rec.meta.instance = value;
      else if (key == "algorithm") rec.meta.algorithm = value;
      else if (key == "run_id") rec.meta.run_id = parse_field<std::size_t>(value, source, line_no);
      else if (key == "budget") rec.meta.budget = parse_field<std::size_t>(value, source, line_no);
      else if (key == "seed") rec.meta.seed = parse_field<std::uint64_t>(value, source, line_no);
      continue;
    }
    if (!header) {
      if (line != "evaluation,raw_fitness,best_so_far")
        throw std::runtime_error(fmt::format("{}:{}: unexpected header '{}'", source, line_no, line));
      header = true;
      continue;
    }
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw std::runtime_error(fmt::format("{}:{}: expected 3 columns", source, line_no));
    const std::string_view v(line);
    rec.trajectory.evals.push_back({parse_field<std::size_t>(v.substr(0, c1), source, line_no),
                                    parse_field<double>(v.substr(c1 + 1, c2 - c1 - 1), source, line_no),
                                    parse_field<double>(v.substr(c2 + 1), source, line_no)});
  }
  if (!header) throw std::runtime_error(source + ": missing trajectory header");
  rec.trajectory.instance_id = rec.meta.instance;
  return rec;
}

RunRecord read_run_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open {}", path.string()));
  return parse_run_csv(in, path.string());
}

}  // namespace photonbench
