#include "photonbench/sandbox.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <system_error>
#include <thread>

#include <fmt/format.h>

#include "json.hpp"

namespace photonbench {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::ok: return "ok";
    case RunStatus::crashed: return "crashed";
    case RunStatus::timeout: return "timeout";
    case RunStatus::budget_violation: return "budget-violation";
    case RunStatus::protocol_error: return "protocol-error";
  }
  return "unknown";
}

std::string init_message(const Bounds& bounds, std::size_t budget, std::uint64_t seed) {
  ordered_json j;
  j["type"] = "init";
  j["dim"] = bounds.size();
  j["budget"] = budget;
  j["lb"] = bounds.lower;
  j["ub"] = bounds.upper;
  j["seed"] = seed;
  return j.dump() + '\n';
}

std::string tell_message(double fitness, std::size_t remaining) {
  ordered_json j;
  j["type"] = "tell";
  j["fitness"] = fitness;
  j["remaining"] = remaining;
  return j.dump() + '\n';
}

CandidateMessage parse_candidate_message(std::string_view line) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const ordered_json::parse_error& e) {
    throw std::invalid_argument(fmt::format("not JSON: {}", e.what()));
  }
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
    throw std::invalid_argument("message must be an object with a string 'type'");
  const auto type = j["type"].get<std::string>();
  if (type == "done") return DoneMessage{};
  if (type != "ask") throw std::invalid_argument(fmt::format("unexpected message type '{}'", type));
  if (!j.contains("x") || !j["x"].is_array()) throw std::invalid_argument("ask needs an array 'x'");
  AskMessage ask;
  for (const auto& v : j["x"]) {
    if (!v.is_number()) throw std::invalid_argument("ask 'x' must contain only numbers");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw std::invalid_argument("ask 'x' must be finite");
    ask.x.push_back(d);
  }
  return ask;
}

std::vector<std::string> expand_command(const std::vector<std::string>& command_template,
                                        const std::filesystem::path& script) {
  static constexpr std::string_view placeholder = "{script}";
  std::vector<std::string> out;
  bool used = false;
  for (auto arg : command_template) {
    for (auto pos = arg.find(placeholder); pos != std::string::npos; pos = arg.find(placeholder, pos)) {
      arg.replace(pos, placeholder.size(), script.string());
      pos += script.string().size();
      used = true;
    }
    out.push_back(std::move(arg));
  }
  if (!used) out.push_back(script.string());
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

void close_fd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

struct Child {
  pid_t pid = -1;
  int in = -1;
  int out = -1;
  int err = -1;
};

Child spawn(const std::vector<std::string>& command, const std::filesystem::path& dir) {
  if (command.empty()) throw std::invalid_argument("empty candidate command");
  int in[2], out[2], err[2];
  if (::pipe2(in, O_CLOEXEC) != 0) throw std::system_error(errno, std::generic_category(), "pipe");
  if (::pipe2(out, O_CLOEXEC) != 0) {
    ::close(in[0]), ::close(in[1]);
    throw std::system_error(errno, std::generic_category(), "pipe");
  }
  if (::pipe2(err, O_CLOEXEC) != 0) {
    ::close(in[0]), ::close(in[1]), ::close(out[0]), ::close(out[1]);
    throw std::system_error(errno, std::generic_category(), "pipe");
  }

  std::vector<char*> argv;
  for (const auto& a : command) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);
  const std::string cwd = dir.string();

  const pid_t pid = ::fork();
  if (pid < 0) {
    for (int fd : {in[0], in[1], out[0], out[1], err[0], err[1]}) ::close(fd);
    throw std::system_error(errno, std::generic_category(), "fork");
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(in[0], STDIN_FILENO);
    ::dup2(out[1], STDOUT_FILENO);
    ::dup2(err[1], STDERR_FILENO);
    ::signal(SIGPIPE, SIG_DFL);
    if (!cwd.empty() && ::chdir(cwd.c_str()) != 0) {
      static constexpr char msg[] = "sandbox: cannot change directory\n";
      [[maybe_unused]] auto n = ::write(STDERR_FILENO, msg, sizeof msg - 1);
      ::_exit(127);
    }
    ::execvp(argv[0], argv.data());
    static constexpr char msg[] = "sandbox: exec failed: ";
    [[maybe_unused]] auto n = ::write(STDERR_FILENO, msg, sizeof msg - 1);
    const char* why = std::strerror(errno);
    n = ::write(STDERR_FILENO, why, std::strlen(why));
    n = ::write(STDERR_FILENO, "\n", 1);
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  ::close(in[0]);
  ::close(out[1]);
  ::close(err[1]);
  ::fcntl(in[1], F_SETFL, ::fcntl(in[1], F_GETFL) | O_NONBLOCK);
  return {pid, in[1], out[0], err[0]};
}

// Appends to a bounded buffer that keeps only the newest bytes.
void append_tail(std::string& tail, std::string_view chunk, std::size_t limit) {
  tail.append(chunk);
  if (tail.size() > limit) tail.erase(0, tail.size() - limit);
}

class Session {
 public:
  Session(Child child, BudgetedObjective& objective, const SandboxOptions& options)
      : child_(child), objective_(objective), options_(options), start_(Clock::now()) {
    deadline_ = start_ + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(options.timeout_s));
  }

  CandidateRunResult run(const std::string& init) {
    pending_ = init;
    serve();
    finish();
    CandidateRunResult result;
    result.trajectory = objective_.trajectory();
    result.best_x = objective_.best_x();
    result.status = status_.value_or(RunStatus::ok);
    result.stderr_capture = std::move(stderr_);
    result.wall_time = std::chrono::duration<double>(Clock::now() - start_).count();
    result.exit_code = exit_code_;
    result.detail = std::move(detail_);
    return result;
  }

 private:
  void fail(RunStatus status, std::string detail) {
    if (status_) return;
    status_ = status;
    detail_ = std::move(detail);
  }

  int millis_left() const {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline_ - Clock::now()).count();
    return static_cast<int>(std::clamp<long long>(left, 0, 1000));
  }

  void serve() {
    char buf[8192];
    while (!status_ && !done_) {
      if (Clock::now() >= deadline_) {
        fail(RunStatus::timeout, fmt::format("no result within {} s", options_.timeout_s));
        return;
      }
      pollfd fds[3];
      nfds_t n = 0;
      int out_slot = -1, err_slot = -1, in_slot = -1;
      if (child_.out >= 0) fds[out_slot = static_cast<int>(n++)] = {child_.out, POLLIN, 0};
      if (child_.err >= 0) fds[err_slot = static_cast<int>(n++)] = {child_.err, POLLIN, 0};
      if (child_.in >= 0 && !pending_.empty()) fds[in_slot = static_cast<int>(n++)] = {child_.in, POLLOUT, 0};
      if (child_.out < 0) return;  // stdout closed: the candidate is finishing
      const int ready = ::poll(fds, n, millis_left());
      if (ready < 0) {
        if (errno == EINTR) continue;
        throw std::system_error(errno, std::generic_category(), "poll");
      }
      if (in_slot >= 0 && (fds[in_slot].revents & (POLLOUT | POLLERR | POLLHUP))) flush_stdin();
      if (err_slot >= 0 && (fds[err_slot].revents & (POLLIN | POLLHUP | POLLERR))) {
        const auto got = ::read(child_.err, buf, sizeof buf);
        if (got > 0) append_tail(stderr_, {buf, static_cast<std::size_t>(got)}, options_.stderr_limit);
        else if (got == 0 || errno != EINTR) close_fd(child_.err);
      }
      if (out_slot >= 0 && (fds[out_slot].revents & (POLLIN | POLLHUP | POLLERR))) {
        const auto got = ::read(child_.out, buf, sizeof buf);
        if (got > 0) {
          stdout_.append(buf, static_cast<std::size_t>(got));
          consume_lines();
        } else if (got == 0 || errno != EINTR) {
          close_fd(child_.out);
          if (!stdout_.empty() && !status_ && !done_) handle_line(std::exchange(stdout_, {}));
        }
      }
    }
  }

  void flush_stdin() {
    while (!pending_.empty()) {
      const auto wrote = ::write(child_.in, pending_.data(), pending_.size());
      if (wrote > 0) {
        pending_.erase(0, static_cast<std::size_t>(wrote));
        continue;
      }
      if (wrote < 0 && errno == EINTR) continue;
      if (wrote < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) return;
      // EPIPE: the candidate stopped reading; what it already asked for is recorded.
      pending_.clear();
      close_fd(child_.in);
      return;
    }
  }

  void consume_lines() {
    static constexpr std::size_t max_line = std::size_t{1} << 24;
    std::size_t begin = 0;
    for (auto nl = stdout_.find('\n'); nl != std::string::npos; nl = stdout_.find('\n', begin)) {
      handle_line(stdout_.substr(begin, nl - begin));
      begin = nl + 1;
      if (status_ || done_) break;
    }
    stdout_.erase(0, begin);
    if (stdout_.size() > max_line) fail(RunStatus::protocol_error, "unterminated line longer than 16 MiB");
  }

  void handle_line(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) return;
    CandidateMessage msg;
    try {
      msg = parse_candidate_message(line);
    } catch (const std::invalid_argument& e) {
      fail(RunStatus::protocol_error, fmt::format("malformed message: {}", e.what()));
      return;
    }
    if (std::holds_alternative<DoneMessage>(msg)) {
      done_ = true;
      return;
    }
    const auto& x = std::get<AskMessage>(msg).x;
    if (objective_.exhausted()) {
      fail(RunStatus::budget_violation, fmt::format("ask after the budget of {} was spent", objective_.budget()));
      return;
    }
    double fitness = 0.0;
    try {
      fitness = objective_(x);
    } catch (const std::invalid_argument& e) {
      fail(RunStatus::protocol_error, fmt::format("invalid point: {}", e.what()));
      return;
    } catch (const std::exception& e) {
      fail(RunStatus::protocol_error, fmt::format("objective rejected point: {}", e.what()));
      return;
    }
    pending_ += tell_message(fitness, objective_.remaining());
    if (child_.in >= 0) flush_stdin();
  }

  bool reap(bool block) {
    if (exited_) return true;
    int wstatus = 0;
    pid_t r;
    do r = ::waitpid(child_.pid, &wstatus, block ? 0 : WNOHANG);
    while (r < 0 && errno == EINTR);
    if (r != child_.pid) return false;
    exited_ = true;
    if (WIFEXITED(wstatus)) exit_code_ = WEXITSTATUS(wstatus);
    else if (WIFSIGNALED(wstatus)) signal_ = WTERMSIG(wstatus);
    return true;
  }

  void drain_stderr(int timeout_ms) {
    char buf[8192];
    const auto until = Clock::now() + std::chrono::milliseconds(timeout_ms);
    while (child_.err >= 0 && Clock::now() < until) {
      pollfd p{child_.err, POLLIN, 0};
      const int left = static_cast<int>(
          std::max<long long>(0, std::chrono::duration_cast<std::chrono::milliseconds>(until - Clock::now()).count()));
      if (::poll(&p, 1, left) <= 0) break;
      const auto got = ::read(child_.err, buf, sizeof buf);
      if (got > 0) append_tail(stderr_, {buf, static_cast<std::size_t>(got)}, options_.stderr_limit);
      else if (got == 0 || errno != EINTR) close_fd(child_.err);
    }
  }

  void kill_group() { ::kill(-child_.pid, SIGKILL); }

  void finish() {
    close_fd(child_.in);
    if (status_) {
      kill_group();
      reap(true);
      drain_stderr(200);
    } else {
      // Either done was sent or stdout closed. Give the process until the
      // deadline to exit on its own, collecting stderr meanwhile.
      const auto grace_end = done_ ? std::min(deadline_, Clock::now() + std::chrono::seconds(2)) : deadline_;
      while (!reap(false) && Clock::now() < grace_end) {
        if (child_.err >= 0) drain_stderr(10);
        else std::this_thread::sleep_for(std::chrono::milliseconds(2));
      }
      if (!exited_) {
        kill_group();
        reap(true);
        if (!done_) fail(RunStatus::timeout, fmt::format("no exit within {} s", options_.timeout_s));
      } else if (!done_ && (signal_ || exit_code_.value_or(0) != 0)) {
        fail(RunStatus::crashed, signal_ ? fmt::format("killed by signal {}", *signal_)
                                         : fmt::format("exit code {}", *exit_code_));
      }
      kill_group();  // stray grandchildren
      drain_stderr(200);
    }
    close_fd(child_.out);
    close_fd(child_.err);
  }

  Child child_;
  BudgetedObjective& objective_;
  const SandboxOptions& options_;
  Clock::time_point start_;
  Clock::time_point deadline_;
  std::string pending_;
  std::string stdout_;
  std::string stderr_;
  std::optional<RunStatus> status_;
  std::string detail_;
  bool done_ = false;
  bool exited_ = false;
  std::optional<int> exit_code_;
  std::optional<int> signal_;
};

}  // namespace

CandidateRunResult run_candidate(const std::vector<std::string>& command, BudgetedObjective& objective,
                                 std::uint64_t seed, const SandboxOptions& options) {
  if (!(options.timeout_s > 0.0)) throw std::invalid_argument("sandbox timeout must be positive");
  static const bool sigpipe_ignored = [] {
    ::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)sigpipe_ignored;
  const auto init = init_message(objective.bounds(), objective.budget(), seed);
  Session session(spawn(command, options.working_dir), objective, options);
  return session.run(init);
}

CandidateRunResult run_candidate(const std::vector<std::string>& command, const ProblemInstance& instance,
                                 std::uint64_t seed, const SandboxOptions& options, const ProblemContext& context) {
  auto objective = make_budgeted(instance, context);
  return run_candidate(command, objective, seed, options);
}

}  // namespace photonbench
