// Protocol-speaking candidate used by the sandbox, bench and discovery tests.
//
//   candidate_fixture [script] [key=value ...]
//
// A script is a text file of key=value lines (other lines ignored), so the
// same binary can run sources written by the discovery loop. Keys:
//   mode   random | violator | crasher | slowpoke | garbage | badpoint |
//          silent | fail | stubborn | stall
//   asks   number of asks for random mode (default: the budget)
//   after  asks before crashing (crasher, default budget / 2)
//   sleep  seconds to sleep (slowpoke and stall, default 30)
//   code   exit code for crasher / fail (default 1)

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "photonbench/optimizers.hpp"

namespace {

using Options = std::map<std::string, std::string>;

void absorb(Options& opts, const std::string& line) {
  const auto eq = line.find('=');
  if (eq == std::string::npos || line.starts_with("#")) return;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  };
  opts[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
}

std::size_t get(const Options& opts, const std::string& key, std::size_t fallback) {
  auto it = opts.find(key);
  return it == opts.end() ? fallback : std::stoul(it->second);
}

struct Session {
  std::size_t dim = 0;
  std::size_t budget = 0;
  std::vector<double> lb, ub;
  std::uint64_t seed = 0;

  // Returns the fitness, or exits when the harness closes the pipe.
  double ask(const std::vector<double>& x) {
    nlohmann::ordered_json msg;
    msg["type"] = "ask";
    msg["x"] = x;
    std::cout << msg.dump() << '\n' << std::flush;
    std::string line;
    if (!std::getline(std::cin, line)) std::exit(0);
    return nlohmann::json::parse(line).at("fitness").get<double>();
  }

  void done() { std::cout << R"({"type":"done"})" << '\n' << std::flush; }

  std::vector<double> random_point(photonbench::Rng& rng) const {
    std::vector<double> x(dim);
    for (std::size_t j = 0; j < dim; ++j) x[j] = rng.uniform(lb[j], ub[j]);
    return x;
  }
};

}  // namespace

int main(int argc, char** argv) {
  Options opts{{"mode", "random"}};
  for (int a = 1; a < argc; ++a) {
    const std::string arg = argv[a];
    if (arg.find('=') != std::string::npos) {
      absorb(opts, arg);
      continue;
    }
    std::ifstream script(arg);
    if (!script) {
      std::cerr << "cannot open script " << arg << '\n';
      return 3;
    }
    for (std::string line; std::getline(script, line);) absorb(opts, line);
  }
  const std::string mode = opts["mode"];

  if (mode == "slowpoke") std::this_thread::sleep_for(std::chrono::seconds(get(opts, "sleep", 30)));

  Session s;
  std::string line;
  if (!std::getline(std::cin, line)) {
    std::cerr << "no init message\n";
    return 4;
  }
  try {
    const auto init = nlohmann::json::parse(line);
    s.dim = init.at("dim").get<std::size_t>();
    s.budget = init.at("budget").get<std::size_t>();
    s.lb = init.at("lb").get<std::vector<double>>();
    s.ub = init.at("ub").get<std::vector<double>>();
    s.seed = init.at("seed").get<std::uint64_t>();
  } catch (const std::exception& e) {
    std::cerr << "malformed init: " << e.what() << '\n';
    return 4;
  }

  photonbench::Rng rng(s.seed);
  const int code = static_cast<int>(get(opts, "code", 1));

  if (mode == "random" || mode == "slowpoke") {
    const std::size_t asks = std::min(get(opts, "asks", s.budget), s.budget);
    for (std::size_t k = 0; k < asks; ++k) s.ask(s.random_point(rng));
    s.done();
  } else if (mode == "violator") {
    for (std::size_t k = 0; k <= s.budget; ++k) s.ask(s.random_point(rng));
    s.done();
  } else if (mode == "stubborn") {
    // Ignores the budget and never stops asking.
    for (;;) s.ask(s.random_point(rng));
  } else if (mode == "crasher") {
    const std::size_t after = get(opts, "after", s.budget / 2);
    for (std::size_t k = 0; k < after; ++k) s.ask(s.random_point(rng));
    std::cerr << "Traceback (most recent call last):\n"
              << "  File \"candidate.py\", line 42, in __call__\n"
              << "ZeroDivisionError: division by zero\n";
    return code;
  } else if (mode == "stall") {
    // Hangs without finishing after its asks.
    for (std::size_t k = 0; k < get(opts, "asks", 5); ++k) s.ask(s.random_point(rng));
    std::this_thread::sleep_for(std::chrono::seconds(get(opts, "sleep", 30)));
  } else if (mode == "garbage") {
    std::cout << "this is not json\n" << std::flush;
    std::getline(std::cin, line);
  } else if (mode == "badpoint") {
    auto x = s.lb;
    x[0] -= 1.0;
    s.ask(x);
  } else if (mode == "silent") {
    return 0;
  } else if (mode == "fail") {
    std::cerr << "fixture failure\n";
    return code;
  } else {
    std::cerr << "unknown mode " << mode << '\n';
    return 2;
  }
  return 0;
}
