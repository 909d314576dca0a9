#pragma once

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace testing {

inline std::filesystem::path fixture() { return PHOTONBENCH_FIXTURE; }
inline std::filesystem::path cli() { return PHOTONBENCH_CLI; }

/// Fresh empty directory under the build tree.
inline std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::path(PHOTONBENCH_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

struct Completed {
  int exit_code = -1;
  std::string output;  ///< stdout and stderr interleaved
};

/// Runs a shell command line, capturing both output streams.
inline Completed run(const std::string& command) {
  Completed c;
  FILE* pipe = ::popen((command + " 2>&1").c_str(), "r");
  if (!pipe) return c;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) c.output.append(buf.data(), n);
  const int status = ::pclose(pipe);
  c.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return c;
}

inline std::string quote(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

}  // namespace testing
