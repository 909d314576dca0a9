#pragma once

// Minimal TOML-like key/value dialect shared by instance and plan files:
//
//   # comment
//   key = value
//   bounds.lower = 0, 0, 0        (comma-separated lists)
//   name = "quoted strings keep , and #"
//
// Keys are unique; dots in keys carry no structure beyond naming.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace photonbench {

class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in, const std::string& source = "<stream>");
  static KeyValueConfig load(const std::filesystem::path& path);

  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> find(const std::string& key) const;

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::uint64_t get_uint(const std::string& key) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;

  std::vector<std::string> keys() const;
  /// Keys starting with `prefix`, prefix stripped.
  std::map<std::string, std::string> with_prefix(const std::string& prefix) const;

  /// Throws std::invalid_argument naming the first key not in `known` and
  /// not starting with one of `known_prefixes`.
  void require_known(const std::set<std::string>& known, const std::vector<std::string>& known_prefixes = {}) const;

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::string& source() const { return source_; }

 private:
  std::string source_;
  std::map<std::string, std::string> values_;
};

std::vector<std::string> split_list(const std::string& value);

}  // namespace photonbench
