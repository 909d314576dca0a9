#include "photonbench/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <stdexcept>

#include <fmt/format.h>

namespace photonbench {

namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

// Strips a trailing '#' comment that is not inside quotes.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

}  // namespace

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string current;
  bool quoted = false;
  for (char c : value) {
    if (c == '"') quoted = !quoted;
    if (c == ',' && !quoted) {
      out.push_back(unquote(trim(current)));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  const auto last = trim(current);
  if (!last.empty() || !out.empty()) out.push_back(unquote(last));
  return out;
}

KeyValueConfig KeyValueConfig::parse(std::istream& in, const std::string& source) {
  KeyValueConfig cfg;
  cfg.source_ = source;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(strip_comment(raw));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(fmt::format("{}:{}: expected 'key = value'", source, line_no));
    const auto key = trim(std::string_view(line).substr(0, eq));
    const auto value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw std::invalid_argument(fmt::format("{}:{}: empty key", source, line_no));
    if (!cfg.values_.emplace(key, value).second)
      throw std::invalid_argument(fmt::format("{}:{}: duplicate key '{}'", source, line_no, key));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open config file {}", path.string()));
  return parse(in, path.string());
}

std::optional<std::string> KeyValueConfig::find(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return unquote(it->second);
}

std::string KeyValueConfig::get_string(const std::string& key) const {
  auto v = find(key);
  if (!v) throw std::invalid_argument(fmt::format("{}: missing key '{}'", source_, key));
  return *v;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  return find(key).value_or(fallback);
}

double KeyValueConfig::get_double(const std::string& key) const {
  const auto s = get_string(key);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::invalid_argument(fmt::format("{}: key '{}' is not a number: '{}'", source_, key, s));
  return value;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  return contains(key) ? get_double(key) : fallback;
}

std::uint64_t KeyValueConfig::get_uint(const std::string& key) const {
  const auto s = get_string(key);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::invalid_argument(fmt::format("{}: key '{}' is not a non-negative integer: '{}'", source_, key, s));
  return value;
}

std::uint64_t KeyValueConfig::get_uint(const std::string& key, std::uint64_t fallback) const {
  return contains(key) ? get_uint(key) : fallback;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  if (!contains(key)) return fallback;
  const auto s = get_string(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw std::invalid_argument(fmt::format("{}: key '{}' is not a boolean: '{}'", source_, key, s));
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split_list(get_string(key))) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
    if (ec != std::errc{} || ptr != item.data() + item.size())
      throw std::invalid_argument(fmt::format("{}: key '{}' has a non-numeric entry '{}'", source_, key, item));
    out.push_back(value);
  }
  return out;
}

std::vector<std::string> KeyValueConfig::get_list(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw std::invalid_argument(fmt::format("{}: missing key '{}'", source_, key));
  return split_list(it->second);
}

std::vector<std::string> KeyValueConfig::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) out.push_back(k);
  return out;
}

std::map<std::string, std::string> KeyValueConfig::with_prefix(const std::string& prefix) const {
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : values_)
    if (k.size() > prefix.size() && k.starts_with(prefix)) out.emplace(k.substr(prefix.size()), unquote(v));
  return out;
}

void KeyValueConfig::require_known(const std::set<std::string>& known,
                                   const std::vector<std::string>& known_prefixes) const {
  for (const auto& [k, v] : values_) {
    if (known.count(k)) continue;
    bool ok = false;
    for (const auto& p : known_prefixes) ok = ok || k.starts_with(p);
    if (!ok) throw std::invalid_argument(fmt::format("{}: unknown key '{}'", source_, k));
  }
}

}  // namespace photonbench
