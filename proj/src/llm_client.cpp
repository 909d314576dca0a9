#include "photonbench/llm_client.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "httplib.h"
#include "json.hpp"

namespace photonbench {

MockLlmClient::MockLlmClient(std::vector<std::string> responses) : responses_(std::move(responses)) {
  if (responses_.empty()) throw std::invalid_argument("mock LLM needs at least one response");
}

MockLlmClient MockLlmClient::from_script(const std::string& text) {
  std::vector<std::string> responses;
  std::string current;
  std::istringstream in(text);
  std::string line;
  bool any = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == "%%%") {
      responses.push_back(std::move(current));
      current.clear();
      any = false;
      continue;
    }
    current += line;
    current += '\n';
    any = true;
  }
  if (any) responses.push_back(std::move(current));
  return MockLlmClient(std::move(responses));
}

MockLlmClient MockLlmClient::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open mock script {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_script(ss.str());
}

std::string MockLlmClient::complete(const std::string& prompt) {
  prompts_.push_back(prompt);
  const std::string& response = responses_[next_];
  next_ = (next_ + 1) % responses_.size();
  if (response.starts_with("!error")) {
    auto end = response.find('\n');
    auto msg = response.substr(6, end == std::string::npos ? std::string::npos : end - 6);
    while (!msg.empty() && msg.front() == ' ') msg.erase(0, 1);
    throw LlmError(msg.empty() ? "scripted failure" : msg);
  }
  return response;
}

ChatCompletionClient::ChatCompletionClient(Options options) : options_(std::move(options)) {
  if (const char* key = std::getenv(options_.api_key_env.c_str())) api_key_ = key;
}

std::string ChatCompletionClient::request_body(const std::string& prompt) const {
  nlohmann::ordered_json body;
  body["model"] = options_.model;
  body["messages"] = nlohmann::ordered_json::array({{{"role", "user"}, {"content", prompt}}});
  body["temperature"] = options_.temperature;
  return body.dump();
}

std::string ChatCompletionClient::parse_response(const std::string& body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw LlmError(fmt::format("response is not JSON: {}", e.what()));
  }
  try {
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    if (j.contains("error")) throw LlmError(fmt::format("endpoint error: {}", j["error"].dump()));
    throw LlmError("response has no choices[0].message.content");
  }
}

std::string ChatCompletionClient::complete(const std::string& prompt) {
  if (api_key_.empty()) throw LlmError(fmt::format("environment variable {} is not set", options_.api_key_env));

  // Split "scheme://host[:port][/prefix]".
  const auto& url = options_.endpoint;
  const auto scheme_end = url.find("://");
  const auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  const std::string origin = url.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? std::string{} : url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();

  httplib::Client client(origin);
  const auto timeout = std::chrono::duration<double>(options_.timeout_s);
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout));
  client.set_write_timeout(std::chrono::seconds(60));
  const httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};
  auto res = client.Post(prefix + "/chat/completions", headers, request_body(prompt), "application/json");
  if (!res) throw LlmError(fmt::format("request to {} failed: {}", url, httplib::to_string(res.error())));
  if (res->status != 200) throw LlmError(fmt::format("HTTP {} from {}: {}", res->status, url, res->body.substr(0, 500)));
  return parse_response(res->body);
}

}  // namespace photonbench
