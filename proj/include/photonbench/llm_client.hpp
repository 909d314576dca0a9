#pragma once

// Text-in, text-out language model clients.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace photonbench {

class LlmError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  /// One synchronous completion. Throws LlmError on failure.
  virtual std::string complete(const std::string& prompt) = 0;
};

/// Replays scripted responses in order and cycles when they run out. Script
/// files separate responses with lines holding only "%%%"; a response whose
/// first line starts with "!error" makes complete() throw.
class MockLlmClient : public LlmClient {
 public:
  explicit MockLlmClient(std::vector<std::string> responses);
  static MockLlmClient from_script(const std::string& text);
  static MockLlmClient load(const std::filesystem::path& path);

  std::string complete(const std::string& prompt) override;

  const std::vector<std::string>& prompts() const { return prompts_; }
  std::size_t calls() const { return prompts_.size(); }

 private:
  std::vector<std::string> responses_;
  std::vector<std::string> prompts_;
  std::size_t next_ = 0;
};

/// OpenAI-style POST {base}/chat/completions with a single user message.
class ChatCompletionClient : public LlmClient {
 public:
  struct Options {
    std::string endpoint = "https://api.openai.com/v1";
    std::string model = "gpt-4o-2024-08-06";
    double temperature = 1.0;
    std::string api_key_env = "OPENAI_API_KEY";
    double timeout_s = 300.0;
  };

  explicit ChatCompletionClient(Options options);
  std::string complete(const std::string& prompt) override;

  /// Request body for one prompt.
  std::string request_body(const std::string& prompt) const;
  /// Content of the first choice; throws LlmError otherwise.
  static std::string parse_response(const std::string& body);

 private:
  Options options_;
  std::string api_key_;
};

}  // namespace photonbench
