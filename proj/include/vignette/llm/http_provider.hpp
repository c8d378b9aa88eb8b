#pragma once

#include <optional>
#include <string>

#include "vignette/llm/gateway.hpp"

namespace vignette::llm {

struct HttpProviderConfig {
  std::string base_url;  // e.g. https://api.openai.com/v1
  std::string model;
  std::string api_key;
  double timeout_seconds = 60.0;

  /// Reads VIGNETTE_LLM_URL, VIGNETTE_LLM_MODEL and VIGNETTE_LLM_KEY. Empty when the URL is unset.
  static std::optional<HttpProviderConfig> from_env();
};

/// OpenAI-compatible chat-completions client: POST {base}/chat/completions and {base}/moderations.
class OpenAiCompatibleProvider : public Provider {
 public:
  explicit OpenAiCompatibleProvider(HttpProviderConfig config);

  std::string id() const override { return "openai-compatible:" + config_.model; }
  ProviderReply generate(const RenderedPrompt& prompt) override;
  bool flagged(const std::string& text) override;

  /// Body sent for a prompt. Exposed for wire-format tests.
  Json request_body(const RenderedPrompt& prompt) const;

 private:
  Json post(const std::string& path, const Json& body) const;

  HttpProviderConfig config_;
  std::string origin_;       // scheme://host:port
  std::string path_prefix_;  // e.g. /v1
};

}  // namespace vignette::llm
