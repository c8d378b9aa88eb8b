#include "vignette/llm/http_provider.hpp"

#include <chrono>
#include <cstdlib>

#include "httplib.h"

namespace vignette::llm {

namespace {

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::string();
}

}  // namespace

std::optional<HttpProviderConfig> HttpProviderConfig::from_env() {
  HttpProviderConfig c;
  c.base_url = env_or_empty("VIGNETTE_LLM_URL");
  if (c.base_url.empty()) return std::nullopt;
  c.model = env_or_empty("VIGNETTE_LLM_MODEL");
  if (c.model.empty()) c.model = "gpt-4o-2024-05-13";
  c.api_key = env_or_empty("VIGNETTE_LLM_KEY");
  return c;
}

OpenAiCompatibleProvider::OpenAiCompatibleProvider(HttpProviderConfig config) : config_(std::move(config)) {
  const std::string& url = config_.base_url;
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw std::invalid_argument("LLM base URL needs a scheme: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  origin_ = path_start == std::string::npos ? url : url.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? std::string() : url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

Json OpenAiCompatibleProvider::request_body(const RenderedPrompt& prompt) const {
  return {{"model", config_.model},
          {"messages", Json::array({{{"role", "system"}, {"content", prompt.system}},
                                    {{"role", "user"}, {"content", prompt.user}}})},
          {"temperature", prompt.temperature},
          {"response_format", {{"type", "json_object"}}}};
}

Json OpenAiCompatibleProvider::post(const std::string& path, const Json& body) const {
  httplib::Client client(origin_);
  const auto secs = static_cast<time_t>(config_.timeout_seconds);
  client.set_connection_timeout(secs, 0);
  client.set_read_timeout(secs, 0);
  client.set_write_timeout(secs, 0);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
  auto res = client.Post(path_prefix_ + path, headers, body.dump(), "application/json");
  if (!res) throw TransportError("request to " + origin_ + path_prefix_ + path + " failed: " + httplib::to_string(res.error()));
  if (res->status == 429 || res->status >= 500)
    throw TransportError("provider returned HTTP " + std::to_string(res->status));
  if (res->status != 200) throw TransportError("provider rejected request with HTTP " + std::to_string(res->status) + ": " + res->body);
  Json doc = Json::parse(res->body, nullptr, false);
  if (doc.is_discarded()) throw TransportError("provider returned a non-JSON body");
  return doc;
}

ProviderReply OpenAiCompatibleProvider::generate(const RenderedPrompt& prompt) {
  const auto start = std::chrono::steady_clock::now();
  Json doc = post("/chat/completions", request_body(prompt));
  ProviderReply reply;
  reply.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  const Json* content = nullptr;
  if (doc.contains("choices") && doc["choices"].is_array() && !doc["choices"].empty()) {
    const Json& choice = doc["choices"][0];
    if (choice.contains("message") && choice["message"].contains("content")) content = &choice["message"]["content"];
  }
  if (!content || !content->is_string()) throw TransportError("provider response has no message content");
  reply.text = content->get<std::string>();
  return reply;
}

bool OpenAiCompatibleProvider::flagged(const std::string& text) {
  Json doc = post("/moderations", {{"input", text}});
  if (!doc.contains("results") || !doc["results"].is_array() || doc["results"].empty())
    throw TransportError("moderation response has no results");
  return doc["results"][0].value("flagged", false);
}

}  // namespace vignette::llm
