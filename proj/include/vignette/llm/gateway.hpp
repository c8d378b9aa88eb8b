#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace vignette::llm {

using Json = nlohmann::json;

enum class TemplateId {
  EXTRACT_CHARACTERS,
  SELECT_LAYOUT,
  LABEL_ROOMS,
  EXTRACT_EVENTS,
  AFFORDANCE,
  PLACE_REASONING,
  PERSONA_SUGGEST,
  CHAR_CHAT,
  PLAN_ACTIVITY,
  INNER_VOICE,
  GUIDE_REPLY,
  DIVERGENCE_INTENT,
  BL_ACTIVITY,
};

std::string_view to_string(TemplateId id);
std::optional<TemplateId> parse_template_id(std::string_view s);
const std::vector<TemplateId>& all_templates();

struct PromptRequest {
  TemplateId template_id = TemplateId::CHAR_CHAT;
  Json variables = Json::object();
  std::string output_schema_id;  // empty selects the template default
};

struct RenderedPrompt {
  TemplateId template_id = TemplateId::CHAR_CHAT;
  std::string schema_id;
  std::string system;
  std::string user;
  Json variables = Json::object();
  std::string variables_key;  // stable hash of (template_id, variables), see variables_key()
  int attempt = 0;            // 0 for the first ask, n for the n-th repair re-ask
  double temperature = 0.0;
};

/// Thrown by providers on network or endpoint failures. Retryable.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProviderReply {
  std::string text;
  double latency_ms = 0.0;
  bool canned = false;  // mock answered from its template default, not from the script
};

class Provider {
 public:
  virtual ~Provider() = default;
  virtual std::string id() const = 0;
  virtual ProviderReply generate(const RenderedPrompt& prompt) = 0;
  /// True when the text violates the content policy. Throws TransportError when unavailable.
  virtual bool flagged(const std::string& text) = 0;
};

enum class FailureKind { none, schema, transport };

struct ProviderResult {
  std::string raw_text;
  std::optional<Json> parsed;
  std::string error;
  double latency_ms = 0.0;  // summed over all attempts
  std::string provider_id;
  int attempts = 0;
  bool canned = false;
  FailureKind failure = FailureKind::none;

  bool ok() const { return parsed.has_value(); }
};

enum class WithholdReason { POLICY, UNAVAILABLE };

struct ModerationVerdict {
  bool allowed = true;
  std::optional<WithholdReason> reason;

  static ModerationVerdict allow() { return {}; }
  static ModerationVerdict withhold(WithholdReason r) { return {false, r}; }
};

std::string_view to_string(WithholdReason r);

/// Line substituted for any withheld text before it reaches the viewer.
inline constexpr std::string_view kRefusalLine = "(This message was withheld by the content filter.)";

struct GatewayConfig {
  int max_repairs = 2;          // schema re-asks after the first answer
  int transport_attempts = 3;   // tries per ask before a transport failure is surfaced
};

/// Canonical key for mock lookups: FNV-1a 64 over "<TEMPLATE_ID>\n<variables as sorted compact JSON>".
std::string variables_key(TemplateId id, const Json& variables);

/// Pulls the first JSON value out of a reply, tolerating markdown code fences and surrounding prose.
std::optional<Json> extract_json(std::string_view text);

/// The only place prompts are rendered and providers are called.
class Gateway {
 public:
  explicit Gateway(std::shared_ptr<Provider> provider, GatewayConfig config = {});

  ProviderResult complete(const PromptRequest& request) const;
  ModerationVerdict moderate(const std::string& text) const;

  /// Called for every rendered prompt, including repair re-asks.
  void set_observer(std::function<void(const RenderedPrompt&)> observer);

  Provider& provider() const { return *provider_; }
  const GatewayConfig& config() const { return config_; }

 private:
  std::string call_with_retries(const RenderedPrompt& prompt, ProviderResult& result) const;

  std::shared_ptr<Provider> provider_;
  GatewayConfig config_;
  mutable std::mutex observer_mutex_;
  std::function<void(const RenderedPrompt&)> observer_;
};

}  // namespace vignette::llm
