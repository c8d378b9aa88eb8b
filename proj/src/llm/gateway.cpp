#include "vignette/llm/gateway.hpp"

#include <array>

#include "vignette/llm/templates.hpp"
#include "vignette/util.hpp"

namespace vignette::llm {

namespace {

constexpr std::array<std::pair<TemplateId, std::string_view>, 13> kTemplateNames{{
    {TemplateId::EXTRACT_CHARACTERS, "EXTRACT_CHARACTERS"},
    {TemplateId::SELECT_LAYOUT, "SELECT_LAYOUT"},
    {TemplateId::LABEL_ROOMS, "LABEL_ROOMS"},
    {TemplateId::EXTRACT_EVENTS, "EXTRACT_EVENTS"},
    {TemplateId::AFFORDANCE, "AFFORDANCE"},
    {TemplateId::PLACE_REASONING, "PLACE_REASONING"},
    {TemplateId::PERSONA_SUGGEST, "PERSONA_SUGGEST"},
    {TemplateId::CHAR_CHAT, "CHAR_CHAT"},
    {TemplateId::PLAN_ACTIVITY, "PLAN_ACTIVITY"},
    {TemplateId::INNER_VOICE, "INNER_VOICE"},
    {TemplateId::GUIDE_REPLY, "GUIDE_REPLY"},
    {TemplateId::DIVERGENCE_INTENT, "DIVERGENCE_INTENT"},
    {TemplateId::BL_ACTIVITY, "BL_ACTIVITY"},
}};

std::string repair_instruction(const RenderedPrompt& prompt, const std::string& error) {
  return "\n\nYour previous reply could not be used (" + error +
         "). Reply again with a single JSON value only, matching this JSON schema:\n" +
         schema_document(prompt.schema_id).dump();
}

}  // namespace

std::string_view to_string(TemplateId id) {
  for (const auto& [tid, name] : kTemplateNames)
    if (tid == id) return name;
  return "UNKNOWN";
}

std::optional<TemplateId> parse_template_id(std::string_view s) {
  for (const auto& [tid, name] : kTemplateNames)
    if (name == s) return tid;
  return std::nullopt;
}

const std::vector<TemplateId>& all_templates() {
  static const std::vector<TemplateId> ids = [] {
    std::vector<TemplateId> v;
    for (const auto& [tid, name] : kTemplateNames) v.push_back(tid);
    return v;
  }();
  return ids;
}

std::string_view to_string(WithholdReason r) { return r == WithholdReason::POLICY ? "POLICY" : "UNAVAILABLE"; }

std::string variables_key(TemplateId id, const Json& variables) {
  std::string material(to_string(id));
  material.push_back('\n');
  material += variables.dump();  // object keys are kept sorted by nlohmann::json
  return hex64(fnv1a64(material));
}

std::optional<Json> extract_json(std::string_view text) {
  auto try_parse = [](std::string_view s) -> std::optional<Json> {
    Json j = Json::parse(s.begin(), s.end(), nullptr, false);
    if (j.is_discarded()) return std::nullopt;
    return j;
  };
  if (auto j = try_parse(text)) return j;
  // ```json ... ``` fences
  if (auto fence = text.find("```"); fence != std::string_view::npos) {
    auto body_start = text.find('\n', fence);
    auto fence_end = body_start == std::string_view::npos ? body_start : text.find("```", body_start);
    if (fence_end != std::string_view::npos)
      if (auto j = try_parse(text.substr(body_start, fence_end - body_start))) return j;
  }
  auto first = text.find_first_of("{[");
  auto last = text.find_last_of("}]");
  if (first != std::string_view::npos && last != std::string_view::npos && last > first)
    return try_parse(text.substr(first, last - first + 1));
  return std::nullopt;
}

Gateway::Gateway(std::shared_ptr<Provider> provider, GatewayConfig config)
    : provider_(std::move(provider)), config_(config) {
  if (!provider_) throw std::invalid_argument("gateway needs an active provider");
}

void Gateway::set_observer(std::function<void(const RenderedPrompt&)> observer) {
  std::lock_guard lock(observer_mutex_);
  observer_ = std::move(observer);
}

std::string Gateway::call_with_retries(const RenderedPrompt& prompt, ProviderResult& result) const {
  {
    std::lock_guard lock(observer_mutex_);
    if (observer_) observer_(prompt);
  }
  std::string last_error;
  for (int i = 0; i < std::max(1, config_.transport_attempts); ++i) {
    try {
      ProviderReply reply = provider_->generate(prompt);
      result.latency_ms += reply.latency_ms;
      result.canned = result.canned || reply.canned;
      return reply.text;
    } catch (const TransportError& e) {
      last_error = e.what();
    }
  }
  throw TransportError(last_error);
}

ProviderResult Gateway::complete(const PromptRequest& request) const {
  ProviderResult result;
  result.provider_id = provider_->id();
  RenderedPrompt prompt = render_prompt(request);
  const std::string base_user = prompt.user;

  for (int attempt = 0; attempt <= config_.max_repairs; ++attempt) {
    prompt.attempt = attempt;
    result.attempts = attempt + 1;
    try {
      result.raw_text = call_with_retries(prompt, result);
    } catch (const TransportError& e) {
      result.failure = FailureKind::transport;
      result.error = e.what();
      return result;
    }
    std::string error;
    if (auto value = extract_json(result.raw_text)) {
      SchemaCheck check = check_schema(prompt.schema_id, *value);
      if (check.ok) {
        result.parsed = std::move(*value);
        result.failure = FailureKind::none;
        result.error.clear();
        return result;
      }
      error = "schema violation at " + check.error;
    } else {
      error = "reply is not JSON";
    }
    result.failure = FailureKind::schema;
    result.error = error;
    prompt.user = base_user + repair_instruction(prompt, error);
  }
  return result;
}

ModerationVerdict Gateway::moderate(const std::string& text) const {
  try {
    return provider_->flagged(text) ? ModerationVerdict::withhold(WithholdReason::POLICY) : ModerationVerdict::allow();
  } catch (const TransportError&) {
    return ModerationVerdict::withhold(WithholdReason::UNAVAILABLE);
  } catch (const std::exception&) {
    return ModerationVerdict::withhold(WithholdReason::UNAVAILABLE);
  }
}

}  // namespace vignette::llm
