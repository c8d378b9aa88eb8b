#include "vignette/llm/mock.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include "vignette/util.hpp"

namespace vignette::llm {

namespace {

TemplateId template_of(const Json& j, const std::string& where) {
  if (!j.is_string()) throw ScriptError(where + ": template must be a string");
  auto id = parse_template_id(j.get<std::string>());
  if (!id) throw ScriptError(where + ": unknown template '" + j.get<std::string>() + "'");
  return *id;
}

std::string response_text(const Json& r) { return r.is_string() ? r.get<std::string>() : r.dump(); }

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool subset_matches(const Json& pattern, const Json& value) {
  if (pattern.is_object() && value.is_object()) {
    for (const auto& [k, v] : pattern.items()) {
      auto it = value.find(k);
      if (it == value.end() || !subset_matches(v, *it)) return false;
    }
    return true;
  }
  return pattern == value;
}

bool when_matches(const Json& when, const Json& variables) {
  for (const auto& [k, v] : when.items()) {
    const Json* target = nullptr;
    if (!k.empty() && k[0] == '/') {
      Json::json_pointer ptr(k);
      if (!variables.contains(ptr)) return false;
      target = &variables.at(ptr);
    } else {
      auto it = variables.find(k);
      if (it == variables.end()) return false;
      target = &*it;
    }
    if (!subset_matches(v, *target)) return false;
  }
  return true;
}

}  // namespace

MockScript MockScript::from_json(const Json& doc) {
  if (!doc.is_object()) throw ScriptError("mock script must be a JSON object");
  MockScript s;
  s.provider_id = doc.value("provider_id", s.provider_id);
  if (auto d = doc.find("defaults"); d != doc.end()) {
    if (!d->is_object()) throw ScriptError("defaults must be an object");
    s.default_latency_ms = d->value("latency_ms", 0.0);
    s.real_delay = d->value("real_delay", false);
    if (auto t = d->find("template_latency_ms"); t != d->end())
      for (const auto& [name, ms] : t->items()) s.template_latency_ms[template_of(Json(name), "defaults")] = ms.get<double>();
    if (auto t = d->find("transport_faults"); t != d->end())
      for (const auto& name : *t) s.transport_faults.insert(template_of(name, "defaults.transport_faults"));
  }
  if (auto m = doc.find("moderation"); m != doc.end()) {
    if (!m->is_object()) throw ScriptError("moderation must be an object");
    for (const auto& w : m->value("denylist", Json::array())) s.moderation.denylist.push_back(w.get<std::string>());
    s.moderation.unavailable = m->value("unavailable", false);
  }
  if (auto e = doc.find("entries"); e != doc.end()) {
    if (!e->is_array()) throw ScriptError("entries must be an array");
    for (std::size_t i = 0; i < e->size(); ++i) {
      const Json& entry = (*e)[i];
      const std::string where = "entries[" + std::to_string(i) + "]";
      if (!entry.is_object()) throw ScriptError(where + ": expected object");
      MockEntry m;
      if (!entry.contains("template")) throw ScriptError(where + ": missing template");
      m.template_id = template_of(entry["template"], where);
      m.key = entry.value("key", std::string());
      if (auto w = entry.find("when"); w != entry.end()) {
        if (!w->is_object()) throw ScriptError(where + ": when must be an object");
        m.when = *w;
      }
      if (m.key.empty() && !entry.contains("when")) throw ScriptError(where + ": needs a key or a when clause (an empty when matches everything)");
      if (auto r = entry.find("responses"); r != entry.end()) {
        if (!r->is_array() || r->empty()) throw ScriptError(where + ": responses must be a non-empty array");
        for (const auto& x : *r) m.responses.push_back(response_text(x));
      } else if (auto r1 = entry.find("response"); r1 != entry.end()) {
        m.responses.push_back(response_text(*r1));
      } else {
        throw ScriptError(where + ": missing response");
      }
      if (auto l = entry.find("latency_ms"); l != entry.end()) {
        if (!l->is_number() || l->get<double>() < 0) throw ScriptError(where + ": latency_ms must be a non-negative number");
        m.latency_ms = l->get<double>();
      }
      s.entries.push_back(std::move(m));
    }
  }
  return s;
}

MockScript MockScript::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ScriptError("cannot open mock script " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  Json doc = Json::parse(buf.str(), nullptr, false);
  if (doc.is_discarded()) throw ScriptError("mock script " + file.string() + " is not valid JSON");
  return from_json(doc);
}

ScriptedMock::ScriptedMock(MockScript script) : script_(std::move(script)) {}

std::shared_ptr<ScriptedMock> ScriptedMock::from_file(const std::filesystem::path& file) {
  return std::make_shared<ScriptedMock>(MockScript::load(file));
}

const MockEntry* ScriptedMock::lookup(const RenderedPrompt& prompt) const {
  for (const auto& e : script_.entries)
    if (e.template_id == prompt.template_id && !e.key.empty() && e.key == prompt.variables_key) return &e;
  for (const auto& e : script_.entries)
    if (e.template_id == prompt.template_id && e.key.empty() && when_matches(e.when, prompt.variables)) return &e;
  return nullptr;
}

ProviderReply ScriptedMock::generate(const RenderedPrompt& prompt) {
  const MockEntry* entry = lookup(prompt);
  ProviderReply reply;
  double latency = script_.default_latency_ms;
  {
    std::lock_guard lock(mutex_);
    ++calls_;
    seen_.insert(prompt.template_id);
    if (auto it = script_.template_latency_ms.find(prompt.template_id); it != script_.template_latency_ms.end())
      latency = it->second;
    if (!entry) misses_.push_back({prompt.template_id, prompt.variables_key});
  }
  if (script_.transport_faults.count(prompt.template_id))
    throw TransportError("injected transport fault for " + std::string(to_string(prompt.template_id)));
  if (entry) {
    std::size_t idx = std::min<std::size_t>(static_cast<std::size_t>(prompt.attempt), entry->responses.size() - 1);
    reply.text = entry->responses[idx];
    if (entry->latency_ms) latency = *entry->latency_ms;
  } else {
    reply.text = canned_response(prompt.template_id, prompt.variables).dump();
    reply.canned = true;
  }
  if (script_.real_delay && latency > 0) {
    auto start = std::chrono::steady_clock::now();
    std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(latency));
    reply.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  } else {
    reply.latency_ms = latency;
  }
  return reply;
}

bool ScriptedMock::flagged(const std::string& text) {
  if (script_.moderation.unavailable) throw TransportError("moderation endpoint timed out");
  const std::string haystack = lower(text);
  return std::any_of(script_.moderation.denylist.begin(), script_.moderation.denylist.end(),
                     [&](const std::string& token) { return !token.empty() && haystack.find(lower(token)) != std::string::npos; });
}

std::vector<ScriptedMock::Miss> ScriptedMock::misses() const {
  std::lock_guard lock(mutex_);
  return misses_;
}

std::set<TemplateId> ScriptedMock::seen_templates() const {
  std::lock_guard lock(mutex_);
  return seen_;
}

std::size_t ScriptedMock::call_count() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

void ScriptedMock::set_template_latency(TemplateId id, double latency_ms) {
  std::lock_guard lock(mutex_);
  script_.template_latency_ms[id] = latency_ms;
}

Json canned_response(TemplateId id, const Json& variables) {
  auto str = [&](const char* key, const char* fallback) {
    auto it = variables.find(key);
    return it != variables.end() && it->is_string() && !it->get<std::string>().empty() ? it->get<std::string>()
                                                                                        : std::string(fallback);
  };
  auto size_of = [&](const char* key) -> std::size_t {
    auto it = variables.find(key);
    return it != variables.end() && it->is_array() ? it->size() : 0;
  };
  switch (id) {
    case TemplateId::EXTRACT_CHARACTERS:
      return {{"characters", Json::array({{{"name", "me"}, {"role", "PC"}, {"age", nullptr}, {"personality", nullptr},
                                           {"social_role", nullptr}, {"mood", nullptr}, {"language_style", nullptr}}})},
              {"flags", Json::array()}};
    case TemplateId::SELECT_LAYOUT:
      return {{"tag", "residential"}};
    case TemplateId::LABEL_ROOMS: {
      Json labels = Json::object();
      if (auto rooms = variables.find("rooms"); rooms != variables.end() && rooms->is_array())
        for (const auto& r : *rooms) labels[r.value("id", "")] = r.value("default_label", std::string("room"));
      return {{"labels", labels}};
    }
    case TemplateId::EXTRACT_EVENTS: {
      if (variables.value("phase_objects", false)) return {{"objects", Json::array()}};
      if (variables.value("phase_actions", false)) return {{"actions", Json::array()}};
      if (variables.value("phase_group", false)) {
        Json groups = Json::array();
        for (std::size_t i = 0; i < size_of("actions"); ++i) groups.push_back(Json::array({i}));
        return {{"groups", groups}};
      }
      Json order = Json::array();
      for (std::size_t i = 0; i < size_of("groups"); ++i) order.push_back(i);
      return {{"order", order}};
    }
    case TemplateId::AFFORDANCE:
      return {{"actions", Json::array({"inspect"})}, {"zone_type", "around"}, {"needs_facing", false}};
    case TemplateId::PLACE_REASONING:
      return {{"footprint", Json::array({1, 1})}, {"wall_adjacent", false}, {"near", Json::array()}};
    case TemplateId::PERSONA_SUGGEST:
      return {{"suggestions", Json::object()}};
    case TemplateId::CHAR_CHAT:
      return {{"reply", "Hi! Good to see you."}};
    case TemplateId::PLAN_ACTIVITY: {
      const auto candidates = variables.find("candidates");
      auto pick = [&](std::uint64_t h) -> Json {
        if (candidates == variables.end() || !candidates->is_array() || candidates->empty())
          return {{"object_id", ""}, {"action", ""}};
        const Json& c = (*candidates)[h % candidates->size()];
        const Json& actions = c.at("actions");
        std::string action = actions.empty() ? std::string() : actions[(h >> 17) % actions.size()].get<std::string>();
        return {{"object_id", c.value("object_id", "")}, {"action", action}};
      };
      const std::uint64_t h = fnv1a64(variables.dump());
      return {{"plan_A", pick(h)}, {"plan_B", pick(h >> 29 ^ 0x9e3779b97f4a7c15ULL)}};
    }
    case TemplateId::INNER_VOICE:
      return {{"text", "Maybe I should be " + str("next_action", "doing that") + " now."}};
    case TemplateId::GUIDE_REPLY:
      return {{"reply", "Let's do " + str("next_event", "that") + " together first."}};
    case TemplateId::DIVERGENCE_INTENT:
      return {{"intent", "small_talk"}};
    case TemplateId::BL_ACTIVITY: {
      auto actions = variables.find("actions");
      if (actions != variables.end() && actions->is_array() && !actions->empty()) return {{"action", (*actions)[0]}};
      return {{"action", "inspect"}};
    }
  }
  return Json::object();
}

}  // namespace vignette::llm
