#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "vignette/llm/gateway.hpp"

namespace vignette::llm {

class ScriptError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One scripted answer. Lookup order: exact `key` match, then the first entry whose
/// `when` object is a subset of the request variables (keys may be JSON pointers).
struct MockEntry {
  TemplateId template_id = TemplateId::CHAR_CHAT;
  std::string key;                   // variables_key(); empty means "match by `when`"
  Json when = Json::object();
  std::vector<std::string> responses;  // indexed by repair attempt, the last one repeats
  std::optional<double> latency_ms;
};

struct MockModeration {
  std::vector<std::string> denylist;  // case-insensitive substrings
  bool unavailable = false;           // every moderation call fails with a transport error
};

struct MockScript {
  std::string provider_id = "scripted-mock";
  double default_latency_ms = 0.0;
  std::map<TemplateId, double> template_latency_ms;
  bool real_delay = false;  // sleep for the latency instead of only reporting it
  std::set<TemplateId> transport_faults;  // templates whose calls throw TransportError
  MockModeration moderation;
  std::vector<MockEntry> entries;

  static MockScript from_json(const Json& doc);  // throws ScriptError
  static MockScript load(const std::filesystem::path& file);
};

/// Deterministic provider driven by a script file. Unknown requests get a
/// template-specific safe default, flagged as canned and logged.
class ScriptedMock : public Provider {
 public:
  explicit ScriptedMock(MockScript script);
  static std::shared_ptr<ScriptedMock> from_file(const std::filesystem::path& file);

  std::string id() const override { return script_.provider_id; }
  ProviderReply generate(const RenderedPrompt& prompt) override;
  bool flagged(const std::string& text) override;

  struct Miss {
    TemplateId template_id;
    std::string key;
  };
  std::vector<Miss> misses() const;
  std::set<TemplateId> seen_templates() const;
  std::size_t call_count() const;
  void set_template_latency(TemplateId id, double latency_ms);

 private:
  const MockEntry* lookup(const RenderedPrompt& prompt) const;

  MockScript script_;
  mutable std::mutex mutex_;
  std::vector<Miss> misses_;
  std::set<TemplateId> seen_;
  std::size_t calls_ = 0;
};

/// Safe default answer for a template, derived only from the request variables.
Json canned_response(TemplateId id, const Json& variables);

}  // namespace vignette::llm
