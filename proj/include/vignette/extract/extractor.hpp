#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "vignette/catalog.hpp"
#include "vignette/env/placement.hpp"
#include "vignette/llm/gateway.hpp"
#include "vignette/spec.hpp"
#include "vignette/validation.hpp"

namespace vignette::extract {

using Json = nlohmann::json;

enum class Stage { layout_pending, rooms_pending, objects_pending, characters_pending, events_pending, complete };

std::string_view to_string(Stage s);
std::optional<Stage> parse_stage(std::string_view s);

/// Something the author should look at. Codes: NEEDS_OBJECT, NEEDS_REVIEW, GROUPING_REJECTED,
/// ORDER_REJECTED, LAYOUT_FALLBACK, UNPLACEABLE, UNKNOWN_CHARACTER, LLM_FAILURE.
struct Flag {
  std::string code;
  std::string path;
  std::string message;
  bool operator==(const Flag&) const = default;
};

Json to_json(const Flag& f);

/// Extraction cannot continue. Codes: EMPTY_STORY, STORY_TOO_LONG, CAP_EXCEEDED, NO_NARRATOR, LLM_FAILURE.
class ExtractionError : public std::runtime_error {
 public:
  ExtractionError(std::string code, const std::string& message, Json details = Json::object())
      : std::runtime_error(message), code_(std::move(code)), details_(std::move(details)) {}
  const std::string& code() const { return code_; }
  const Json& details() const { return details_; }

 private:
  std::string code_;
  Json details_;
};

/// Operation called before its stage was reached, or after it was confirmed.
class StageError : public std::runtime_error {
 public:
  StageError(const std::string& op, Stage actual)
      : std::runtime_error(op + " is not allowed at stage " + std::string(to_string(actual))), actual_(actual) {}
  Stage actual() const { return actual_; }

 private:
  Stage actual_;
};

/// An author edit would break an invariant. Nothing was applied.
class EditRejected : public std::runtime_error {
 public:
  explicit EditRejected(ValidationReport report)
      : std::runtime_error("edit rejected: " + report.summary()), report_(std::move(report)) {}
  EditRejected(ViolationCode code, std::string path, std::string message) : std::runtime_error(message) {
    report_.add(code, std::move(path), message);
  }
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

struct ExtractorConfig {
  std::size_t max_story_chars = 2000;
  double decorative_density = 0.3;
  ValidationLimits limits;
};

// Pipeline pieces. All LLM traffic goes through the gateway.
std::vector<Character> extract_characters(const llm::Gateway& gw, std::string_view story, std::vector<Flag>* flags = nullptr);
const LayoutTemplate& select_layout(const llm::Gateway& gw, std::string_view story, const LayoutCatalog& layouts,
                                    std::vector<Flag>* flags = nullptr);
std::map<std::string, std::string> label_rooms(const llm::Gateway& gw, const LayoutTemplate& layout, std::string_view story);
std::vector<env::RequiredObject> extract_event_objects(const llm::Gateway& gw, std::string_view story,
                                                       const std::vector<Character>& characters, const Environment& env,
                                                       const AssetCatalog& catalog);
std::vector<KeyEvent> extract_events(const llm::Gateway& gw, std::string_view story, const std::vector<Character>& characters,
                                     const Environment& env, std::vector<Flag>* flags = nullptr);
/// Suggestions for blank persona fields only. Requires at least one snippet.
std::map<std::string, std::string> suggest_persona(const llm::Gateway& gw, const Character& character);
/// In-character reply to the author, moderated both ways.
std::string simulate_chat(const llm::Gateway& gw, const Character& character, const std::string& author_utterance,
                          const std::vector<Snippet>& history);

/// Persona field names accepted by suggestions and character edits.
const std::vector<std::string>& persona_fields();
std::optional<std::string>* persona_field(Character& c, std::string_view field);

/// Objects used by key events become necessary_event; formerly used ones fall back to necessary_room.
void sync_object_kinds(VignetteSpec& spec);

/// Staged story -> vignette pipeline with author checkpoints.
class ExtractionSession {
 public:
  /// Runs character extraction, layout selection and room labelling. Stage becomes rooms_pending.
  static ExtractionSession create(const llm::Gateway& gw, std::string story, ExtractorConfig config = {});

  ExtractionSession() = default;

  Stage stage() const { return stage_; }
  const VignetteSpec& draft() const { return draft_; }
  /// Stored extraction flags plus a NEEDS_OBJECT flag for every tuple still lacking an object.
  std::vector<Flag> flags() const;
  const ExtractorConfig& config() const { return config_; }

  /// Applies author labels, places objects, fills decorations, extracts events. Stage becomes objects_pending.
  void confirm_rooms(const llm::Gateway& gw, const std::map<std::string, std::string>& labels = {});
  /// ops: [{"op":"add","name","room_id"?, "position"?}, {"op":"move","object_id","position"},
  ///       {"op":"remove","object_id"}, {"op":"rename_room","room_id","label"}]
  void update_environment(const llm::Gateway& gw, const Json& ops);
  void confirm_objects();
  /// fields: name, age, personality, social_role, mood, language_style (string or null), sprite_id, conversation_snippets.
  void update_character(const std::string& id, const Json& fields);
  std::map<std::string, std::string> suggest_persona(const llm::Gateway& gw, const std::string& id) const;
  void accept_suggestion(const std::string& id, const std::string& field, const std::string& value);
  /// Reply to the author; `edited_reply` replaces it before the pair is stored as a snippet.
  std::string simulate_chat(const llm::Gateway& gw, const std::string& id, const std::string& utterance,
                            const std::optional<std::string>& edited_reply = std::nullopt);
  void confirm_characters();
  /// ops: add_activity{event, character_id, action, object_id?}, remove_activity{event, character_id},
  ///      set_activity{event, character_id, action?, object_id?}, add_event{at?}, remove_event{event}, move_event{from,to}
  void update_events(const Json& ops);
  /// Full validation; stage becomes complete.
  void confirm_events();

  Json to_json() const;
  static ExtractionSession from_json(const Json& doc);

 private:
  void require_at_least(Stage s, const char* op) const;
  void require_exactly(Stage s, const char* op) const;
  void commit(VignetteSpec candidate);

  Stage stage_ = Stage::layout_pending;
  VignetteSpec draft_;
  std::vector<Flag> flags_;
  ExtractorConfig config_;
};

}  // namespace vignette::extract
