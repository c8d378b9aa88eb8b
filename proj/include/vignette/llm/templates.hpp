#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "vignette/llm/gateway.hpp"

namespace vignette::llm {

class TemplateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PromptTemplate {
  TemplateId id;
  std::string_view system;
  std::string_view user;
  std::string_view default_schema;
  double temperature;
};

const PromptTemplate& prompt_template(TemplateId id);

/// Mustache subset: {{name}}, {{#name}}...{{/name}}, {{^name}}...{{/name}}.
/// Every referenced name must exist in `variables`; a missing one throws TemplateError.
std::string render_template(std::string_view text, const Json& variables);

RenderedPrompt render_prompt(const PromptRequest& request);

struct SchemaCheck {
  bool ok = true;
  std::string error;
};

/// Validates against a small JSON-schema subset (type, properties, required, items, enum, minItems).
SchemaCheck check_schema(std::string_view schema_id, const Json& value);
const Json& schema_document(std::string_view schema_id);  // throws std::out_of_range

}  // namespace vignette::llm
