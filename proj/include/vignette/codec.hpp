#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "vignette/spec.hpp"
#include "vignette/validation.hpp"

namespace vignette {

using Json = nlohmann::json;

class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed document text. `offset` is the byte position reported by the parser.
class ParseError : public SpecError {
 public:
  ParseError(const std::string& what, std::size_t offset) : SpecError(what), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Well-formed JSON that does not follow the document schema.
class SchemaError : public SpecError {
 public:
  SchemaError(const std::string& path, const std::string& what)
      : SpecError("schema error at " + path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Schema-valid content that breaks a type invariant.
class InvalidSpecError : public SpecError {
 public:
  explicit InvalidSpecError(ValidationReport report)
      : SpecError("invalid vignette spec: " + report.summary()), report_(std::move(report)) {}
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

// Lenient conversion, no invariant checks. Used for drafts and storage.
Json spec_to_json(const VignetteSpec& spec);
VignetteSpec spec_from_json(const Json& doc);  // throws SchemaError

Json to_json(const Character& c);
Character character_from_json(const Json& j, const std::string& path = "/character");
Json to_json(const ObjectInstance& o);
ObjectInstance object_from_json(const Json& j, const std::string& path = "/object");
Json to_json(const ActivityTuple& a);
ActivityTuple activity_from_json(const Json& j, const std::string& path = "/activity");
Json to_json(const KeyEvent& e);
Json to_json(Tile t);
Tile tile_from_json(const Json& j, const std::string& path = "/tile");
Json to_json(const Environment& env);
Environment environment_from_json(const Json& j, const std::string& path = "/environment");
/// {"violations": [{"code", "path", "message"}]}
Json to_json(const ValidationReport& r);

/// Canonical document bytes: sorted keys, two-space indent, trailing newline.
/// Throws InvalidSpecError when validate_spec reports anything.
std::string encode_spec(const VignetteSpec& spec, const ValidationLimits& limits = {});

/// Throws ParseError, SchemaError or InvalidSpecError.
VignetteSpec decode_spec(std::string_view bytes, const ValidationLimits& limits = {});

std::string canonical_dump(const Json& j);

}  // namespace vignette
