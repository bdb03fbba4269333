#include "tsc/harness/schema.hpp"

#include "tsc/errors.hpp"
#include "tsc/json_io.hpp"

namespace tsc::harness {

extern const char* const kExperimentSchemaText;

namespace {

using nlohmann::json;

bool has_type(const json& v, const std::string& type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "boolean") return v.is_boolean();
  if (type == "integer") return v.is_number_integer();
  if (type == "number") return v.is_number();
  if (type == "null") return v.is_null();
  return false;
}

std::string show(const json& v) { return v.dump(); }

void check(const json& schema, const json& v, const std::string& ptr, const std::string& where) {
  const auto fail = [&](const std::string& what) {
    throw ConfigError(where + (ptr.empty() ? "/" : ptr) + ": " + what);
  };
  if (schema.contains("type")) {
    const std::string type = schema["type"];
    if (!has_type(v, type)) fail("expected " + type + ", got " + show(v));
  }
  if (schema.contains("enum")) {
    bool found = false;
    std::string options;
    for (const json& e : schema["enum"]) {
      found = found || e == v;
      options += (options.empty() ? "" : ", ") + (e.is_string() ? e.get<std::string>() : show(e));
    }
    if (!found) fail(show(v) + " is not one of " + options);
  }
  if (v.is_number()) {
    const double x = v.get<double>();
    if (schema.contains("minimum") && x < schema["minimum"].get<double>())
      fail("must be >= " + show(schema["minimum"]));
    if (schema.contains("maximum") && x > schema["maximum"].get<double>())
      fail("must be <= " + show(schema["maximum"]));
    if (schema.contains("exclusiveMinimum") && x <= schema["exclusiveMinimum"].get<double>())
      fail("must be > " + show(schema["exclusiveMinimum"]));
    if (schema.contains("exclusiveMaximum") && x >= schema["exclusiveMaximum"].get<double>())
      fail("must be < " + show(schema["exclusiveMaximum"]));
  }
  if (v.is_string() && schema.contains("minLength") && v.get<std::string>().size() < schema["minLength"].get<std::size_t>())
    fail("string too short");
  if (v.is_object()) {
    if (schema.contains("required"))
      for (const json& key : schema["required"])
        if (!v.contains(key.get<std::string>())) fail("missing required key \"" + key.get<std::string>() + "\"");
    const json* props = schema.contains("properties") ? &schema["properties"] : nullptr;
    const bool closed = schema.contains("additionalProperties") && schema["additionalProperties"] == false;
    for (const auto& [key, value] : v.items()) {
      if (props && props->contains(key)) {
        check((*props)[key], value, ptr + "/" + key, where);
      } else if (closed) {
        fail("unknown key \"" + key + "\"");
      }
    }
  }
  if (v.is_array() && schema.contains("items"))
    for (std::size_t i = 0; i < v.size(); ++i) check(schema["items"], v[i], ptr + "/" + std::to_string(i), where);
}

}  // namespace

const json& experiment_schema() {
  static const json schema = parse_json(kExperimentSchemaText, "experiment.schema.json");
  return schema;
}

void validate_against(const json& schema, const json& doc, const std::string& where) { check(schema, doc, "", where); }

}  // namespace tsc::harness
