#pragma once

#include <string>

#include "json.hpp"

namespace tsc::harness {

/// The experiment schema shipped in schemas/, compiled in.
const nlohmann::json& experiment_schema();

/// Checks doc against the subset of JSON Schema the shipped schema uses:
/// type, enum, required, properties, additionalProperties, items, minimum,
/// maximum, exclusiveMinimum, exclusiveMaximum, minLength. Throws ConfigError
/// "<where><pointer>: <problem>" on the first violation.
void validate_against(const nlohmann::json& schema, const nlohmann::json& doc, const std::string& where);

}  // namespace tsc::harness
