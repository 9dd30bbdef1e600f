#pragma once

#include <json.hpp>

namespace gantry {

/// The published scenario schema (config/scenario.schema.json).
const nlohmann::json& scenario_schema();

/// Validates against the JSON Schema subset used by the scenario schema: type,
/// enum, properties, required, additionalProperties, items, min/maxItems,
/// minimum, maximum, exclusiveMinimum, exclusiveMaximum and local $ref.
/// Throws ConfigError naming the offending path.
void validate_schema(const nlohmann::json& instance, const nlohmann::json& schema);

}  // namespace gantry
