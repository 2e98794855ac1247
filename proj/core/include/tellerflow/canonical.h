#pragma once

#include <string>
#include <string_view>

#include "json.hpp"
#include "tellerflow/types.h"

namespace tellerflow {

using Json = nlohmann::json;

// JSON mapping of the structured agent outputs. Field names follow the
// wire contract (camelCase, e.g. "guardrailViolation"). Currency values are
// kept in the tree as integer sen under the key "amount" and only become
// decimals when written canonically.
Json to_json(const AgentOutput& output);
Json to_json(const TransferDraft& draft);

// Strict decoding: throws Error(kSchemaViolation) when the object does not
// satisfy the schema, Error(kUnknownType) for an unregistered schema name.
// `amount_as_decimal` selects between the canonical (decimal) and the
// in-memory (integer sen) representation of currency fields.
AgentOutput from_json(std::string_view schema_id, const Json& value,
                      bool amount_as_decimal = true);
TransferDraft draft_from_json(const Json& value, bool amount_as_decimal = true);

bool is_registered_schema(std::string_view schema_id);

// Sorted keys, no insignificant whitespace, currency with exactly two
// fractional digits. Same value, same bytes.
std::string canonical_serialize(const AgentOutput& output);
// Dynamic entry point; throws Error(kUnknownType) for unknown schema names.
std::string canonical_serialize(std::string_view schema_id, const Json& value);

// Inverse of canonical_serialize.
AgentOutput parse_canonical(std::string_view schema_id, std::string_view bytes);

// Writes any JSON tree canonically. Integer values stored under a key named
// in the currency set ("amount") are rendered as sen with two decimals.
std::string write_canonical_json(const Json& value);

}  // namespace tellerflow
