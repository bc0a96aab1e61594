// JSON (de)serialization of model specifications, plus the canonical string
// used for oracle cache keys and manifests.
#pragma once

#include <json.hpp>

#include "stdf/models.hpp"

namespace stdf {

nlohmann::json model_to_json(const ModelSpec& m);
ModelSpec model_from_json(const nlohmann::json& j);

// Deterministic text form (sorted keys, shortest round-trip numbers); equal
// specs produce equal strings on every platform.
std::string model_canonical_string(const ModelSpec& m);

}  // namespace stdf
