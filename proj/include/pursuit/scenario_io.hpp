#pragma once

#include <string>

#include <json.hpp>

#include "pursuit/model.hpp"

namespace pursuit::io {

// Scenario documents mirror the model types field by field:
//
//   velocity   {"kind": "quadratic" | "linear_clamped" | "tabulated", ...}
//   delay      {"kind": "constant" | "tabulated", ...}
//   initial    {"family": "linear" | "alternating_sine" | "order_break" |
//               "sine_perturbed" | "table", "window": ..., ...}
//   truncation {"mode": "periodic" | "cone", ...}
//   T, dt, epsilons, scale
//
// dt defaults to 1e-3 tau, epsilons to the standard list, scale to 1, and a
// missing window to 2 tau. Unknown keys and type mismatches throw
// ConfigError naming the JSON path.
model::Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::ordered_json scenario_to_json(const model::Scenario& s);

// Reads and parses a file. Missing files and malformed JSON throw ConfigError.
model::Scenario load_scenario(const std::string& path);

}  // namespace pursuit::io
