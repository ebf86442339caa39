#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ouest/mc.hpp"
#include "ouest/model.hpp"
#include "ouest/sim.hpp"

namespace ouest::config {

using nlohmann::json;

// Load the config file (or an empty object when path is empty) and apply
// dotted-key overrides such as "model.a=2" or "mc.tau_grid=[0.5,1]".
// Override values parse as JSON when possible, as strings otherwise.
json load_with_overrides(const std::string& path,
                         const std::vector<std::string>& overrides);

// Strict schema validation: every present section and key must be accepted
// by the subcommand.  Throws std::invalid_argument naming the offending key.
void check_keys(const json& cfg, const std::string& subcommand);

// Section parsers.  d2 accepts a number, "stationary" (b^2/2f) or "matched"
// (the stationary filtering-error variance, which freezes the Riccati
// solution at its fixed point).
SystemParams parse_model(const json& cfg);
ParamSpec parse_spec(const json& cfg, bool need_bounds = true);
SimConfig parse_sim(const json& cfg);
ExperimentConfig parse_experiment(const json& cfg);

// Schema introspection (drives --help and the doc-sync test).
std::vector<std::string> subcommand_names();
std::vector<std::string> accepted_keys(const std::string& subcommand);
std::string help_text(const std::string& subcommand);

}  // namespace ouest::config
