#pragma once

#include <optional>
#include <string>

#include "json.hpp"

#include "mixloc/constraints.hpp"
#include "mixloc/scenario.hpp"
#include "mixloc/solver.hpp"

namespace mixloc {

using Json = nlohmann::ordered_json;

Json scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const Json& j);

Json noise_to_json(const NoiseSpec& n);
NoiseSpec noise_from_json(const Json& j);

Json constraints_to_json(const ConstraintSet& set);
ConstraintSet constraints_from_json(const Json& j);

Json displacement_to_json(const DisplacementConstraint& c);
DisplacementConstraint displacement_from_json(const Json& j);

/// {mode, converged_at, final_error, gamma}
Json trajectory_summary(SolveMode mode, const Trajectory& t);

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

Scenario load_scenario(const std::string& path);
void save_scenario(const std::string& path, const Scenario& s);

}  // namespace mixloc
