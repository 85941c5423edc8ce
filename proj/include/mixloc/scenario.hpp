#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mixloc/constraints.hpp"
#include "mixloc/network.hpp"

namespace mixloc {

/// A network plus the optional extras a scenario file carries.
struct Scenario {
    std::string name;
    Network network;
    std::optional<NoiseSpec> noise;
    /// Explicit neighbor subsets per free node for constraint building.
    std::map<NodeId, std::vector<std::vector<NodeId>>> neighbor_sets;

    ConstraintPolicy policy() const;
};

/// Seven-node worked example: four anchors, three distance-sensing free
/// nodes, with the free nodes' constraint subsets given as hints.
Scenario seven_node_scenario();

/// The same network with a fifth anchor joined only to the first two.
/// Anchors come first, so the free nodes sit at ids 5..7.
Scenario seven_node_dangling_scenario();

/// 27-node network: anchors (-200,-200,0) R, (200,-200,0) RoD,
/// (200,200,0) B, (-200,200,200) D; free nodes (0,-200,0) R,
/// (0,-200,100) A, (0,0,100) D, then 20 generated nodes.
Scenario mixed_27_node_scenario(std::uint64_t seed = 1);

enum class SensorMix { AllDistance, AllBearing, AllAngle, AllRatio, AllRelPos, Mixed };

const char* to_string(SensorMix mix);
SensorMix sensor_mix_from_string(const std::string& name);

struct RandomNetworkOptions {
    int anchors = 4;
    int free = 10;
    SensorMix mix = SensorMix::Mixed;
    std::uint64_t seed = 1;
    double box = 100.0;          // positions uniform in [-box, box]^3
    double extra_edge_prob = 0.1;
    /// Each free node attaches to a clique whose tetrahedron volume is at
    /// least this times the cube of its mean edge (0.118 for a regular one),
    /// from a position whose barycentric coordinates stay within
    /// max_barycentric in magnitude.
    double min_tetra_quality = 0.02;
    double max_barycentric = 3.0;
    /// Reject candidates that are not infinitesimally rigid and localizable.
    bool require_rigid = false;
    int max_attempts = 10000;
};

/// Random network grown by attaching each free node to an existing 4-clique
/// (anchors form a clique), with random extra edges, random frames and
/// sensors. Candidates failing validate_assumptions (or rigidity when
/// required) are redrawn. Throws GenerationError after max_attempts.
Scenario random_scenario(const RandomNetworkOptions& opts);

struct NetworkCheck {
    bool rigid = false;
    int nullity = 0;
    bool localizable = false;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    std::size_t constraints = 0;
    std::size_t failures = 0;
};

/// Builds noiseless constraints and evaluates rigidity and localizability.
NetworkCheck check_network(const Scenario& s);

}  // namespace mixloc
