#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "mixloc/constraints.hpp"
#include "mixloc/network.hpp"
#include "mixloc/solver.hpp"

namespace mixloc {

enum class Protocol { Simultaneous, Sequential };

struct SimConfig {
    Protocol protocol = Protocol::Simultaneous;
    /// Noise applied to every node's measurements; its seed is replaced by
    /// the master seed.
    std::optional<NoiseSpec> noise;
    std::uint64_t seed = 0;
    /// Iteration settings for the simultaneous protocol; init_seed is
    /// replaced by the master seed.
    SolverConfig solver;
    ConstraintPolicy policy;
    /// Run even when the network fails validate_assumptions.
    bool force = false;
    std::size_t log_limit = 1000000;
};

struct Message {
    enum class Kind { Measurements, Constraint, Estimate };
    int round = 0;
    NodeId from = -1;
    NodeId to = -1;
    Kind kind = Kind::Measurements;
};

struct SimRun {
    std::vector<Message> log;
    std::size_t messages = 0;  // total sent, including any beyond the log limit
    bool log_truncated = false;
    /// What each node holds after the exchange: its own and its neighbors'
    /// measurement sets.
    std::vector<MeasurementBook> books;
    ConstraintSet constraints;
    int rounds = 0;
    std::optional<Trajectory> trajectory;
    std::optional<SequentialResult> sequential;
    /// All n nodes; anchors at their known positions.
    Configuration estimates;
};

/// Exchange measurements with neighbors, build constraints per node, then
/// run the chosen protocol with neighbor-only communication.
SimRun run(const Network& net, const SimConfig& config);

}  // namespace mixloc
