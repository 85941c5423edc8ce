#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mixloc/constraints.hpp"
#include "mixloc/network.hpp"
#include "mixloc/rigidity.hpp"
#include "mixloc/types.hpp"

namespace mixloc {

enum class SolveMode { Direct, Simultaneous, Sequential };

const char* to_string(SolveMode mode);
SolveMode solve_mode_from_string(const std::string& name);

/// Axis-aligned box for random initial estimates.
struct Box {
    Vec3 lo = Vec3::Zero();
    Vec3 hi = Vec3::Zero();
};

struct SolverConfig {
    SolveMode mode = SolveMode::Simultaneous;
    /// Step size; empty means 1 / lambda_max(M_ff).
    std::optional<double> step_size;
    int max_iters = 100000;
    /// Stop once the norm of a whole update drops below this (length units).
    double convergence_eps = 1e-9;
    /// Record every stride-th iterate (the first and last are always kept).
    int stride = 1;
    /// Explicit free-node estimates, in free-node order.
    std::optional<Configuration> initial;
    std::uint64_t init_seed = 0;
    /// Box for random initial estimates; empty means the anchor bounding box
    /// inflated twofold about its centre.
    std::optional<Box> init_box;
    /// Error growth over the initial error that counts as divergence.
    double divergence_factor = 10.0;
};

struct Trajectory {
    std::vector<int> iterations;
    std::vector<Configuration> estimates;  // free nodes only
    std::vector<double> error_norms;       // empty when truth is unknown
    std::optional<int> converged_at;
    int iterations_run = 0;
    double gamma = 0.0;
    Configuration final_estimates;
    double final_update_norm = 0.0;
    std::vector<std::string> warnings;
};

/// Solves M_ff x = -M_fa p_a. Throws NotLocalizable when M_ff is singular.
Configuration direct_solve(const MatX& mff, const MatX& mfa, const Configuration& anchors,
                           double tol = 1e-10);

/// Reads the current estimate of a node. Tests plug in a recording reader.
using EstimateReader = std::function<Vec3(NodeId)>;

/// Displacement constraints touching each node, by node id.
std::vector<std::vector<int>> constraints_by_node(
    const std::vector<DisplacementConstraint>& displacements, int nodes);

/// Gradient-descent direction for node i: (sum mu) L_c for constraints it
/// centres, -mu_{c,i} L_c for constraints it appears in as a neighbor.
/// Reads only the members of those constraints.
Vec3 local_update(NodeId i, const std::vector<DisplacementConstraint>& displacements,
                  const std::vector<int>& involving, const EstimateReader& read);

/// One synchronous round: every free node reads the previous estimates and
/// moves by gamma * local_update. `estimates` holds all n nodes (anchors at
/// their known positions). Throws CoverageError for an uncovered free node.
Configuration simultaneous_step(const Configuration& estimates,
                                const std::vector<DisplacementConstraint>& displacements,
                                int anchors, double gamma);

/// Runs simultaneous_step to convergence. `truth` (all n nodes), when given,
/// drives the error norms and the divergence check.
Trajectory solve_simultaneous(const SolverConfig& config, const Configuration& anchors, int nodes,
                              const std::vector<DisplacementConstraint>& displacements,
                              const std::optional<Configuration>& truth = std::nullopt);

/// Initial free-node estimates per the config.
Configuration initial_estimates(const SolverConfig& config, const Configuration& anchors,
                                int free_nodes);

struct SequentialResult {
    Configuration estimates;  // all n nodes; unlocalized entries are NaN
    std::vector<NodeId> order;
    std::vector<int> round_of;  // per localized node, aligned with `order`
    std::vector<NodeId> unlocalized;
    int rounds = 0;
    bool complete() const { return unlocalized.empty(); }
};

/// Measurements visible to a node (its own and its neighbors').
using BookView = std::function<const MeasurementBook&(NodeId)>;

/// Localization wave: in each round, every unlocalized node tries the
/// 4-combinations of neighbors localized before the round (lexicographic),
/// or the three/two-neighbor paths when exactly that many are localized,
/// and fixes its estimate on the first viable constraint.
SequentialResult solve_sequential(const Network& net, const BookView& books,
                                  const BuilderOptions& opts = {});
SequentialResult solve_sequential(const Network& net, const MeasurementBook& book,
                                  const BuilderOptions& opts = {});

/// Position of `i` implied by `c` given the other members' estimates, if the
/// constraint determines it (|sum mu| or |mu_ji| above 1e-6).
std::optional<Vec3> constraint_fixed_point(NodeId i, const DisplacementConstraint& c,
                                           const EstimateReader& read);

/// iter,node_id,x,y,z,err_norm rows.
void write_trajectory_csv(std::ostream& out, const Trajectory& t, int anchors,
                          const std::optional<Configuration>& truth = std::nullopt);

}  // namespace mixloc
