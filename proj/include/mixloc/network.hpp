#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Geometry>

#include "mixloc/types.hpp"

namespace mixloc {

struct NodeSpec {
    NodeId id = 0;
    Vec3 position = Vec3::Zero();
    Role role = Role::Free;
    Sensor sensor = Sensor::Distance;
    /// Unknown rotation from the node's local frame to the global frame.
    Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();

    Mat3 rotation() const { return orientation.toRotationMatrix(); }
};

using Edge = std::pair<NodeId, NodeId>;

/// Static 3-D network. Anchors occupy ids 0..n_a-1, free nodes follow.
/// Edges are undirected and stored once with first < second.
class Network {
public:
    Network() = default;
    Network(std::vector<NodeSpec> nodes, const std::vector<Edge>& edges);

    int size() const { return static_cast<int>(nodes_.size()); }
    int anchor_count() const { return anchor_count_; }
    int free_count() const { return size() - anchor_count_; }

    const NodeSpec& node(NodeId id) const;
    const std::vector<NodeSpec>& nodes() const { return nodes_; }
    const std::set<Edge>& edges() const { return edges_; }
    bool adjacent(NodeId a, NodeId b) const;
    /// Sorted neighbor ids.
    const std::vector<NodeId>& neighbors(NodeId id) const;

    bool is_anchor(NodeId id) const { return node(id).role == Role::Anchor; }
    Configuration positions() const;
    /// Largest pairwise distance between nodes.
    double diameter() const;

private:
    void check_id(NodeId id) const;

    std::vector<NodeSpec> nodes_;
    std::set<Edge> edges_;
    std::vector<std::vector<NodeId>> adjacency_;
    int anchor_count_ = 0;
};

/// e_ij = p_j - p_i in the global frame.
Vec3 relative_position(const Network& net, NodeId i, NodeId j);

/// Uniformly distributed rotation drawn from `rng` (Shoemake's method).
Eigen::Quaterniond random_orientation(std::mt19937_64& rng);

enum class NoiseMode { Gaussian, FixedOffset };

/// Per-class zero-mean Gaussian standard deviations, or a table of fixed
/// offsets used to replay a worked example.
struct NoiseSpec {
    NoiseMode mode = NoiseMode::Gaussian;
    std::uint64_t seed = 0;
    double sigma_relpos = 0.0;   // per axis, length units
    double sigma_distance = 0.0;  // length units
    double sigma_bearing = 0.0;  // per axis, before re-normalization
    double sigma_angle = 0.0;    // radians
    double sigma_ratio = 0.0;    // dimensionless
    /// FixedOffset mode: (owner, neighbor) -> offset added to a vector entry.
    std::map<std::pair<NodeId, NodeId>, Vec3> vector_offsets;
    /// FixedOffset mode: (owner, a, b) -> offset added to a scalar entry.
    /// Distances use b = -1; angles and ratios use their (a, b) pair key.
    std::map<std::tuple<NodeId, NodeId, NodeId>, double> scalar_offsets;

    bool is_zero() const;
    void validate() const;
};

/// One node's local measurements. Exactly one of the maps is populated,
/// matching `kind`.
struct MeasurementSet {
    NodeId owner = -1;
    Sensor kind = Sensor::Distance;
    /// RelPos: e_ij^i; Bearing: g_ij^i (unit). Keyed by neighbor.
    std::map<NodeId, Vec3> vectors;
    /// Distance: d_ij. Keyed by neighbor.
    std::map<NodeId, double> distances;
    /// Angle: theta_ijk in [0, pi]; Ratio: d_ij / d_ik. Keyed by (j, k), j < k.
    std::map<std::pair<NodeId, NodeId>, double> pairs;
    std::optional<std::uint64_t> noise_seed;

    /// Angle at the owner between the directions to a and b, if derivable.
    std::optional<double> angle_between(NodeId a, NodeId b) const;
    /// d_owner,a / d_owner,b, if derivable.
    std::optional<double> distance_ratio(NodeId a, NodeId b) const;
    /// d_owner,a, if measured.
    std::optional<double> distance_to(NodeId a) const;
    /// e_owner,a in the owner's frame, if measured.
    std::optional<Vec3> relative_position_to(NodeId a) const;

    bool operator==(const MeasurementSet& other) const;
};

/// All nodes' measurement sets indexed by owner. Missing entries mean the
/// holder of the book has not received that node's measurements.
using MeasurementBook = std::map<NodeId, MeasurementSet>;

/// Computes node i's noiseless local measurements from the true positions,
/// then perturbs them when `noise` is given.
MeasurementSet synthesize_measurements(const Network& net, NodeId i,
                                       const std::optional<NoiseSpec>& noise = std::nullopt);

MeasurementBook synthesize_all(const Network& net,
                               const std::optional<NoiseSpec>& noise = std::nullopt);

/// Adds noise to a clean measurement set. Deterministic in (spec.seed, owner).
MeasurementSet inject_noise(const MeasurementSet& clean, const NoiseSpec& spec);

struct Violation {
    enum class Kind { Collocated, AnchorTriangle, FreeNeighborhood };
    Kind kind;
    std::vector<NodeId> nodes;
    std::string message;
};

struct AssumptionReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

/// Colinearity of a set of relative vectors: the second singular value of
/// their column matrix is below 1e-9 x the longest vector.
bool vectors_colinear(const std::vector<Vec3>& vectors, double tol = 1e-9);

/// Checks the structural assumptions the constraint builders rely on.
AssumptionReport validate_assumptions(const Network& net);

/// First 4-subset of i's neighbors forming a 5-clique with i whose members
/// are not colinear, if any.
std::optional<std::array<NodeId, 4>> find_neighbor_clique(const Network& net, NodeId i);

}  // namespace mixloc
