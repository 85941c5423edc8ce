#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mixloc/geometry.hpp"
#include "mixloc/network.hpp"
#include "mixloc/types.hpp"

namespace mixloc {

/// Angle constraints of one triangle i < j < k. Identity `t` reads
///   w_a (p_b - p_a)^T (p_c - p_a) + w_b (p_a - p_b)^T (p_c - p_b) = 0
/// with (a, b, c) = nodes(t):  t=0 -> (i, k, j), t=1 -> (i, j, k), t=2 -> (j, k, i).
/// So weights[0] = (w_ik, w_ki), weights[1] = (w_ij, w_ji), weights[2] = (w_jk, w_kj).
struct AngleConstraint {
    std::array<NodeId, 3> triple{};
    std::array<std::pair<double, double>, 3> weights{};

    std::array<NodeId, 3> nodes(int identity) const;
    double residual(int identity, const Configuration& p) const;
};

/// Weights for one identity given its two dot
/// products (apex a, apex b). Dots with |dot| <= tol * scale count as zero.
std::pair<double, double> angle_weights(double dot_a, double dot_b, double scale);

AngleConstraint make_angle_constraint(const Configuration& p, NodeId i, NodeId j, NodeId k);

/// Angle constraints for every triangle of anchors (all three edges present).
std::vector<AngleConstraint> anchor_angle_constraints(const Network& net);
std::vector<AngleConstraint> anchor_angle_constraints(
    const Configuration& anchors, std::span<const std::array<NodeId, 3>> triangles);

enum class ConstraintSource { RelPos, NeighborRelPos, RatioMatrix, Explicit };
enum class ConstraintBranch { Spatial, Planar, Colinear };

const char* to_string(ConstraintSource source);
const char* to_string(ConstraintBranch branch);
ConstraintSource source_from_string(const std::string& name);
ConstraintBranch branch_from_string(const std::string& name);

/// sum_e coeffs[e] * (p[neighbors[e]] - p[center]) = 0.
struct DisplacementConstraint {
    NodeId center = -1;
    std::vector<NodeId> neighbors;
    VecX coeffs;
    ConstraintSource source = ConstraintSource::Explicit;
    ConstraintBranch branch = ConstraintBranch::Spatial;

    Vec3 residual(const Configuration& p) const;
    double coefficient_sum() const { return coeffs.sum(); }
    /// Coefficient on edge (center, id), if id is one of the neighbors.
    std::optional<double> coefficient_of(NodeId id) const;
    bool involves(NodeId id) const;
    /// Center followed by neighbors.
    std::vector<NodeId> members() const;
};

/// Squared pairwise distances over `labels`, divided by the squared distance
/// between labels[0] and labels[1]. Holds 3 to 5 nodes.
struct RatioMatrix {
    std::vector<NodeId> labels;
    MatX entries;

    static RatioMatrix from_squared_distances(std::vector<NodeId> labels, const MatX& d2);
    static RatioMatrix from_positions(std::vector<NodeId> labels, const Configuration& p);
};

struct BuilderOptions {
    GeometryTolerances geometry;
};

/// Colinear-branch constraint for centre i over neighbors (j, k, h[, l]),
/// with j, k, h on a line. The l coefficient, when present, is zero.
DisplacementConstraint colinear_constraint(double d_jk, double d_kh, double d_jh, NodeId i,
                                           std::span<const NodeId> neighbors,
                                           double tol = 1e-7);

/// Displacement constraint from a ratio (or squared-distance) matrix.
///  5 nodes (i; j,k,h,l): spatial, planar or colinear branch by the
///    coplanarity of j,k,h,l and the colinearity of j,k,h.
///  4 nodes (i; j,k,h): i coplanar with a non-colinear triangle j,k,h.
///  3 nodes (i; j,k): i, j, k colinear.
DisplacementConstraint displacement_from_distance_matrix(const RatioMatrix& d,
                                                         const BuilderOptions& opts = {});

/// (d_ac / d_ab, d_bc / d_ab) for the triangle a, b, c from whatever the three
/// nodes measured. Throws InsufficientMeasurements when neither two angles
/// nor two side ratios are available.
std::pair<double, double> triangle_ratios(const MeasurementBook& book, NodeId a, NodeId b,
                                          NodeId c);

/// Chains triangle ratios into a full ratio matrix over `labels` (3 to 5
/// nodes). For five nodes (i,j,k,h,l) the triangles are resolved in the order
/// ijl, ikl, ihl, jkl, jhl, khl.
RatioMatrix build_ratio_matrix(const MeasurementBook& book, std::span<const NodeId> labels);

/// Builds one displacement constraint for free node i and 2 to 4 chosen
/// neighbors. Four neighbors follow the relpos / neighbor-relpos /
/// ratio-matrix dispatch; two or three use the ratio-matrix path.
DisplacementConstraint build_displacement_constraint(const MeasurementBook& book, NodeId i,
                                                     std::span<const NodeId> neighbors,
                                                     const BuilderOptions& opts = {});

struct BuildFailure {
    NodeId node = -1;
    std::vector<NodeId> neighbors;
    std::string reason;
};

struct ConstraintPolicy {
    /// Cap on constraints built per free node; 0 means every viable
    /// 4-subset of its neighbors that forms a clique with it.
    int max_per_node = 0;
    /// Explicit neighbor subsets per free node; overrides the 4-subset scan.
    std::map<NodeId, std::vector<std::vector<NodeId>>> neighbor_sets;
    BuilderOptions builder;
};

struct ConstraintSet {
    std::vector<AngleConstraint> angles;
    std::vector<DisplacementConstraint> displacements;
    std::vector<BuildFailure> failures;
};

/// Constraints free node i can build from `book` (its own and its
/// neighbors' measurements).
std::vector<DisplacementConstraint> build_node_constraints(const Network& net,
                                                           const MeasurementBook& book, NodeId i,
                                                           const ConstraintPolicy& policy,
                                                           std::vector<BuildFailure>* failures);

/// Appends `c` unless a constraint with the same centre and member set exists.
bool add_unique(std::vector<DisplacementConstraint>& list, DisplacementConstraint c);

/// Anchor angle constraints plus every free node's displacement constraints.
ConstraintSet build_network_constraints(const Network& net, const MeasurementBook& book,
                                        const ConstraintPolicy& policy = {});

}  // namespace mixloc
