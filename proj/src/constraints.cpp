#include "mixloc/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace mixloc {

// ---------------------------------------------------------------------------
// Angle constraints

std::array<NodeId, 3> AngleConstraint::nodes(int identity) const {
    const auto [i, j, k] = triple;
    switch (identity) {
        case 0: return {i, k, j};
        case 1: return {i, j, k};
        case 2: return {j, k, i};
        default: throw InvalidArgument("AngleConstraint: identity index must be 0, 1 or 2");
    }
}

double AngleConstraint::residual(int identity, const Configuration& p) const {
    const auto [a, b, c] = nodes(identity);
    const auto [wa, wb] = weights[static_cast<std::size_t>(identity)];
    const Vec3& pa = p[static_cast<std::size_t>(a)];
    const Vec3& pb = p[static_cast<std::size_t>(b)];
    const Vec3& pc = p[static_cast<std::size_t>(c)];
    return wa * (pb - pa).dot(pc - pa) + wb * (pa - pb).dot(pc - pb);
}

std::pair<double, double> angle_weights(double dot_a, double dot_b, double scale) {
    const double tol = 1e-12 * scale;
    const bool zero_a = std::abs(dot_a) <= tol;
    const bool zero_b = std::abs(dot_b) <= tol;
    if (zero_a && zero_b) {
        throw InvalidArgument("angle_weights: both dot products vanish (collocated nodes)");
    }
    if (zero_a) return {1.0, 0.0};
    if (zero_b) return {0.0, 1.0};
    return {1.0 / dot_a, -1.0 / dot_b};
}

AngleConstraint make_angle_constraint(const Configuration& p, NodeId i, NodeId j, NodeId k) {
    std::array<NodeId, 3> t = {i, j, k};
    std::sort(t.begin(), t.end());
    AngleConstraint out;
    out.triple = t;
    for (int id = 0; id < 3; ++id) {
        const auto [a, b, c] = out.nodes(id);
        const Vec3& pa = p[static_cast<std::size_t>(a)];
        const Vec3& pb = p[static_cast<std::size_t>(b)];
        const Vec3& pc = p[static_cast<std::size_t>(c)];
        const double ab = (pb - pa).norm(), ac = (pc - pa).norm(), bc = (pc - pb).norm();
        if (std::min({ab, ac, bc}) <= 1e-12 * std::max({ab, ac, bc})) {
            throw InvalidArgument("make_angle_constraint: collocated nodes in triangle");
        }
        const double scale = std::max({ab, ac, bc});
        out.weights[static_cast<std::size_t>(id)] =
            angle_weights((pb - pa).dot(pc - pa), (pa - pb).dot(pc - pb), scale * scale);
    }
    return out;
}

std::vector<AngleConstraint> anchor_angle_constraints(
    const Configuration& anchors, std::span<const std::array<NodeId, 3>> triangles) {
    std::vector<AngleConstraint> out;
    out.reserve(triangles.size());
    for (const auto& t : triangles) {
        for (NodeId v : t) {
            if (v < 0 || static_cast<std::size_t>(v) >= anchors.size()) {
                throw InvalidArgument("anchor_angle_constraints: triangle references a non-anchor");
            }
        }
        out.push_back(make_angle_constraint(anchors, t[0], t[1], t[2]));
    }
    return out;
}

std::vector<AngleConstraint> anchor_angle_constraints(const Network& net) {
    std::vector<std::array<NodeId, 3>> triangles;
    const int na = net.anchor_count();
    for (NodeId i = 0; i < na; ++i)
        for (NodeId j = i + 1; j < na; ++j)
            for (NodeId k = j + 1; k < na; ++k)
                if (net.adjacent(i, j) && net.adjacent(i, k) && net.adjacent(j, k))
                    triangles.push_back({i, j, k});
    Configuration anchors = net.positions();
    anchors.resize(static_cast<std::size_t>(na));
    return anchor_angle_constraints(anchors, triangles);
}

// ---------------------------------------------------------------------------
// Displacement constraints

const char* to_string(ConstraintSource source) {
    switch (source) {
        case ConstraintSource::RelPos: return "relpos";
        case ConstraintSource::NeighborRelPos: return "neighbor-relpos";
        case ConstraintSource::RatioMatrix: return "ratio-matrix";
        case ConstraintSource::Explicit: return "explicit";
    }
    return "?";
}

const char* to_string(ConstraintBranch branch) {
    switch (branch) {
        case ConstraintBranch::Spatial: return "3d";
        case ConstraintBranch::Planar: return "planar";
        case ConstraintBranch::Colinear: return "colinear";
    }
    return "?";
}

ConstraintSource source_from_string(const std::string& name) {
    if (name == "relpos") return ConstraintSource::RelPos;
    if (name == "neighbor-relpos") return ConstraintSource::NeighborRelPos;
    if (name == "ratio-matrix") return ConstraintSource::RatioMatrix;
    if (name == "explicit") return ConstraintSource::Explicit;
    throw InvalidArgument("unknown constraint source '" + name + "'");
}

ConstraintBranch branch_from_string(const std::string& name) {
    if (name == "3d") return ConstraintBranch::Spatial;
    if (name == "planar") return ConstraintBranch::Planar;
    if (name == "colinear") return ConstraintBranch::Colinear;
    throw InvalidArgument("unknown constraint branch '" + name + "'");
}

Vec3 DisplacementConstraint::residual(const Configuration& p) const {
    Vec3 sum = Vec3::Zero();
    const Vec3& pc = p[static_cast<std::size_t>(center)];
    for (std::size_t e = 0; e < neighbors.size(); ++e) {
        sum += coeffs(static_cast<Eigen::Index>(e)) * (p[static_cast<std::size_t>(neighbors[e])] - pc);
    }
    return sum;
}

std::optional<double> DisplacementConstraint::coefficient_of(NodeId id) const {
    for (std::size_t e = 0; e < neighbors.size(); ++e) {
        if (neighbors[e] == id) return coeffs(static_cast<Eigen::Index>(e));
    }
    return std::nullopt;
}

bool DisplacementConstraint::involves(NodeId id) const {
    return id == center || std::find(neighbors.begin(), neighbors.end(), id) != neighbors.end();
}

std::vector<NodeId> DisplacementConstraint::members() const {
    std::vector<NodeId> out{center};
    out.insert(out.end(), neighbors.begin(), neighbors.end());
    return out;
}

RatioMatrix RatioMatrix::from_squared_distances(std::vector<NodeId> labels, const MatX& d2) {
    if (labels.size() < 3 || labels.size() > 5 ||
        d2.rows() != static_cast<Eigen::Index>(labels.size()) || d2.cols() != d2.rows()) {
        throw InvalidArgument("RatioMatrix: expected 3 to 5 labels and a matching square matrix");
    }
    const double ref = d2(0, 1);
    if (!(ref > 0.0)) {
        throw InvalidArgument("RatioMatrix: reference distance must be positive");
    }
    for (Eigen::Index a = 0; a < d2.rows(); ++a) {
        for (Eigen::Index b = a + 1; b < d2.cols(); ++b) {
            if (!(d2(a, b) > 0.0) || d2(a, b) != d2(b, a)) {
                throw InvalidArgument(
                    "RatioMatrix: off-diagonal entries must be positive and symmetric");
            }
        }
    }
    RatioMatrix out;
    out.labels = std::move(labels);
    out.entries = d2 / ref;
    out.entries(0, 1) = out.entries(1, 0) = 1.0;
    out.entries.diagonal().setZero();
    return out;
}

RatioMatrix RatioMatrix::from_positions(std::vector<NodeId> labels, const Configuration& p) {
    const auto n = static_cast<Eigen::Index>(labels.size());
    MatX d2 = MatX::Zero(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b)
            d2(a, b) = (p[static_cast<std::size_t>(labels[static_cast<std::size_t>(a)])] -
                        p[static_cast<std::size_t>(labels[static_cast<std::size_t>(b)])])
                           .squaredNorm();
    return from_squared_distances(std::move(labels), d2);
}

namespace {

DisplacementConstraint finish(NodeId center, std::vector<NodeId> neighbors, VecX coeffs,
                              ConstraintSource source, ConstraintBranch branch) {
    normalize_coefficients(coeffs);
    DisplacementConstraint out;
    out.center = center;
    out.neighbors = std::move(neighbors);
    out.coeffs = std::move(coeffs);
    out.source = source;
    out.branch = branch;
    return out;
}

MatX submatrix(const MatX& m, std::initializer_list<int> idx) {
    const auto n = static_cast<Eigen::Index>(idx.size());
    MatX out(n, n);
    Eigen::Index r = 0;
    for (int a : idx) {
        Eigen::Index c = 0;
        for (int b : idx) out(r, c++) = m(a, b);
        ++r;
    }
    return out;
}

// Point 0 as an affine combination of points 1 and 2 on a common line.
VecX colinear_center_coefficients(double d01, double d02, double d12, double tol) {
    const double scale = std::max({d01, d02, d12});
    const double between = std::abs(d01 + d02 - d12);   // 0 between 1 and 2
    const double beyond2 = std::abs(d02 + d12 - d01);   // 2 between 0 and 1
    const double beyond1 = std::abs(d01 + d12 - d02);   // 1 between 0 and 2
    const double best = std::min({between, beyond2, beyond1});
    if (best > tol * scale) {
        throw DegenerateInput("colinear path: nodes are not colinear");
    }
    VecX mu(2);
    if (best == between) {
        mu << d02 / d12, d01 / d12;
    } else if (best == beyond2) {
        mu << -d02 / d12, d01 / d12;
    } else {
        mu << d02 / d12, -d01 / d12;
    }
    return mu;
}

}  // namespace

DisplacementConstraint colinear_constraint(double d_jk, double d_kh, double d_jh, NodeId i,
                                           std::span<const NodeId> neighbors, double tol) {
    if (neighbors.size() != 3 && neighbors.size() != 4) {
        throw InvalidArgument("colinear_constraint: expected neighbors (j, k, h[, l])");
    }
    if (!(d_jk > 0.0) || !(d_kh > 0.0) || !(d_jh > 0.0)) {
        throw InvalidArgument("colinear_constraint: distances must be positive");
    }
    const double scale = std::max({d_jk, d_kh, d_jh});
    const double k_between = std::abs(d_jk + d_kh - d_jh);
    const double j_between = std::abs(d_jk + d_jh - d_kh);
    const double h_between = std::abs(d_jh + d_kh - d_jk);
    const double best = std::min({k_between, j_between, h_between});
    if (best > tol * scale) {
        throw PreconditionError("colinear_constraint: j, k, h are not colinear");
    }
    VecX mu = VecX::Zero(static_cast<Eigen::Index>(neighbors.size()));
    if (best == k_between) {
        // e_jk = (d_jk / d_kh) e_kh
        const double r = d_jk / d_kh;
        mu.head<3>() << -1.0, 1.0 + r, -r;
    } else if (best == j_between) {
        // e_kj = (d_jk / d_jh) e_jh
        const double r = d_jk / d_jh;
        mu.head<3>() << 1.0 + r, -1.0, -r;
    } else {
        // e_jh = (d_jh / d_kh) e_hk
        const double r = d_jh / d_kh;
        mu.head<3>() << -1.0, -r, 1.0 + r;
    }
    return finish(i, {neighbors.begin(), neighbors.end()}, std::move(mu),
                  ConstraintSource::RatioMatrix, ConstraintBranch::Colinear);
}

DisplacementConstraint displacement_from_distance_matrix(const RatioMatrix& d,
                                                         const BuilderOptions& opts) {
    const auto& tol = opts.geometry;
    const auto& m = d.entries;
    const auto& lab = d.labels;
    if (m.rows() != static_cast<Eigen::Index>(lab.size())) {
        throw InvalidArgument("displacement_from_distance_matrix: label count mismatch");
    }
    // Realizability in 3-D is checked up front for every size.
    (void)embed_congruent(m, std::min<int>(3, static_cast<int>(lab.size()) - 1),
                          tol.realizability);
    const NodeId i = lab[0];

    if (lab.size() == 5) {
        std::vector<NodeId> nbrs(lab.begin() + 1, lab.end());
        if (!is_coplanar(m, 1, 2, 3, 4, tol)) {
            const Eigen::Vector4d mu = barycentric_3d(m, tol);
            return finish(i, nbrs, mu, ConstraintSource::RatioMatrix, ConstraintBranch::Spatial);
        }
        if (!is_colinear(m, 1, 2, 3, tol)) {
            // l in terms of j, k, h; then mu_ij = -mu_lj, ..., mu_il = 1.
            const Eigen::Vector3d bary = barycentric_planar(submatrix(m, {4, 1, 2, 3}), tol);
            VecX mu(4);
            mu << -bary(0), -bary(1), -bary(2), 1.0;
            return finish(i, nbrs, mu, ConstraintSource::RatioMatrix, ConstraintBranch::Planar);
        }
        return colinear_constraint(std::sqrt(m(1, 2)), std::sqrt(m(2, 3)), std::sqrt(m(1, 3)), i,
                                   nbrs, tol.colinear);
    }
    if (lab.size() == 4) {
        std::vector<NodeId> nbrs(lab.begin() + 1, lab.end());
        if (!is_coplanar(m, 0, 1, 2, 3, tol)) {
            throw DegenerateInput("three-neighbor constraint: centre is not coplanar with its "
                                  "neighbors");
        }
        const Eigen::Vector3d mu = barycentric_planar(m, tol);
        return finish(i, nbrs, VecX(mu), ConstraintSource::RatioMatrix, ConstraintBranch::Planar);
    }
    if (lab.size() == 3) {
        VecX mu = colinear_center_coefficients(std::sqrt(m(0, 1)), std::sqrt(m(0, 2)),
                                               std::sqrt(m(1, 2)), tol.colinear);
        return finish(i, {lab[1], lab[2]}, std::move(mu), ConstraintSource::RatioMatrix,
                      ConstraintBranch::Colinear);
    }
    throw InvalidArgument("displacement_from_distance_matrix: expected 3 to 5 nodes");
}

// ---------------------------------------------------------------------------
// Triangle ratios and the ratio matrix

namespace {

const MeasurementSet* lookup(const MeasurementBook& book, NodeId id) {
    auto it = book.find(id);
    return it == book.end() ? nullptr : &it->second;
}

std::string triangle_name(NodeId a, NodeId b, NodeId c) {
    return "(" + std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(c) + ")";
}

}  // namespace

std::pair<double, double> triangle_ratios(const MeasurementBook& book, NodeId a, NodeId b,
                                          NodeId c) {
    const std::array<NodeId, 3> v = {a, b, c};
    std::array<std::optional<double>, 3> angle;  // interior angle at v[x]
    std::array<std::optional<double>, 3> ratio;  // d(v[x], next) / d(v[x], prev)
    for (int x = 0; x < 3; ++x) {
        const MeasurementSet* m = lookup(book, v[static_cast<std::size_t>(x)]);
        if (!m) continue;
        const NodeId nxt = v[static_cast<std::size_t>((x + 1) % 3)];
        const NodeId prv = v[static_cast<std::size_t>((x + 2) % 3)];
        angle[static_cast<std::size_t>(x)] = m->angle_between(nxt, prv);
        ratio[static_cast<std::size_t>(x)] = m->distance_ratio(nxt, prv);
    }

    // Sides relative to s_ab = 1: s_ab (opposite c), s_bc (opposite a), s_ca (opposite b).
    // ratio[0] = s_ab / s_ca, ratio[1] = s_bc / s_ab, ratio[2] = s_ca / s_bc.
    const auto& r = ratio;
    if (r[0] && r[1]) return {1.0 / *r[0], *r[1]};
    if (r[0] && r[2]) return {1.0 / *r[0], 1.0 / (*r[0] * *r[2])};
    if (r[1] && r[2]) return {*r[2] * *r[1], *r[1]};

    const int known = static_cast<int>(angle[0].has_value()) +
                      static_cast<int>(angle[1].has_value()) +
                      static_cast<int>(angle[2].has_value());
    if (known >= 2) {
        double A = angle[0].value_or(0.0), B = angle[1].value_or(0.0), C = angle[2].value_or(0.0);
        if (!angle[0]) A = std::numbers::pi - B - C;
        if (!angle[1]) B = std::numbers::pi - A - C;
        if (!angle[2]) C = std::numbers::pi - A - B;
        const double sc = std::sin(C);
        if (!(A > 0.0 && B > 0.0 && C > 0.0) || sc <= 1e-12) {
            throw InsufficientMeasurements("triangle " + triangle_name(a, b, c) +
                                           " is degenerate for the law of sines");
        }
        // s_ac / s_ab = sin B / sin C, s_bc / s_ab = sin A / sin C
        return {std::sin(B) / sc, std::sin(A) / sc};
    }
    throw InsufficientMeasurements("triangle " + triangle_name(a, b, c) +
                                   " lacks two angles or two side ratios");
}

RatioMatrix build_ratio_matrix(const MeasurementBook& book, std::span<const NodeId> labels) {
    const int n = static_cast<int>(labels.size());
    std::vector<std::array<int, 3>> order;
    switch (n) {
        case 5: order = {{0, 1, 4}, {0, 2, 4}, {0, 3, 4}, {1, 2, 4}, {1, 3, 4}, {2, 3, 4}}; break;
        case 4: order = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}}; break;
        case 3: order = {{0, 1, 2}}; break;
        default: throw InvalidArgument("build_ratio_matrix: expected 3 to 5 nodes");
    }
    MatX side = MatX::Constant(n, n, -1.0);
    side(0, 1) = side(1, 0) = 1.0;
    const auto known = [&](int x, int y) { return side(x, y) > 0.0; };

    for (const auto& t : order) {
        // Put a known edge first so the triangle is scaled through it.
        std::array<int, 3> tri = t;
        if (!known(tri[0], tri[1])) {
            if (known(tri[0], tri[2])) {
                std::swap(tri[1], tri[2]);
            } else if (known(tri[1], tri[2])) {
                tri = {tri[1], tri[2], tri[0]};
            } else {
                throw InsufficientMeasurements("build_ratio_matrix: triangle shares no resolved "
                                               "edge");
            }
        }
        const auto [ac, bc] = triangle_ratios(book, labels[static_cast<std::size_t>(tri[0])],
                                              labels[static_cast<std::size_t>(tri[1])],
                                              labels[static_cast<std::size_t>(tri[2])]);
        const double ab = side(tri[0], tri[1]);
        if (!known(tri[0], tri[2])) side(tri[0], tri[2]) = side(tri[2], tri[0]) = ac * ab;
        if (!known(tri[1], tri[2])) side(tri[1], tri[2]) = side(tri[2], tri[1]) = bc * ab;
    }
    MatX d2 = side.cwiseProduct(side);
    d2.diagonal().setZero();
    return RatioMatrix::from_squared_distances({labels.begin(), labels.end()}, d2);
}

// ---------------------------------------------------------------------------
// Per-node dispatch

namespace {

std::optional<Eigen::Matrix<double, 3, Eigen::Dynamic>> relpos_columns(
    const MeasurementSet& m, std::span<const NodeId> targets) {
    Eigen::Matrix<double, 3, Eigen::Dynamic> cols(3, static_cast<Eigen::Index>(targets.size()));
    for (std::size_t e = 0; e < targets.size(); ++e) {
        auto v = m.relative_position_to(targets[e]);
        if (!v) return std::nullopt;
        cols.col(static_cast<Eigen::Index>(e)) = *v;
    }
    return cols;
}

}  // namespace

DisplacementConstraint build_displacement_constraint(const MeasurementBook& book, NodeId i,
                                                     std::span<const NodeId> neighbors,
                                                     const BuilderOptions& opts) {
    if (neighbors.size() < 2 || neighbors.size() > 4) {
        throw InvalidArgument("build_displacement_constraint: expected 2 to 4 neighbors");
    }
    const MeasurementSet* own = lookup(book, i);
    if (!own) {
        throw InsufficientMeasurements("build_displacement_constraint: no measurements of node " +
                                       std::to_string(i));
    }
    std::vector<NodeId> labels{i};
    labels.insert(labels.end(), neighbors.begin(), neighbors.end());

    if (neighbors.size() == 4) {
        // The node measures relative positions itself.
        if (own->kind == Sensor::RelPos) {
            auto cols = relpos_columns(*own, neighbors);
            if (!cols) {
                throw InsufficientMeasurements("build_displacement_constraint: node " +
                                               std::to_string(i) + " lacks a relative position");
            }
            return finish(i, {neighbors.begin(), neighbors.end()}, null_space_coefficients(*cols),
                          ConstraintSource::RelPos, ConstraintBranch::Spatial);
        }
        // Borrow a relative-position neighbor's measurements.
        for (NodeId j : neighbors) {
            const MeasurementSet* mj = lookup(book, j);
            if (!mj || mj->kind != Sensor::RelPos) continue;
            std::vector<NodeId> others{i};
            for (NodeId x : neighbors)
                if (x != j) others.push_back(x);
            auto cols = relpos_columns(*mj, others);
            if (!cols) continue;
            return finish(j, others, null_space_coefficients(*cols),
                          ConstraintSource::NeighborRelPos, ConstraintBranch::Spatial);
        }
    }
    // Otherwise (and for two or three neighbors): ratio-of-distance matrix.
    return displacement_from_distance_matrix(build_ratio_matrix(book, labels), opts);
}

bool add_unique(std::vector<DisplacementConstraint>& list, DisplacementConstraint c) {
    auto key = [](const DisplacementConstraint& x) {
        std::vector<NodeId> n = x.neighbors;
        std::sort(n.begin(), n.end());
        return std::make_pair(x.center, n);
    };
    const auto k = key(c);
    for (const auto& existing : list) {
        if (key(existing) == k) return false;
    }
    list.push_back(std::move(c));
    return true;
}

std::vector<DisplacementConstraint> build_node_constraints(const Network& net,
                                                           const MeasurementBook& book, NodeId i,
                                                           const ConstraintPolicy& policy,
                                                           std::vector<BuildFailure>* failures) {
    std::vector<DisplacementConstraint> out;
    const auto attempt = [&](const std::vector<NodeId>& subset) {
        try {
            add_unique(out, build_displacement_constraint(book, i, subset, policy.builder));
        } catch (const Error& e) {
            if (failures) failures->push_back({i, subset, e.what()});
        }
    };
    const bool capped = policy.max_per_node > 0;
    const auto full = [&] {
        return capped && static_cast<int>(out.size()) >= policy.max_per_node;
    };

    if (auto hinted = policy.neighbor_sets.find(i); hinted != policy.neighbor_sets.end()) {
        for (const auto& subset : hinted->second) {
            if (full()) break;
            attempt(subset);
        }
        return out;
    }
    const auto& nb = net.neighbors(i);
    const std::size_t n = nb.size();
    for (std::size_t a = 0; a < n && !full(); ++a)
        for (std::size_t b = a + 1; b < n && !full(); ++b)
            for (std::size_t c = b + 1; c < n && !full(); ++c)
                for (std::size_t d = c + 1; d < n && !full(); ++d) {
                    const std::vector<NodeId> q = {nb[a], nb[b], nb[c], nb[d]};
                    // Only mutually adjacent neighbors, so every member of a
                    // constraint can talk to every other.
                    bool clique = true;
                    for (std::size_t x = 0; x < 4 && clique; ++x)
                        for (std::size_t y = x + 1; y < 4 && clique; ++y)
                            clique = net.adjacent(q[x], q[y]);
                    if (clique) attempt(q);
                }
    return out;
}

ConstraintSet build_network_constraints(const Network& net, const MeasurementBook& book,
                                        const ConstraintPolicy& policy) {
    ConstraintSet set;
    set.angles = anchor_angle_constraints(net);
    for (NodeId i = net.anchor_count(); i < net.size(); ++i) {
        for (auto& c : build_node_constraints(net, book, i, policy, &set.failures)) {
            add_unique(set.displacements, std::move(c));
        }
    }
    return set;
}

}  // namespace mixloc
