#include "mixloc/network.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/SVD>

namespace mixloc {

Network::Network(std::vector<NodeSpec> nodes, const std::vector<Edge>& edges)
    : nodes_(std::move(nodes)), adjacency_(nodes_.size()) {
    bool seen_free = false;
    for (std::size_t a = 0; a < nodes_.size(); ++a) {
        const NodeSpec& spec = nodes_[a];
        if (spec.id != static_cast<NodeId>(a)) {
            throw InvalidArgument("Network: node ids must be contiguous 0..n-1 in order");
        }
        if (spec.role == Role::Anchor) {
            if (seen_free) {
                throw InvalidArgument("Network: anchors must precede free nodes");
            }
            ++anchor_count_;
        } else {
            seen_free = true;
        }
        if (!spec.position.allFinite()) {
            throw InvalidArgument("Network: non-finite position for node " +
                                  std::to_string(spec.id));
        }
        if (std::abs(spec.orientation.norm() - 1.0) > 1e-12) {
            throw InvalidArgument("Network: orientation of node " + std::to_string(spec.id) +
                                  " is not a unit quaternion");
        }
    }
    for (auto [a, b] : edges) {
        check_id(a);
        check_id(b);
        if (a == b) {
            throw InvalidArgument("Network: self loop at node " + std::to_string(a));
        }
        edges_.insert({std::min(a, b), std::max(a, b)});
    }
    for (auto [a, b] : edges_) {
        adjacency_[static_cast<std::size_t>(a)].push_back(b);
        adjacency_[static_cast<std::size_t>(b)].push_back(a);
    }
    for (auto& list : adjacency_) {
        std::sort(list.begin(), list.end());
    }
}

void Network::check_id(NodeId id) const {
    if (id < 0 || id >= size()) {
        throw InvalidArgument("unknown node id " + std::to_string(id));
    }
}

const NodeSpec& Network::node(NodeId id) const {
    check_id(id);
    return nodes_[static_cast<std::size_t>(id)];
}

bool Network::adjacent(NodeId a, NodeId b) const {
    return edges_.count({std::min(a, b), std::max(a, b)}) > 0;
}

const std::vector<NodeId>& Network::neighbors(NodeId id) const {
    check_id(id);
    return adjacency_[static_cast<std::size_t>(id)];
}

Configuration Network::positions() const {
    Configuration out;
    out.reserve(nodes_.size());
    for (const auto& spec : nodes_) {
        out.push_back(spec.position);
    }
    return out;
}

double Network::diameter() const {
    double best = 0.0;
    for (std::size_t a = 0; a < nodes_.size(); ++a) {
        for (std::size_t b = a + 1; b < nodes_.size(); ++b) {
            best = std::max(best, (nodes_[a].position - nodes_[b].position).norm());
        }
    }
    return best;
}

Vec3 relative_position(const Network& net, NodeId i, NodeId j) {
    if (i == j) {
        throw InvalidArgument("relative_position: i == j");
    }
    return net.node(j).position - net.node(i).position;
}

Eigen::Quaterniond random_orientation(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u1 = unit(rng), u2 = unit(rng), u3 = unit(rng);
    const double two_pi = 2.0 * std::numbers::pi;
    const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
    Eigen::Quaterniond q(a * std::sin(two_pi * u2), a * std::cos(two_pi * u2),
                         b * std::sin(two_pi * u3), b * std::cos(two_pi * u3));
    q.normalize();
    return q;
}

// ---------------------------------------------------------------------------
// Noise

bool NoiseSpec::is_zero() const {
    if (mode == NoiseMode::FixedOffset) {
        return vector_offsets.empty() && scalar_offsets.empty();
    }
    return sigma_relpos == 0.0 && sigma_distance == 0.0 && sigma_bearing == 0.0 &&
           sigma_angle == 0.0 && sigma_ratio == 0.0;
}

void NoiseSpec::validate() const {
    for (double s : {sigma_relpos, sigma_distance, sigma_bearing, sigma_angle, sigma_ratio}) {
        if (!(s >= 0.0) || !std::isfinite(s)) {
            throw InvalidArgument("NoiseSpec: standard deviations must be finite and >= 0");
        }
    }
}

// ---------------------------------------------------------------------------
// Measurements

std::optional<double> MeasurementSet::angle_between(NodeId a, NodeId b) const {
    if (a == b) {
        return std::nullopt;
    }
    switch (kind) {
        case Sensor::RelPos:
        case Sensor::Bearing: {
            auto ia = vectors.find(a), ib = vectors.find(b);
            if (ia == vectors.end() || ib == vectors.end()) return std::nullopt;
            const double c = ia->second.normalized().dot(ib->second.normalized());
            return std::acos(std::clamp(c, -1.0, 1.0));
        }
        case Sensor::Angle: {
            auto it = pairs.find({std::min(a, b), std::max(a, b)});
            if (it == pairs.end()) return std::nullopt;
            return it->second;
        }
        default:
            return std::nullopt;
    }
}

std::optional<double> MeasurementSet::distance_ratio(NodeId a, NodeId b) const {
    if (a == b) {
        return 1.0;
    }
    switch (kind) {
        case Sensor::RelPos:
        case Sensor::Distance: {
            auto da = distance_to(a), db = distance_to(b);
            if (!da || !db) return std::nullopt;
            return *da / *db;
        }
        case Sensor::RatioOfDistance: {
            auto it = pairs.find({std::min(a, b), std::max(a, b)});
            if (it == pairs.end()) return std::nullopt;
            return a < b ? it->second : 1.0 / it->second;
        }
        default:
            return std::nullopt;
    }
}

std::optional<double> MeasurementSet::distance_to(NodeId a) const {
    if (kind == Sensor::Distance) {
        auto it = distances.find(a);
        if (it == distances.end()) return std::nullopt;
        return it->second;
    }
    if (kind == Sensor::RelPos) {
        auto it = vectors.find(a);
        if (it == vectors.end()) return std::nullopt;
        return it->second.norm();
    }
    return std::nullopt;
}

std::optional<Vec3> MeasurementSet::relative_position_to(NodeId a) const {
    if (kind != Sensor::RelPos) return std::nullopt;
    auto it = vectors.find(a);
    if (it == vectors.end()) return std::nullopt;
    return it->second;
}

bool MeasurementSet::operator==(const MeasurementSet& other) const {
    return owner == other.owner && kind == other.kind && vectors == other.vectors &&
           distances == other.distances && pairs == other.pairs &&
           noise_seed == other.noise_seed;
}

MeasurementSet synthesize_measurements(const Network& net, NodeId i,
                                       const std::optional<NoiseSpec>& noise) {
    const NodeSpec& spec = net.node(i);
    const auto& nbrs = net.neighbors(i);
    const bool needs_pairs =
        spec.sensor == Sensor::Angle || spec.sensor == Sensor::RatioOfDistance;
    if (nbrs.empty() || (needs_pairs && nbrs.size() < 2)) {
        throw PreconditionError("synthesize_measurements: node " + std::to_string(i) +
                                " has too few neighbors for its sensor");
    }
    const Mat3 to_local = spec.rotation().transpose();

    MeasurementSet out;
    out.owner = i;
    out.kind = spec.sensor;
    switch (spec.sensor) {
        case Sensor::RelPos:
            for (NodeId j : nbrs) out.vectors[j] = to_local * relative_position(net, i, j);
            break;
        case Sensor::Bearing:
            for (NodeId j : nbrs) {
                const Vec3 e = relative_position(net, i, j);
                out.vectors[j] = to_local * (e / e.norm());
            }
            break;
        case Sensor::Distance:
            for (NodeId j : nbrs) out.distances[j] = relative_position(net, i, j).norm();
            break;
        case Sensor::Angle:
            for (std::size_t a = 0; a < nbrs.size(); ++a) {
                const Vec3 ga = (to_local * relative_position(net, i, nbrs[a])).normalized();
                for (std::size_t b = a + 1; b < nbrs.size(); ++b) {
                    const Vec3 gb = (to_local * relative_position(net, i, nbrs[b])).normalized();
                    out.pairs[{nbrs[a], nbrs[b]}] = std::acos(std::clamp(ga.dot(gb), -1.0, 1.0));
                }
            }
            break;
        case Sensor::RatioOfDistance:
            for (std::size_t a = 0; a < nbrs.size(); ++a) {
                const double da = relative_position(net, i, nbrs[a]).norm();
                for (std::size_t b = a + 1; b < nbrs.size(); ++b) {
                    out.pairs[{nbrs[a], nbrs[b]}] = da / relative_position(net, i, nbrs[b]).norm();
                }
            }
            break;
    }
    if (noise && !noise->is_zero()) {
        return inject_noise(out, *noise);
    }
    return out;
}

MeasurementBook synthesize_all(const Network& net, const std::optional<NoiseSpec>& noise) {
    MeasurementBook book;
    for (const auto& spec : net.nodes()) {
        if (!net.neighbors(spec.id).empty()) {
            book.emplace(spec.id, synthesize_measurements(net, spec.id, noise));
        }
    }
    return book;
}

MeasurementSet inject_noise(const MeasurementSet& clean, const NoiseSpec& spec) {
    spec.validate();
    if (spec.is_zero()) return clean;
    MeasurementSet out = clean;
    out.noise_seed = spec.seed;

    if (spec.mode == NoiseMode::FixedOffset) {
        for (auto& [j, v] : out.vectors) {
            auto it = spec.vector_offsets.find({clean.owner, j});
            if (it != spec.vector_offsets.end()) {
                v += it->second;
                if (out.kind == Sensor::Bearing) v.normalize();
            }
        }
        for (auto& [j, d] : out.distances) {
            auto it = spec.scalar_offsets.find({clean.owner, j, -1});
            if (it != spec.scalar_offsets.end()) d = std::max(d + it->second, 1e-12 * d);
        }
        for (auto& [key, x] : out.pairs) {
            auto it = spec.scalar_offsets.find({clean.owner, key.first, key.second});
            if (it == spec.scalar_offsets.end()) continue;
            if (out.kind == Sensor::Angle) {
                x = std::clamp(x + it->second, 0.0, std::numbers::pi);
            } else {
                x = std::max(x + it->second, 1e-12 * x);
            }
        }
        return out;
    }

    const auto lo = static_cast<std::uint32_t>(spec.seed & 0xffffffffu);
    const auto hi = static_cast<std::uint32_t>(spec.seed >> 32);
    std::seed_seq seq{lo, hi, static_cast<std::uint32_t>(clean.owner)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto draw3 = [&] { return Vec3(gauss(rng), gauss(rng), gauss(rng)); };

    switch (out.kind) {
        case Sensor::RelPos:
            for (auto& [j, v] : out.vectors) v += spec.sigma_relpos * draw3();
            break;
        case Sensor::Bearing:
            for (auto& [j, v] : out.vectors) {
                v += spec.sigma_bearing * draw3();
                v.normalize();
            }
            break;
        case Sensor::Distance:
            for (auto& [j, d] : out.distances) {
                d = std::max(d + spec.sigma_distance * gauss(rng), 1e-12 * d);
            }
            break;
        case Sensor::Angle:
            for (auto& [key, x] : out.pairs) {
                x = std::clamp(x + spec.sigma_angle * gauss(rng), 0.0, std::numbers::pi);
            }
            break;
        case Sensor::RatioOfDistance:
            for (auto& [key, x] : out.pairs) {
                x = std::max(x + spec.sigma_ratio * gauss(rng), 1e-12 * x);
            }
            break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Assumptions

bool vectors_colinear(const std::vector<Vec3>& vectors, double tol) {
    if (vectors.size() < 2) {
        return true;
    }
    Eigen::Matrix<double, 3, Eigen::Dynamic> cols(3, static_cast<Eigen::Index>(vectors.size()));
    double longest = 0.0;
    for (std::size_t a = 0; a < vectors.size(); ++a) {
        cols.col(static_cast<Eigen::Index>(a)) = vectors[a];
        longest = std::max(longest, vectors[a].norm());
    }
    Eigen::JacobiSVD<MatX> svd(cols);
    return svd.singularValues()(1) < tol * longest;
}

std::optional<std::array<NodeId, 4>> find_neighbor_clique(const Network& net, NodeId i) {
    const auto& nb = net.neighbors(i);
    const std::size_t n = nb.size();
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
            for (std::size_t c = b + 1; c < n; ++c)
                for (std::size_t d = c + 1; d < n; ++d) {
                    const std::array<NodeId, 4> q = {nb[a], nb[b], nb[c], nb[d]};
                    bool clique = true;
                    for (int x = 0; x < 4 && clique; ++x)
                        for (int y = x + 1; y < 4 && clique; ++y)
                            clique = net.adjacent(q[x], q[y]);
                    if (!clique) continue;
                    const Vec3 base = net.node(q[0]).position;
                    std::vector<Vec3> spread;
                    for (int x = 1; x < 4; ++x) spread.push_back(net.node(q[x]).position - base);
                    if (!vectors_colinear(spread)) return q;
                }
    return std::nullopt;
}

AssumptionReport validate_assumptions(const Network& net) {
    AssumptionReport report;
    const double scale = std::max(net.diameter(), 1e-300);
    for (int a = 0; a < net.size(); ++a) {
        for (int b = a + 1; b < net.size(); ++b) {
            if ((net.node(a).position - net.node(b).position).norm() <= 1e-12 * scale) {
                report.violations.push_back({Violation::Kind::Collocated,
                                             {a, b},
                                             "nodes " + std::to_string(a) + " and " +
                                                 std::to_string(b) + " are collocated"});
            }
        }
    }
    for (int i = 0; i < net.anchor_count(); ++i) {
        std::vector<NodeId> anchor_nbrs;
        for (NodeId j : net.neighbors(i)) {
            if (net.is_anchor(j)) anchor_nbrs.push_back(j);
        }
        bool found = false;
        for (std::size_t a = 0; a < anchor_nbrs.size() && !found; ++a)
            for (std::size_t b = a + 1; b < anchor_nbrs.size() && !found; ++b)
                found = net.adjacent(anchor_nbrs[a], anchor_nbrs[b]);
        if (!found) {
            report.violations.push_back(
                {Violation::Kind::AnchorTriangle,
                 {i},
                 "anchor " + std::to_string(i) + " has no pair of adjacent anchor neighbors"});
        }
    }
    for (int i = net.anchor_count(); i < net.size(); ++i) {
        if (!find_neighbor_clique(net, i)) {
            report.violations.push_back(
                {Violation::Kind::FreeNeighborhood,
                 {i},
                 "free node " + std::to_string(i) +
                     " has no four mutually adjacent, non-colinear neighbors"});
        }
    }
    return report;
}

}  // namespace mixloc
