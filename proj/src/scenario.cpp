#include "mixloc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/LU>

#include "mixloc/rigidity.hpp"

namespace mixloc {

ConstraintPolicy Scenario::policy() const {
    ConstraintPolicy p;
    p.neighbor_sets = neighbor_sets;
    return p;
}

namespace {

NodeSpec make_node(NodeId id, Vec3 pos, Role role, Sensor sensor,
                   Eigen::Quaterniond q = Eigen::Quaterniond::Identity()) {
    NodeSpec n;
    n.id = id;
    n.position = pos;
    n.role = role;
    n.sensor = sensor;
    n.orientation = q;
    return n;
}

std::vector<Edge> clique_edges(const std::vector<NodeId>& ids) {
    std::vector<Edge> out;
    for (std::size_t a = 0; a < ids.size(); ++a)
        for (std::size_t b = a + 1; b < ids.size(); ++b) out.emplace_back(ids[a], ids[b]);
    return out;
}

std::mt19937_64 seeded(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream & 0xffffffffu),
                      static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

Sensor draw_sensor(SensorMix mix, std::mt19937_64& rng) {
    switch (mix) {
        case SensorMix::AllDistance: return Sensor::Distance;
        case SensorMix::AllBearing: return Sensor::Bearing;
        case SensorMix::AllAngle: return Sensor::Angle;
        case SensorMix::AllRatio: return Sensor::RatioOfDistance;
        case SensorMix::AllRelPos: return Sensor::RelPos;
        case SensorMix::Mixed: {
            static constexpr Sensor all[] = {Sensor::RelPos, Sensor::Distance, Sensor::Bearing,
                                             Sensor::Angle, Sensor::RatioOfDistance};
            std::uniform_int_distribution<int> pick(0, 4);
            return all[pick(rng)];
        }
    }
    return Sensor::Distance;
}

Vec3 draw_point(std::mt19937_64& rng, const Vec3& lo, const Vec3& hi) {
    Vec3 x;
    for (int a = 0; a < 3; ++a) {
        std::uniform_real_distribution<double> u(lo(a), hi(a));
        x(a) = u(rng);
    }
    return x;
}

// Draws a point at least `gap` away from every existing one.
Vec3 draw_separated(std::mt19937_64& rng, const Vec3& lo, const Vec3& hi,
                    const std::vector<Vec3>& existing, double gap) {
    for (int tries = 0; tries < 1000; ++tries) {
        const Vec3 x = draw_point(rng, lo, hi);
        bool ok = true;
        for (const auto& y : existing) {
            if ((x - y).norm() < gap) {
                ok = false;
                break;
            }
        }
        if (ok) return x;
    }
    throw GenerationError("could not place a node away from the others");
}

struct Growth {
    std::vector<Edge> edges;
    std::vector<std::array<NodeId, 4>> cliques;

    void attach(NodeId v, std::array<NodeId, 4> q) {
        for (NodeId u : q) edges.emplace_back(u, v);
        for (int skip = 0; skip < 4; ++skip) {
            std::array<NodeId, 4> next{};
            int k = 0;
            for (int a = 0; a < 4; ++a)
                if (a != skip) next[static_cast<std::size_t>(k++)] = q[static_cast<std::size_t>(a)];
            next[3] = v;
            cliques.push_back(next);
        }
    }

    const std::array<NodeId, 4>& pick(std::mt19937_64& rng) const {
        std::uniform_int_distribution<std::size_t> u(0, cliques.size() - 1);
        return cliques[u(rng)];
    }
};

// The clique q should be a reasonably fat tetrahedron and x should sit at
// bounded barycentric coordinates with respect to it.
bool well_placed(const std::vector<Vec3>& pos, const std::array<NodeId, 4>& q, const Vec3& x,
                 const RandomNetworkOptions& opts) {
    const auto at = [&](int k) { return pos[static_cast<std::size_t>(q[static_cast<std::size_t>(k)])]; };
    Mat3 edges;
    edges << at(1) - at(0), at(2) - at(0), at(3) - at(0);
    double mean = 0.0;
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b) mean += (at(a) - at(b)).norm() / 6.0;
    const double volume = std::abs(edges.determinant()) / 6.0;
    if (volume < opts.min_tetra_quality * mean * mean * mean) return false;
    const Vec3 lambda = edges.partialPivLu().solve(x - at(0));
    const double first = 1.0 - lambda.sum();
    return std::max(std::abs(first), lambda.cwiseAbs().maxCoeff()) <= opts.max_barycentric;
}

bool acceptable(const Scenario& s, bool require_rigid) {
    if (!validate_assumptions(s.network).ok()) return false;
    if (!require_rigid) return true;
    const NetworkCheck c = check_network(s);
    return c.rigid && c.localizable;
}

}  // namespace

Scenario seven_node_scenario() {
    Scenario s;
    s.name = "fig4";
    std::vector<NodeSpec> nodes = {
        make_node(0, {0, 0, 20}, Role::Anchor, Sensor::Distance),
        make_node(1, {0, 0, 0}, Role::Anchor, Sensor::Distance),
        make_node(2, {10, -10, 0}, Role::Anchor, Sensor::Distance),
        make_node(3, {0, 20, 0}, Role::Anchor, Sensor::Distance),
        make_node(4, {10, 20, 0}, Role::Free, Sensor::Distance),
        make_node(5, {10, 40, 0}, Role::Free, Sensor::Distance),
        make_node(6, {2.5, 30, 30}, Role::Free, Sensor::Distance),
    };
    std::vector<Edge> edges = clique_edges({0, 1, 2, 3});
    for (NodeId a : {0, 1, 2, 3}) edges.emplace_back(a, 4);
    for (NodeId a : {0, 1, 2, 3, 4}) edges.emplace_back(a, 5);
    for (NodeId a : {0, 3, 4, 5}) edges.emplace_back(a, 6);
    s.network = Network(std::move(nodes), edges);
    s.neighbor_sets = {{4, {{1, 2, 3}}}, {5, {{2, 4}}}, {6, {{0, 3, 4, 5}}}};
    return s;
}

Scenario seven_node_dangling_scenario() {
    const Scenario base = seven_node_scenario();
    Scenario s;
    s.name = "fig4-dangling";
    std::vector<NodeSpec> nodes;
    for (NodeId a = 0; a < 4; ++a) nodes.push_back(base.network.node(a));
    nodes.push_back(make_node(4, {-10, 5, 8}, Role::Anchor, Sensor::Distance));
    for (NodeId f = 4; f < 7; ++f) {
        NodeSpec spec = base.network.node(f);
        spec.id = f + 1;
        nodes.push_back(spec);
    }
    const auto shift = [](NodeId id) { return id >= 4 ? id + 1 : id; };
    std::vector<Edge> edges;
    for (auto [a, b] : base.network.edges()) edges.emplace_back(shift(a), shift(b));
    edges.emplace_back(0, 4);
    edges.emplace_back(1, 4);
    s.network = Network(std::move(nodes), edges);
    for (const auto& [node, sets] : base.neighbor_sets) {
        auto& out = s.neighbor_sets[shift(node)];
        for (const auto& set : sets) {
            std::vector<NodeId> moved;
            for (NodeId id : set) moved.push_back(shift(id));
            out.push_back(moved);
        }
    }
    return s;
}

Scenario mixed_27_node_scenario(std::uint64_t seed) {
    static constexpr Sensor kinds[] = {Sensor::RelPos, Sensor::Distance, Sensor::Bearing,
                                       Sensor::Angle, Sensor::RatioOfDistance};
    for (std::uint64_t attempt = 0; attempt < 10000; ++attempt) {
        auto rng = seeded(seed, attempt);
        std::vector<NodeSpec> nodes = {
            make_node(0, {-200, -200, 0}, Role::Anchor, Sensor::RelPos, random_orientation(rng)),
            make_node(1, {200, -200, 0}, Role::Anchor, Sensor::RatioOfDistance,
                      random_orientation(rng)),
            make_node(2, {200, 200, 0}, Role::Anchor, Sensor::Bearing, random_orientation(rng)),
            make_node(3, {-200, 200, 200}, Role::Anchor, Sensor::Distance,
                      random_orientation(rng)),
            make_node(4, {0, -200, 0}, Role::Free, Sensor::RelPos),
            make_node(5, {0, -200, 100}, Role::Free, Sensor::Angle, random_orientation(rng)),
            make_node(6, {0, 0, 100}, Role::Free, Sensor::Distance, random_orientation(rng)),
        };
        Growth g;
        g.edges = clique_edges({0, 1, 2, 3});
        g.cliques.push_back({0, 1, 2, 3});
        g.attach(5, {0, 1, 2, 3});
        g.attach(6, {0, 1, 2, 5});
        g.attach(4, {0, 1, 5, 6});

        std::vector<Vec3> placed;
        for (const auto& n : nodes) placed.push_back(n.position);
        std::uniform_int_distribution<int> pick(0, 4);
        try {
            for (NodeId id = 7; id < 27; ++id) {
                const Vec3 pos =
                    draw_separated(rng, Vec3(-250, -250, -50), Vec3(250, 250, 250), placed, 25.0);
                placed.push_back(pos);
                const Sensor sensor = kinds[pick(rng)];
                nodes.push_back(make_node(id, pos, Role::Free, sensor, random_orientation(rng)));
                g.attach(id, g.pick(rng));
            }
        } catch (const GenerationError&) {
            continue;
        }
        Scenario s;
        s.name = "sec6-analog";
        s.network = Network(std::move(nodes), g.edges);
        if (acceptable(s, true)) return s;
    }
    throw GenerationError("27-node network: no rigid network found");
}

const char* to_string(SensorMix mix) {
    switch (mix) {
        case SensorMix::AllDistance: return "all-distance";
        case SensorMix::AllBearing: return "all-bearing";
        case SensorMix::AllAngle: return "all-angle";
        case SensorMix::AllRatio: return "all-ratio";
        case SensorMix::AllRelPos: return "all-relpos";
        case SensorMix::Mixed: return "mixed";
    }
    return "?";
}

SensorMix sensor_mix_from_string(const std::string& name) {
    for (SensorMix m : {SensorMix::AllDistance, SensorMix::AllBearing, SensorMix::AllAngle,
                        SensorMix::AllRatio, SensorMix::AllRelPos, SensorMix::Mixed}) {
        if (name == to_string(m)) return m;
    }
    throw InvalidArgument("unknown sensor mix '" + name + "'");
}

Scenario random_scenario(const RandomNetworkOptions& opts) {
    if (opts.anchors < 3 || opts.free < 1) {
        throw InvalidArgument("random network: need at least 3 anchors and 1 free node");
    }
    if (!(opts.box > 0.0) || opts.extra_edge_prob < 0.0 || opts.extra_edge_prob > 1.0) {
        throw InvalidArgument("random network: box must be positive, edge probability in [0,1]");
    }
    const int n = opts.anchors + opts.free;
    const Vec3 lo = Vec3::Constant(-opts.box), hi = Vec3::Constant(opts.box);
    const double gap = 0.05 * opts.box;
    for (int attempt = 0; attempt < opts.max_attempts; ++attempt) {
        auto rng = seeded(opts.seed, static_cast<std::uint64_t>(attempt));
        std::vector<NodeSpec> nodes;
        std::vector<Vec3> placed;
        Growth g;
        std::vector<NodeId> anchors(static_cast<std::size_t>(opts.anchors));
        for (NodeId a = 0; a < opts.anchors; ++a) anchors[static_cast<std::size_t>(a)] = a;
        g.edges = clique_edges(anchors);
        const auto add_node = [&](NodeId id, const Vec3& pos) {
            placed.push_back(pos);
            const Role role = id < opts.anchors ? Role::Anchor : Role::Free;
            const Sensor sensor = draw_sensor(opts.mix, rng);
            nodes.push_back(make_node(id, pos, role, sensor, random_orientation(rng)));
        };
        try {
            for (NodeId id = 0; id < opts.anchors; ++id) {
                add_node(id, draw_separated(rng, lo, hi, placed, gap));
            }
            NodeId next = opts.anchors;
            if (opts.anchors == 3) {
                add_node(next, draw_separated(rng, lo, hi, placed, gap));
                for (NodeId a : anchors) g.edges.emplace_back(a, next);
                g.cliques.push_back({0, 1, 2, next});
                ++next;
            } else {
                for (int a = 0; a < opts.anchors; ++a)
                    for (int b = a + 1; b < opts.anchors; ++b)
                        for (int c = b + 1; c < opts.anchors; ++c)
                            for (int d = c + 1; d < opts.anchors; ++d)
                                g.cliques.push_back({a, b, c, d});
            }
            for (; next < n; ++next) {
                bool done = false;
                for (int tries = 0; tries < 200 && !done; ++tries) {
                    const auto q = g.pick(rng);
                    const Vec3 pos = draw_separated(rng, lo, hi, placed, gap);
                    if (!well_placed(placed, q, pos, opts)) continue;
                    add_node(next, pos);
                    g.attach(next, q);
                    done = true;
                }
                if (!done) throw GenerationError("no well-shaped clique to attach to");
            }
        } catch (const GenerationError&) {
            continue;
        }
        std::bernoulli_distribution extra(opts.extra_edge_prob);
        for (NodeId a = 0; a < n; ++a)
            for (NodeId b = std::max(a + 1, opts.anchors); b < n; ++b)
                if (extra(rng)) g.edges.emplace_back(a, b);

        Scenario s;
        s.name = "random";
        s.network = Network(std::move(nodes), g.edges);
        if (acceptable(s, opts.require_rigid)) return s;
    }
    throw GenerationError("random network: no acceptable network after " +
                          std::to_string(opts.max_attempts) + " attempts");
}

NetworkCheck check_network(const Scenario& s) {
    const Network& net = s.network;
    const MeasurementBook book = synthesize_all(net);
    const ConstraintSet set = build_network_constraints(net, book, s.policy());
    const Configuration p = net.positions();
    const RigidityMatrix r = build_rigidity_matrix(set, p);
    const RigidityReport rep = is_infinitesimally_rigid(r);
    const InformationMatrix info = information_matrix(r, net.anchor_count());
    NetworkCheck out;
    out.rigid = rep.rigid;
    out.nullity = rep.nullity;
    out.constraints = set.displacements.size();
    out.failures = set.failures.size();
    if (net.free_count() > 0) {
        const Spectrum sp = symmetric_spectrum(info.ff());
        out.lambda_min = sp.lambda_min;
        out.lambda_max = sp.lambda_max;
        out.localizable = check_localizable(info.ff());
    }
    return out;
}

}  // namespace mixloc
