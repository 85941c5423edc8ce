#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "mixloc/rigidity.hpp"
#include "mixloc/scenario.hpp"
#include "mixloc/simnet.hpp"
#include "test_support.hpp"

using namespace mixloc;
using namespace mixloc::testing;

namespace {

SimConfig config_for(const Scenario& s, Protocol protocol = Protocol::Simultaneous) {
    SimConfig c;
    c.protocol = protocol;
    c.policy = s.policy();
    c.solver.max_iters = 200000;
    c.solver.convergence_eps = 1e-11;
    c.seed = 5;
    return c;
}

double worst_error(const Configuration& est, const Configuration& truth) {
    double worst = 0.0;
    for (std::size_t i = 0; i < est.size(); ++i) worst = std::max(worst, (est[i] - truth[i]).norm());
    return worst;
}

NoiseSpec small_noise() {
    NoiseSpec n;
    n.sigma_relpos = n.sigma_distance = 1e-4;
    n.sigma_bearing = n.sigma_angle = n.sigma_ratio = 1e-6;
    return n;
}

// Noisy coplanar and collinear groups need slack above the noise level.
void loosen(SimConfig& c) {
    c.policy.builder.geometry.colinear = 1e-3;
    c.policy.builder.geometry.volume = 1e-4;
}

Configuration direct_from(const ConstraintSet& set, const Network& net) {
    const Configuration p = net.positions();
    const InformationMatrix info = information_matrix(build_rigidity_matrix(set, p), net.anchor_count());
    const Configuration anchors(p.begin(), p.begin() + net.anchor_count());
    Configuration out = anchors;
    const Configuration free = direct_solve(info.ff(), info.fa(), anchors);
    out.insert(out.end(), free.begin(), free.end());
    return out;
}

NodeSpec node(NodeId id, Vec3 x, Role role) {
    NodeSpec s;
    s.id = id;
    s.position = x;
    s.role = role;
    s.sensor = Sensor::Distance;
    return s;
}

}  // namespace

TEST(Simnet, NoiselessRunsReachTruth) {
    for (const Scenario& s : {seven_node_scenario(), mixed_27_node_scenario(2)}) {
        const SimRun r = run(s.network, config_for(s));
        ASSERT_TRUE(r.trajectory.has_value());
        EXPECT_TRUE(r.trajectory->converged_at.has_value()) << s.name;
        EXPECT_LT(worst_error(r.estimates, s.network.positions()), 1e-6 * s.network.diameter()) << s.name;
        if (s.name == "fig4") EXPECT_TRUE(r.constraints.failures.empty());
    }
}

TEST(Simnet, SequentialProtocolOnSevenNodes) {
    const Scenario s = seven_node_scenario();
    const SimRun r = run(s.network, config_for(s, Protocol::Sequential));
    ASSERT_TRUE(r.sequential.has_value());
    EXPECT_TRUE(r.sequential->complete());
    EXPECT_LT(worst_error(r.estimates, s.network.positions()), 1e-9);
    EXPECT_FALSE(r.trajectory.has_value());
}

TEST(Simnet, NoisyRunConvergesToNoisyFixedPoint) {
    const Scenario s = seven_node_scenario();
    SimConfig c = config_for(s);
    loosen(c);
    c.noise = small_noise();
    const SimRun r = run(s.network, c);
    ASSERT_EQ(r.constraints.displacements.size(), 3u);
    const Configuration fixed = direct_from(r.constraints, s.network);
    EXPECT_LT(worst_error(r.estimates, fixed), 1e-6);
    EXPECT_GT(worst_error(r.estimates, s.network.positions()), 1e-9);
}

TEST(Simnet, SameSeedIsBitwiseIdentical) {
    const Scenario s = mixed_27_node_scenario(3);
    SimConfig c = config_for(s);
    loosen(c);
    c.noise = small_noise();
    c.solver.max_iters = 500;
    const SimRun a = run(s.network, c);
    const SimRun b = run(s.network, c);
    EXPECT_EQ(a.estimates, b.estimates);
    EXPECT_EQ(a.messages, b.messages);
    ASSERT_EQ(a.log.size(), b.log.size());
    for (std::size_t k = 0; k < a.log.size(); ++k) {
        EXPECT_EQ(a.log[k].from, b.log[k].from);
        EXPECT_EQ(a.log[k].to, b.log[k].to);
        EXPECT_EQ(a.log[k].round, b.log[k].round);
    }
    for (std::size_t i = 0; i < a.books.size(); ++i) EXPECT_TRUE(a.books[i] == b.books[i]) << i;

    c.seed = 6;
    const SimRun other = run(s.network, c);
    EXPECT_NE(other.estimates, a.estimates);
}

TEST(Simnet, MessagesFollowEdgesOnly) {
    const Scenario s = mixed_27_node_scenario(4);
    SimConfig c = config_for(s);
    c.solver.max_iters = 50;
    const SimRun r = run(s.network, c);
    EXPECT_EQ(r.messages, r.log.size());
    EXPECT_FALSE(r.log_truncated);
    for (const Message& m : r.log) {
        EXPECT_TRUE(s.network.adjacent(m.from, m.to)) << m.from << "->" << m.to;
        if (m.round == 0) EXPECT_EQ(m.kind, Message::Kind::Measurements);
    }
    // Every node broadcasts its measurements once over each incident edge.
    std::size_t exchange = 0;
    for (const Message& m : r.log) exchange += m.kind == Message::Kind::Measurements;
    EXPECT_EQ(exchange, 2 * s.network.edges().size());
}

TEST(Simnet, BooksHoldOnlyNeighborMeasurements) {
    const Scenario s = mixed_27_node_scenario(1);
    SimConfig c = config_for(s);
    c.solver.max_iters = 1;
    const SimRun r = run(s.network, c);
    for (NodeId i = 0; i < s.network.size(); ++i) {
        const auto& book = r.books[static_cast<std::size_t>(i)];
        EXPECT_EQ(book.size(), s.network.neighbors(i).size() + 1);
        for (const auto& [owner, set] : book) EXPECT_TRUE(owner == i || s.network.adjacent(i, owner));
    }
}

TEST(Simnet, AnchorAngleConstraintsIgnoreNoise) {
    const Scenario s = mixed_27_node_scenario(2);
    SimConfig c = config_for(s);
    loosen(c);
    c.solver.max_iters = 1;
    const SimRun clean = run(s.network, c);
    c.noise = small_noise();
    const SimRun noisy = run(s.network, c);
    ASSERT_EQ(clean.constraints.angles.size(), noisy.constraints.angles.size());
    ASSERT_FALSE(clean.constraints.angles.empty());
    for (std::size_t k = 0; k < clean.constraints.angles.size(); ++k) {
        EXPECT_EQ(clean.constraints.angles[k].triple, noisy.constraints.angles[k].triple);
        EXPECT_EQ(clean.constraints.angles[k].weights, noisy.constraints.angles[k].weights);
    }
}

TEST(Simnet, LogLimitCapsStoredMessages) {
    const Scenario s = seven_node_scenario();
    SimConfig c = config_for(s);
    c.log_limit = 10;
    const SimRun r = run(s.network, c);
    EXPECT_EQ(r.log.size(), 10u);
    EXPECT_TRUE(r.log_truncated);
    EXPECT_GT(r.messages, 10u);
}

TEST(Simnet, InvalidNetworkNeedsForce) {
    // Free node 4 sees only two anchors on its own line; node 5 sees one.
    std::vector<NodeSpec> nodes = {node(0, {0, 0, 0}, Role::Anchor), node(1, {2, 0, 0}, Role::Anchor),
                                   node(2, {0, 5, 0}, Role::Anchor), node(3, {0, 0, 5}, Role::Anchor),
                                   node(4, {3, 0, 0}, Role::Free), node(5, {-4, -4, -4}, Role::Free)};
    std::vector<Edge> edges = complete_edges(4);
    edges.emplace_back(0, 4);
    edges.emplace_back(1, 4);
    edges.emplace_back(0, 5);
    const Network net(nodes, edges);
    ASSERT_FALSE(validate_assumptions(net).ok());

    SimConfig c;
    c.protocol = Protocol::Sequential;
    EXPECT_THROW(run(net, c), PreconditionError);
    c.force = true;
    const SimRun r = run(net, c);
    ASSERT_TRUE(r.sequential.has_value());
    EXPECT_LT((r.estimates[4] - Vec3(3, 0, 0)).norm(), 1e-12);
    EXPECT_EQ(r.sequential->unlocalized, (std::vector<NodeId>{5}));
}

TEST(Simnet, UncoveredNodeStopsSimultaneousRun) {
    std::vector<NodeSpec> nodes = {node(0, {0, 0, 0}, Role::Anchor), node(1, {9, 0, 0}, Role::Anchor),
                                   node(2, {0, 9, 0}, Role::Anchor), node(3, {0, 0, 9}, Role::Anchor),
                                   node(4, {3, 3, 3}, Role::Free), node(5, {-4, -4, -4}, Role::Free)};
    std::vector<Edge> edges = complete_edges(4);
    for (NodeId a : {0, 1, 2, 3}) edges.emplace_back(a, 4);
    edges.emplace_back(0, 5);
    const Network net(nodes, edges);
    SimConfig c;
    c.force = true;
    EXPECT_THROW(run(net, c), CoverageError);
}
