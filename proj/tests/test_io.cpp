#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "mixloc/io.hpp"
#include "mixloc/reference.hpp"
#include "mixloc/rigidity.hpp"
#include "mixloc/scenario.hpp"

using namespace mixloc;

namespace {

void expect_same_network(const Network& a, const Network& b) {
    ASSERT_EQ(a.size(), b.size());
    EXPECT_EQ(a.anchor_count(), b.anchor_count());
    EXPECT_EQ(a.edges(), b.edges());
    for (NodeId i = 0; i < a.size(); ++i) {
        const NodeSpec& x = a.node(i);
        const NodeSpec& y = b.node(i);
        EXPECT_EQ(x.id, y.id);
        EXPECT_EQ(x.position, y.position);
        EXPECT_EQ(x.role, y.role);
        EXPECT_EQ(x.sensor, y.sensor);
        EXPECT_EQ(x.orientation.coeffs(), y.orientation.coeffs());
    }
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("mixloc_io_" + name);
}

}  // namespace

TEST(ScenarioJson, RandomScenarioRoundTripsExactly) {
    RandomNetworkOptions o;
    o.free = 12;
    o.seed = 77;
    const Scenario s = random_scenario(o);
    const Scenario back = scenario_from_json(scenario_to_json(s));
    EXPECT_EQ(back.name, s.name);
    expect_same_network(s.network, back.network);
    // Serialized text is stable across a second pass.
    EXPECT_EQ(scenario_to_json(back).dump(), scenario_to_json(s).dump());
}

TEST(ScenarioJson, HintsAndNoiseSurvive) {
    Scenario s = seven_node_scenario();
    NoiseSpec n;
    n.seed = 42;
    n.sigma_distance = 0.125;
    n.sigma_angle = 1.0 / 3.0;
    s.noise = n;
    const Json j = scenario_to_json(s);
    const Scenario back = scenario_from_json(j);
    EXPECT_EQ(back.neighbor_sets, s.neighbor_sets);
    ASSERT_TRUE(back.noise.has_value());
    EXPECT_EQ(back.noise->seed, 42u);
    EXPECT_EQ(back.noise->sigma_distance, 0.125);
    EXPECT_EQ(back.noise->sigma_angle, 1.0 / 3.0);
    expect_same_network(s.network, back.network);
}

TEST(ScenarioJson, NodeLayout) {
    const Json j = scenario_to_json(seven_node_scenario());
    const Json& first = j.at("nodes").at(0);
    EXPECT_EQ(first.at("id"), 0);
    EXPECT_EQ(first.at("xyz"), Json::array({0.0, 0.0, 20.0}));
    EXPECT_EQ(first.at("role"), "anchor");
    EXPECT_EQ(first.at("sensor"), "distance");
    EXPECT_EQ(first.at("quaternion"), Json::array({1.0, 0.0, 0.0, 0.0}));
    EXPECT_EQ(j.at("edges").at(0), Json::array({0, 1}));
}

TEST(ScenarioJson, MissingQuaternionMeansIdentity) {
    Json j = scenario_to_json(seven_node_scenario());
    for (auto& n : j["nodes"]) n.erase("quaternion");
    const Scenario s = scenario_from_json(j);
    for (const auto& n : s.network.nodes()) EXPECT_TRUE(n.orientation.isApprox(Eigen::Quaterniond::Identity()));
}

TEST(ScenarioJson, QuaternionIsNormalizedOnLoad) {
    Json j = scenario_to_json(seven_node_scenario());
    j["nodes"][4]["quaternion"] = Json::array({0.7071, 0.0, 0.7071, 0.0});
    const Scenario s = scenario_from_json(j);
    EXPECT_NEAR(s.network.node(4).orientation.norm(), 1.0, 1e-15);
    const Vec3 x = s.network.node(4).rotation() * Vec3::UnitX();
    EXPECT_LT((x - Vec3(0.0, 0.0, -1.0)).norm(), 1e-12);
    j["nodes"][4]["quaternion"] = Json::array({0.0, 0.0, 0.0, 0.0});
    EXPECT_THROW(scenario_from_json(j), InvalidArgument);
}

TEST(ScenarioJson, MalformedInputIsRejected) {
    Json j = scenario_to_json(seven_node_scenario());
    j["nodes"][0]["xyz"] = Json::array({1.0, 2.0});
    EXPECT_THROW(scenario_from_json(j), InvalidArgument);
    j = scenario_to_json(seven_node_scenario());
    j["nodes"][0]["sensor"] = "sonar";
    EXPECT_THROW(scenario_from_json(j), InvalidArgument);
    j = scenario_to_json(seven_node_scenario());
    j["edges"].push_back(Json::array({1, 2, 3}));
    EXPECT_THROW(scenario_from_json(j), InvalidArgument);
}

TEST(NoiseJson, FixedOffsetsRoundTrip) {
    NoiseSpec n = node5_fixed_offsets();
    n.scalar_offsets[{3, 1, -1}] = -0.25;
    n.scalar_offsets[{2, 0, 4}] = 1e-7;
    const NoiseSpec back = noise_from_json(noise_to_json(n));
    EXPECT_EQ(back.mode, NoiseMode::FixedOffset);
    EXPECT_EQ(back.vector_offsets, n.vector_offsets);
    EXPECT_EQ(back.scalar_offsets, n.scalar_offsets);
}

TEST(NoiseJson, GaussianRoundTripAndDefaults) {
    NoiseSpec n;
    n.seed = 9;
    n.sigma_relpos = 0.1;
    n.sigma_distance = 0.2;
    n.sigma_bearing = 0.3;
    n.sigma_angle = 0.4;
    n.sigma_ratio = 0.5;
    const NoiseSpec back = noise_from_json(noise_to_json(n));
    EXPECT_EQ(back.seed, 9u);
    EXPECT_EQ(back.sigma_relpos, 0.1);
    EXPECT_EQ(back.sigma_distance, 0.2);
    EXPECT_EQ(back.sigma_bearing, 0.3);
    EXPECT_EQ(back.sigma_angle, 0.4);
    EXPECT_EQ(back.sigma_ratio, 0.5);

    const NoiseSpec empty = noise_from_json(Json::object());
    EXPECT_TRUE(empty.is_zero());
    EXPECT_THROW(noise_from_json(Json{{"mode", "uniform"}}), InvalidArgument);
}

TEST(ConstraintsJson, RoundTripPreservesSolution) {
    const Scenario s = mixed_27_node_scenario(2);
    const ConstraintSet set = build_network_constraints(s.network, synthesize_all(s.network), s.policy());
    const ConstraintSet back = constraints_from_json(Json::parse(constraints_to_json(set).dump()));
    ASSERT_EQ(back.displacements.size(), set.displacements.size());
    ASSERT_EQ(back.angles.size(), set.angles.size());
    for (std::size_t k = 0; k < set.displacements.size(); ++k) {
        const auto& a = set.displacements[k];
        const auto& b = back.displacements[k];
        EXPECT_EQ(a.center, b.center);
        EXPECT_EQ(a.neighbors, b.neighbors);
        EXPECT_EQ(a.coeffs, b.coeffs);
        EXPECT_EQ(a.source, b.source);
        EXPECT_EQ(a.branch, b.branch);
    }
    for (std::size_t k = 0; k < set.angles.size(); ++k) {
        EXPECT_EQ(set.angles[k].triple, back.angles[k].triple);
        EXPECT_EQ(set.angles[k].weights, back.angles[k].weights);
    }
    ASSERT_EQ(back.failures.size(), set.failures.size());
    for (std::size_t k = 0; k < set.failures.size(); ++k) EXPECT_EQ(back.failures[k].reason, set.failures[k].reason);

    const Configuration p = s.network.positions();
    const MatX m0 = information_matrix(build_rigidity_matrix(set, p), 4).M;
    const MatX m1 = information_matrix(build_rigidity_matrix(back, p), 4).M;
    EXPECT_EQ(m0, m1);
}

TEST(ConstraintsJson, RejectsMismatchedCoefficients) {
    Json c = {{"center", 4}, {"neighbors", {0, 1, 2}}, {"coeffs", {1.0, 2.0}}};
    EXPECT_THROW(displacement_from_json(c), InvalidArgument);
    c["coeffs"] = {1.0, 2.0, -3.0};
    const DisplacementConstraint d = displacement_from_json(c);
    EXPECT_EQ(d.source, ConstraintSource::Explicit);
    EXPECT_EQ(d.branch, ConstraintBranch::Spatial);
    c["branch"] = "warped";
    EXPECT_THROW(displacement_from_json(c), InvalidArgument);
}

TEST(Files, SaveAndLoadScenario) {
    const auto path = temp_path("scenario.json");
    const Scenario s = mixed_27_node_scenario(9);
    save_scenario(path.string(), s);
    const Scenario back = load_scenario(path.string());
    expect_same_network(s.network, back.network);
    std::filesystem::remove(path);
}

TEST(Files, ReadErrorsAreInvalidArgument) {
    EXPECT_THROW(read_json_file("/nonexistent/mixloc.json"), InvalidArgument);
    const auto path = temp_path("broken.json");
    {
        std::ofstream out(path);
        out << "{ \"nodes\": [";
    }
    EXPECT_THROW(load_scenario(path.string()), InvalidArgument);
    {
        std::ofstream out(path);
        out << "{ \"edges\": [] }";
    }
    EXPECT_THROW(load_scenario(path.string()), InvalidArgument);
    std::filesystem::remove(path);
}

TEST(Summary, KeysAndNulls) {
    Trajectory t;
    t.gamma = 0.5;
    Json j = trajectory_summary(SolveMode::Simultaneous, t);
    EXPECT_EQ(j.at("mode"), "simultaneous");
    EXPECT_TRUE(j.at("converged_at").is_null());
    EXPECT_TRUE(j.at("final_error").is_null());
    EXPECT_EQ(j.at("gamma"), 0.5);

    t.converged_at = 120;
    t.error_norms = {3.0, 1e-9};
    j = trajectory_summary(SolveMode::Direct, t);
    EXPECT_EQ(j.at("converged_at"), 120);
    EXPECT_EQ(j.at("final_error"), 1e-9);
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items()) keys.push_back(k);
    EXPECT_EQ(keys, (std::vector<std::string>{"mode", "converged_at", "final_error", "gamma"}));
}
