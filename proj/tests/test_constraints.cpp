#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "mixloc/constraints.hpp"
#include "mixloc/scenario.hpp"
#include "test_support.hpp"

using namespace mixloc;
using namespace mixloc::testing;

namespace {

const std::vector<NodeId> kNbrs = {1, 2, 3, 4};

double residual_over_scale(const DisplacementConstraint& c, const Configuration& p) {
    double scale = 0.0;
    for (NodeId j : c.neighbors) scale = std::max(scale, (p[static_cast<std::size_t>(j)] - p[static_cast<std::size_t>(c.center)]).norm());
    return c.residual(p).norm() / (scale * c.coeffs.cwiseAbs().maxCoeff());
}

Configuration scaled(const Configuration& p, double a) {
    Configuration q = p;
    for (Vec3& x : q) x *= a;
    return q;
}

// Centre 0 plus four coplanar neighbors whose first three span a triangle.
Configuration coplanar_clique(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-30.0, 30.0);
    for (;;) {
        const Vec3 o = random_point(rng), e1 = random_point(rng).normalized();
        const Vec3 e2 = e1.cross(random_point(rng)).normalized();
        Configuration q = {random_point(rng)};
        for (int a = 0; a < 4; ++a) q.push_back(o + u(rng) * e1 + u(rng) * e2);
        if (spread_ratio({q[1], q[2], q[3]}) > 0.1 && spread_ratio({q[0], q[1], q[2], q[3]}) > 0.05) return q;
    }
}

Configuration colinear_clique(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-30.0, 30.0);
    for (;;) {
        const Vec3 o = random_point(rng), e = random_point(rng).normalized();
        Configuration q = {random_point(rng), o + u(rng) * e, o + u(rng) * e, o + u(rng) * e, random_point(rng)};
        bool apart = true;
        for (std::size_t a = 1; a < 4; ++a)
            for (std::size_t b = a + 1; b < 4; ++b) apart = apart && (q[a] - q[b]).norm() > 3.0;
        if (apart && spread_ratio({q[1], q[2], q[0]}) > 0.05) return q;
    }
}

}  // namespace

TEST(AngleConstraints, AnalogAnchorTriangle) {
    // (-200,-200,0), (200,-200,0), (200,200,0): right angle at the second node
    const Configuration p = {Vec3(-200, -200, 0), Vec3(200, -200, 0), Vec3(200, 200, 0)};
    const AngleConstraint c = make_angle_constraint(p, 0, 1, 2);
    // identity (i,k,j): e13.e12 - e31.e32 = 0 up to a common factor
    EXPECT_NEAR(c.weights[0].second / c.weights[0].first, -1.0, 1e-12);
    // identity (i,j,k): the right angle at j leaves e21.e23 = 0
    EXPECT_EQ(c.weights[1], std::make_pair(0.0, 1.0));
    for (int t = 0; t < 3; ++t) EXPECT_NEAR(c.residual(t, p), 0.0, 1e-9 * 400.0 * 400.0);
}

TEST(AngleConstraints, RightAngleAtFirstApex) {
    EXPECT_EQ(angle_weights(0.0, 3.0, 1.0), std::make_pair(1.0, 0.0));
    EXPECT_EQ(angle_weights(3.0, 0.0, 1.0), std::make_pair(0.0, 1.0));
    EXPECT_THROW(angle_weights(0.0, 0.0, 1.0), InvalidArgument);
}

TEST(AngleConstraints, EquilateralWeights) {
    const Configuration p = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0.5, std::sqrt(3.0) / 2, 0)};
    const AngleConstraint c = make_angle_constraint(p, 0, 1, 2);
    for (int t = 0; t < 3; ++t) {
        EXPECT_NEAR(c.weights[static_cast<std::size_t>(t)].first, 2.0, 1e-12);
        EXPECT_NEAR(c.weights[static_cast<std::size_t>(t)].second, -2.0, 1e-12);
    }
}

TEST(AngleConstraints, VanishAtTrueConfiguration) {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 100; ++t) {
        const Configuration p = random_points(rng, 3);
        const AngleConstraint c = make_angle_constraint(p, 0, 1, 2);
        double scale = 0.0;
        for (const Vec3& a : p)
            for (const Vec3& b : p) scale = std::max(scale, (a - b).squaredNorm());
        for (int id = 0; id < 3; ++id) {
            const auto w = c.weights[static_cast<std::size_t>(id)];
            EXPECT_GT(w.first * w.first + w.second * w.second, 0.0);
            EXPECT_LE(std::abs(c.residual(id, p)), 1e-9 * scale);
        }
    }
}

TEST(AngleConstraints, CollocatedAnchorsRejected) {
    const Configuration p = {Vec3(0, 0, 0), Vec3(0, 0, 0), Vec3(1, 0, 0)};
    EXPECT_THROW(make_angle_constraint(p, 0, 1, 2), InvalidArgument);
}

TEST(AngleConstraints, OnePerAnchorTriangle) {
    const Network net = seven_node_scenario().network;
    // four mutually adjacent anchors form four triangles
    EXPECT_EQ(anchor_angle_constraints(net).size(), 4u);
}

TEST(ColinearConstraint, PublishedCoefficients) {
    // j, k, h at x = 0, 1, 3
    const std::vector<NodeId> nbrs = {1, 2, 3, 4};
    const DisplacementConstraint c = colinear_constraint(1.0, 2.0, 3.0, 0, nbrs);
    VecX expected(4);
    expected << -1.0, 1.5, -0.5, 0.0;
    expected /= -expected.norm();  // first entry positive after normalization
    EXPECT_LE((c.coeffs - expected).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(c.branch, ConstraintBranch::Colinear);
}

TEST(ColinearConstraint, IntegerPointsToRounding) {
    // unit-norm scaling makes the coefficients irrational, so exact up to rounding
    const Configuration p = {Vec3(5, 5, 5), Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(3, 0, 0), Vec3(0, 7, 0)};
    const std::vector<NodeId> nbrs = {1, 2, 3, 4};
    const DisplacementConstraint c = colinear_constraint(1.0, 2.0, 3.0, 0, nbrs);
    EXPECT_LE(c.residual(p).norm(), 4 * std::numeric_limits<double>::epsilon());
}

TEST(ColinearConstraint, RandomColinearTriples) {
    std::mt19937_64 rng(32);
    for (int t = 0; t < 100; ++t) {
        const Configuration q = colinear_clique(rng);
        const std::vector<NodeId> nbrs = {1, 2, 3, 4};
        const DisplacementConstraint c =
            colinear_constraint((q[1] - q[2]).norm(), (q[2] - q[3]).norm(), (q[1] - q[3]).norm(), 0, nbrs);
        EXPECT_LE(c.residual(q).norm(), 1e-10 * 100.0);
    }
}

TEST(ColinearConstraint, NonColinearRejected) {
    const std::vector<NodeId> nbrs = {1, 2, 3};
    EXPECT_THROW(colinear_constraint(1.0, 1.0, 1.0, 0, nbrs), PreconditionError);
}

TEST(DistanceMatrixConstraint, GenericPointsTakeSpatialBranch) {
    std::mt19937_64 rng(33);
    for (int t = 0; t < 100; ++t) {
        const Configuration q = generic_points(rng, 5);
        const DisplacementConstraint c =
            displacement_from_distance_matrix(RatioMatrix::from_positions({0, 1, 2, 3, 4}, q));
        EXPECT_EQ(c.branch, ConstraintBranch::Spatial);
        EXPECT_LE(residual_over_scale(c, q), 1e-8);
        EXPECT_NEAR(c.coeffs.norm(), 1.0, 1e-12);
    }
}

TEST(DistanceMatrixConstraint, RawAndRatioMatricesAgree) {
    std::mt19937_64 rng(34);
    for (int t = 0; t < 20; ++t) {
        const Configuration q = generic_points(rng, 5);
        const MatX d2 = squared_distances(q);
        RatioMatrix raw;  // unnormalized squared distances
        raw.labels = {0, 1, 2, 3, 4};
        raw.entries = d2;
        const auto a = displacement_from_distance_matrix(raw);
        const auto b = displacement_from_distance_matrix(RatioMatrix::from_positions({0, 1, 2, 3, 4}, q));
        EXPECT_LE((a.coeffs - b.coeffs).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(DistanceMatrixConstraint, CoplanarNeighborsTakePlanarBranch) {
    std::mt19937_64 rng(35);
    for (int t = 0; t < 50; ++t) {
        const Configuration q = coplanar_clique(rng);
        const DisplacementConstraint c =
            displacement_from_distance_matrix(RatioMatrix::from_positions({0, 1, 2, 3, 4}, q));
        EXPECT_EQ(c.branch, ConstraintBranch::Planar);
        // l is expressed through j, k, h, so the barycentric weights sum to one
        // and the centre's net coefficient vanishes
        EXPECT_NEAR(c.coefficient_sum(), 0.0, 1e-9);
        EXPECT_LE(residual_over_scale(c, q), 1e-8);
    }
}

TEST(DistanceMatrixConstraint, ColinearNeighborsTakeColinearBranch) {
    std::mt19937_64 rng(36);
    for (int t = 0; t < 50; ++t) {
        const Configuration q = colinear_clique(rng);
        const DisplacementConstraint c =
            displacement_from_distance_matrix(RatioMatrix::from_positions({0, 1, 2, 3, 4}, q));
        EXPECT_EQ(c.branch, ConstraintBranch::Colinear);
        EXPECT_LE(residual_over_scale(c, q), 1e-8);
    }
}

TEST(DistanceMatrixConstraint, ThreeAndTwoNeighborPaths) {
    // centre inside a triangle, then centre on a segment
    const Configuration tri = {Vec3(1, 1, 0), Vec3(0, 0, 0), Vec3(4, 0, 0), Vec3(0, 4, 0)};
    const auto c3 = displacement_from_distance_matrix(RatioMatrix::from_positions({0, 1, 2, 3}, tri));
    EXPECT_EQ(c3.branch, ConstraintBranch::Planar);
    EXPECT_LE(c3.residual(tri).norm(), 1e-12);
    const Configuration seg = {Vec3(3, 0, 0), Vec3(0, 0, 0), Vec3(2, 0, 0)};
    const auto c2 = displacement_from_distance_matrix(RatioMatrix::from_positions({0, 1, 2}, seg));
    EXPECT_EQ(c2.branch, ConstraintBranch::Colinear);
    EXPECT_LE(c2.residual(seg).norm(), 1e-12);
    const Configuration off = {Vec3(1, 1, 1), Vec3(0, 0, 0), Vec3(4, 0, 0), Vec3(0, 4, 0)};
    EXPECT_THROW(displacement_from_distance_matrix(RatioMatrix::from_positions({0, 1, 2, 3}, off)),
                 DegenerateInput);
}

TEST(DistanceMatrixConstraint, NonEuclideanMatrixRejected) {
    MatX d = MatX::Ones(5, 5) - MatX::Identity(5, 5);
    d(0, 4) = d(4, 0) = 50.0;
    EXPECT_THROW(displacement_from_distance_matrix(RatioMatrix::from_squared_distances({0, 1, 2, 3, 4}, d)),
                 RealizabilityError);
}

TEST(TriangleRatios, ThirtySixtyNinety) {
    // angle 90 at node 0, 60 at node 1
    std::mt19937_64 rng(37);
    const Configuration p = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, std::sqrt(3.0), 0)};
    const Network net = clique_network(p, {Sensor::Angle, Sensor::Angle, Sensor::Distance}, rng);
    MeasurementBook book;
    book[0] = synthesize_measurements(net, 0);
    book[1] = synthesize_measurements(net, 1);
    const auto [r1, r2] = triangle_ratios(book, 0, 1, 2);
    EXPECT_NEAR(r1, std::sqrt(3.0), 1e-12);
    EXPECT_NEAR(r2, 2.0, 1e-12);
}

TEST(TriangleRatios, BearingPairMatchesTruth) {
    std::mt19937_64 rng(38);
    for (int t = 0; t < 100; ++t) {
        const Configuration p = random_points(rng, 3);
        if (spread_ratio(p) < 0.05) continue;
        const Network net = clique_network(p, {Sensor::Bearing, Sensor::Bearing, Sensor::Angle}, rng);
        MeasurementBook book;
        book[0] = synthesize_measurements(net, 0);
        book[1] = synthesize_measurements(net, 1);
        const auto [r1, r2] = triangle_ratios(book, 0, 1, 2);
        const double d01 = (p[1] - p[0]).norm();
        EXPECT_NEAR(r1, (p[2] - p[0]).norm() / d01, 1e-9 * r1);
        EXPECT_NEAR(r2, (p[2] - p[1]).norm() / d01, 1e-9 * r2);
    }
}

TEST(TriangleRatios, DistanceAndRatioSensors) {
    std::mt19937_64 rng(39);
    const Configuration p = {Vec3(0, 0, 0), Vec3(3, 0, 0), Vec3(0, 4, 0)};
    const Network net = clique_network(p, {Sensor::Distance, Sensor::RatioOfDistance, Sensor::Angle}, rng);
    MeasurementBook book;
    book[0] = synthesize_measurements(net, 0);
    book[1] = synthesize_measurements(net, 1);
    const auto [r1, r2] = triangle_ratios(book, 0, 1, 2);
    EXPECT_NEAR(r1, 4.0 / 3.0, 1e-15);
    EXPECT_NEAR(r2, 5.0 / 3.0, 1e-15);
}

TEST(TriangleRatios, OneAngleIsNotEnough) {
    std::mt19937_64 rng(40);
    const Network net = clique_network(random_points(rng, 3), {Sensor::Angle}, rng);
    MeasurementBook book;
    book[0] = synthesize_measurements(net, 0);
    EXPECT_THROW(triangle_ratios(book, 0, 1, 2), InsufficientMeasurements);
}

TEST(RatioMatrix, RegularTetrahedronIsAllOnes) {
    std::mt19937_64 rng(41);
    const Configuration p = {Vec3(1, 1, 1), Vec3(1, -1, -1), Vec3(-1, 1, -1), Vec3(-1, -1, 1)};
    const Network net = clique_network(p, {Sensor::Angle}, rng);
    const std::vector<NodeId> labels = {0, 1, 2, 3};
    const RatioMatrix r = build_ratio_matrix(synthesize_all(net), labels);
    EXPECT_LE(max_abs(r.entries - (MatX::Ones(4, 4) - MatX::Identity(4, 4))), 1e-12);
}

TEST(RatioMatrix, AllDistanceIsExact) {
    std::mt19937_64 rng(42);
    const Configuration p = random_points(rng, 5);
    const Network net = clique_network(p, {Sensor::Distance}, rng);
    const std::vector<NodeId> labels = {0, 1, 2, 3, 4};
    const RatioMatrix r = build_ratio_matrix(synthesize_all(net), labels);
    const MatX d2 = squared_distances(p);
    EXPECT_LE(max_abs(r.entries - d2 / d2(0, 1)), 1e-12 * max_abs(d2 / d2(0, 1)));
    EXPECT_EQ(r.entries(0, 1), 1.0);
}

TEST(RatioMatrix, AllBearingMatchesTruth) {
    std::mt19937_64 rng(43);
    for (int t = 0; t < 50; ++t) {
        const Configuration p = generic_points(rng, 5);
        const Network net = clique_network(p, {Sensor::Bearing}, rng);
        const std::vector<NodeId> labels = {0, 1, 2, 3, 4};
        const RatioMatrix r = build_ratio_matrix(synthesize_all(net), labels);
        const MatX d2 = squared_distances(p);
        EXPECT_LE(max_abs(r.entries - d2 / d2(0, 1)), 1e-8 * max_abs(d2 / d2(0, 1)));
    }
}

TEST(RatioMatrix, InvariantsEnforced) {
    EXPECT_THROW(RatioMatrix::from_squared_distances({0, 1}, MatX::Zero(2, 2)), InvalidArgument);
    MatX d = MatX::Ones(3, 3) - MatX::Identity(3, 3);
    d(0, 1) = d(1, 0) = 0.0;
    EXPECT_THROW(RatioMatrix::from_squared_distances({0, 1, 2}, d), InvalidArgument);
}

TEST(BuildConstraint, RelPosNodeOnSegment) {
    // node 4 sits midway between nodes 0 and 1 and measures relative positions
    const Scenario s = mixed_27_node_scenario(1);
    const std::vector<NodeId> nbrs = {0, 1, 5, 6};
    const DisplacementConstraint c = build_displacement_constraint(synthesize_all(s.network), 4, nbrs);
    EXPECT_EQ(c.source, ConstraintSource::RelPos);
    EXPECT_EQ(c.center, 4);
    EXPECT_NEAR(c.coeffs(0), std::sqrt(0.5), 1e-9);
    EXPECT_NEAR(c.coeffs(1), std::sqrt(0.5), 1e-9);
    EXPECT_NEAR(c.coeffs(2), 0.0, 1e-9);
    EXPECT_NEAR(c.coeffs(3), 0.0, 1e-9);
}

TEST(BuildConstraint, RelPosNeighborCentresTheConstraint) {
    std::mt19937_64 rng(44);
    for (int t = 0; t < 50; ++t) {
        const Configuration p = generic_points(rng, 5);
        const Network net = clique_network(
            p, {Sensor::Distance, Sensor::Angle, Sensor::RelPos, Sensor::Bearing, Sensor::Angle}, rng);
        const DisplacementConstraint c = build_displacement_constraint(synthesize_all(net), 0, kNbrs);
        EXPECT_EQ(c.source, ConstraintSource::NeighborRelPos);
        EXPECT_EQ(c.center, 2);
        EXPECT_TRUE(c.involves(0));
        EXPECT_LE(residual_over_scale(c, p), 1e-8);
    }
}

TEST(BuildConstraint, AllAngleCliqueUsesRatioMatrix) {
    std::mt19937_64 rng(45);
    for (int t = 0; t < 50; ++t) {
        const Configuration p = generic_points(rng, 5);
        const Network net = clique_network(p, {Sensor::Angle}, rng);
        const DisplacementConstraint c = build_displacement_constraint(synthesize_all(net), 0, kNbrs);
        EXPECT_EQ(c.source, ConstraintSource::RatioMatrix);
        EXPECT_LE(residual_over_scale(c, p), 1e-8);
    }
}

TEST(BuildConstraint, ScaleInvariantOnEveryPath) {
    std::mt19937_64 rng(46);
    const std::vector<std::vector<Sensor>> mixes = {
        {Sensor::RelPos}, {Sensor::Distance, Sensor::Bearing, Sensor::RelPos}, {Sensor::Angle},
        {Sensor::RatioOfDistance}, {Sensor::Bearing}, {Sensor::Distance}};
    for (const auto& mix : mixes) {
        for (const Configuration& p : {generic_points(rng, 5), coplanar_clique(rng), colinear_clique(rng)}) {
            std::mt19937_64 frames(7);
            const Network a = clique_network(p, mix, frames);
            frames.seed(7);
            const Network b = clique_network(scaled(p, 3.7), mix, frames);
            const auto ca = build_displacement_constraint(synthesize_all(a), 0, kNbrs);
            const auto cb = build_displacement_constraint(synthesize_all(b), 0, kNbrs);
            EXPECT_EQ(ca.center, cb.center);
            EXPECT_LE((ca.coeffs - cb.coeffs).cwiseAbs().maxCoeff(), 1e-9);
        }
    }
}

TEST(BuildConstraint, FrameInvariant) {
    std::mt19937_64 rng(47);
    for (const auto& mix : std::vector<std::vector<Sensor>>{{Sensor::RelPos}, {Sensor::Bearing}, {Sensor::Angle}}) {
        const Configuration p = generic_points(rng, 5);
        const auto ca = build_displacement_constraint(synthesize_all(clique_network(p, mix, rng)), 0, kNbrs);
        const auto cb = build_displacement_constraint(synthesize_all(clique_network(p, mix, rng)), 0, kNbrs);
        EXPECT_LE((ca.coeffs - cb.coeffs).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(BuildConstraint, DispatchReachesExactlyOneBranch) {
    std::mt19937_64 rng(48);
    int seen[3] = {0, 0, 0};
    for (int t = 0; t < 60; ++t) {
        const Configuration p = t % 3 == 0 ? generic_points(rng, 5) : t % 3 == 1 ? coplanar_clique(rng) : colinear_clique(rng);
        const Network net = clique_network(p, {Sensor::Distance}, rng);
        const auto c = build_displacement_constraint(synthesize_all(net), 0, kNbrs);
        ++seen[static_cast<int>(c.branch)];
        EXPECT_EQ(static_cast<int>(c.branch), t % 3);
    }
    EXPECT_EQ(seen[0], 20);
    EXPECT_EQ(seen[1], 20);
    EXPECT_EQ(seen[2], 20);
}

TEST(BuildConstraint, MissingMeasurementsReported) {
    std::mt19937_64 rng(49);
    const Network net = clique_network(generic_points(rng, 5), {Sensor::Angle}, rng);
    MeasurementBook book;
    book[0] = synthesize_measurements(net, 0);
    EXPECT_THROW(build_displacement_constraint(book, 0, kNbrs), InsufficientMeasurements);
    EXPECT_THROW(build_displacement_constraint(MeasurementBook{}, 0, kNbrs), InsufficientMeasurements);
    const std::vector<NodeId> one = {1};
    EXPECT_THROW(build_displacement_constraint(synthesize_all(net), 0, one), InvalidArgument);
}

TEST(NetworkConstraints, SevenNodeExample) {
    const Scenario s = seven_node_scenario();
    const ConstraintSet set = build_network_constraints(s.network, synthesize_all(s.network), s.policy());
    ASSERT_EQ(set.displacements.size(), 3u);
    EXPECT_TRUE(set.failures.empty());
    // third free node: -(3/4) e_a1 + (3/8) e_a4 + (7/8) e_f1 - e_f2 = 0
    const DisplacementConstraint& c = set.displacements[2];
    EXPECT_EQ(c.center, 6);
    EXPECT_EQ(c.neighbors, (std::vector<NodeId>{0, 3, 4, 5}));
    Eigen::Vector4d printed(-0.75, 0.375, 0.875, -1.0);
    printed /= -printed.norm();
    EXPECT_LE((c.coeffs - printed).cwiseAbs().maxCoeff(), 1e-12);
    const Configuration p = s.network.positions();
    for (const auto& d : set.displacements) EXPECT_LE(d.residual(p).norm(), 1e-10);
}

TEST(NetworkConstraints, DefaultScanUsesOnlyCliques) {
    RandomNetworkOptions o;
    o.free = 12;
    o.seed = 3;
    const Scenario s = random_scenario(o);
    const ConstraintSet set = build_network_constraints(s.network, synthesize_all(s.network));
    ASSERT_FALSE(set.displacements.empty());
    for (const auto& c : set.displacements) {
        const std::vector<NodeId> m = c.members();
        for (std::size_t a = 0; a < m.size(); ++a)
            for (std::size_t b = a + 1; b < m.size(); ++b) EXPECT_TRUE(s.network.adjacent(m[a], m[b]));
    }
}

TEST(NetworkConstraints, CapAndDeduplication) {
    RandomNetworkOptions o;
    o.free = 12;
    o.seed = 4;
    o.mix = SensorMix::AllDistance;
    const Scenario s = random_scenario(o);
    ConstraintPolicy policy;
    policy.max_per_node = 1;
    const MeasurementBook book = synthesize_all(s.network);
    for (NodeId i = s.network.anchor_count(); i < s.network.size(); ++i)
        EXPECT_LE(build_node_constraints(s.network, book, i, policy, nullptr).size(), 1u);

    std::vector<DisplacementConstraint> list;
    DisplacementConstraint c;
    c.center = 5;
    c.neighbors = {1, 2, 3};
    c.coeffs = Eigen::Vector3d(1, 2, 3);
    EXPECT_TRUE(add_unique(list, c));
    c.neighbors = {3, 1, 2};
    EXPECT_FALSE(add_unique(list, c));
    EXPECT_EQ(list.size(), 1u);
}

TEST(ConstraintNames, RoundTrip) {
    for (auto s : {ConstraintSource::RelPos, ConstraintSource::NeighborRelPos, ConstraintSource::RatioMatrix,
                   ConstraintSource::Explicit})
        EXPECT_EQ(source_from_string(to_string(s)), s);
    for (auto b : {ConstraintBranch::Spatial, ConstraintBranch::Planar, ConstraintBranch::Colinear})
        EXPECT_EQ(branch_from_string(to_string(b)), b);
    EXPECT_STREQ(to_string(ConstraintBranch::Spatial), "3d");
    EXPECT_THROW(branch_from_string("4d"), InvalidArgument);
}
