#include "mixloc/reference.hpp"

#include <cmath>
#include <sstream>

#include "mixloc/solver.hpp"

namespace mixloc {

namespace {

std::string fmt(double x) {
    std::ostringstream s;
    s.precision(10);
    s << x;
    return s.str();
}

}  // namespace

InformationMatrix seven_node_published_scaling() {
    const Scenario s = seven_node_scenario();
    const MeasurementBook book = synthesize_all(s.network);
    ConstraintSet set = build_network_constraints(s.network, book, s.policy());
    for (auto& c : set.displacements) {
        if (c.center == 6) {
            c.coeffs /= std::abs(*c.coefficient_of(5));
        } else {
            c.coeffs /= std::abs(c.coefficient_sum());
        }
    }
    const RigidityMatrix r = build_rigidity_matrix(set, s.network.positions());
    return information_matrix(r, s.network.anchor_count());
}

NoiseSpec node5_fixed_offsets() {
    NoiseSpec n;
    n.mode = NoiseMode::FixedOffset;
    n.vector_offsets[{4, 0}] = Vec3(-5, -5, -5);
    n.vector_offsets[{4, 1}] = Vec3(6, 7, 8);
    n.vector_offsets[{4, 5}] = Vec3(-3, -4, -4);
    n.vector_offsets[{4, 6}] = Vec3(10, 8, 9);
    return n;
}

ReferenceCheck seven_node_solution_check() {
    ReferenceCheck out;
    out.name = "seven-node direct solve";
    const Scenario s = seven_node_scenario();
    const MeasurementBook book = synthesize_all(s.network);
    const ConstraintSet set = build_network_constraints(s.network, book, s.policy());
    const Configuration p = s.network.positions();
    const InformationMatrix info = information_matrix(build_rigidity_matrix(set, p), 4);
    const Configuration anchors(p.begin(), p.begin() + 4);
    const Configuration pf = direct_solve(info.ff(), info.fa(), anchors);
    const Configuration expected = {Vec3(10, 20, 0), Vec3(10, 40, 0), Vec3(2.5, 30, 30)};
    for (std::size_t f = 0; f < 3; ++f) {
        out.max_error = std::max(out.max_error, (pf[f] - expected[f]).cwiseAbs().maxCoeff());
    }
    out.pass = set.displacements.size() == 3 && out.max_error <= 1e-9;
    out.detail = "max abs error " + fmt(out.max_error);
    return out;
}

ReferenceCheck seven_node_blocks_check() {
    ReferenceCheck out;
    out.name = "seven-node information blocks";
    const InformationMatrix info = seven_node_published_scaling();
    Eigen::Matrix3d ff;
    ff << 1413.0 / 311.0, -61.0 / 24.0, 7.0 / 16.0,
          -61.0 / 24.0, 2.0, -0.5,
          7.0 / 16.0, -0.5, 0.25;
    Eigen::Matrix<double, 3, 4> fa;
    fa << -21.0 / 32.0, 1.5, -19.0 / 9.0, -75.0 / 64.0,
          0.75, 0.0, 2.0 / 3.0, -3.0 / 8.0,
          -3.0 / 8.0, 0.0, 0.0, 3.0 / 16.0;
    const MatX eye = Mat3::Identity();
    const MatX mff = info.ff();
    const MatX mfa = info.fa();
    double rounded_entry = 0.0;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            const MatX block = mff.block<3, 3>(3 * r, 3 * c);
            const double err = (block - ff(r, c) * eye).cwiseAbs().maxCoeff();
            if (r == 0 && c == 0) {
                rounded_entry = err;
            } else {
                out.max_error = std::max(out.max_error, err);
            }
        }
        for (int c = 0; c < 4; ++c) {
            const MatX block = mfa.block<3, 3>(3 * r, 3 * c);
            out.max_error = std::max(out.max_error, (block - fa(r, c) * eye).cwiseAbs().maxCoeff());
        }
    }
    out.pass = out.max_error <= 1e-9 && rounded_entry <= 1e-4;
    out.detail = "max abs error " + fmt(out.max_error) + ", rounded (1,1) entry off by " +
                 fmt(rounded_entry);
    return out;
}

ReferenceCheck noisy_constraint_check() {
    ReferenceCheck out;
    out.name = "noisy relative-position constraint";
    const Scenario s = mixed_27_node_scenario(1);
    MeasurementBook book;
    book[4] = synthesize_measurements(s.network, 4, node5_fixed_offsets());
    const std::vector<NodeId> nbrs = {0, 1, 5, 6};
    DisplacementConstraint c = build_displacement_constraint(book, 4, nbrs);
    c.coeffs /= -c.coeffs(3);
    const double expected[3] = {6201.0 / 61.0, 38449.0 / 380.0, -1103.0 / 551.0};
    for (int k = 0; k < 3; ++k) {
        out.max_error = std::max(out.max_error, std::abs(c.coeffs(k) - expected[k]) / std::abs(expected[k]));
    }
    out.pass = c.center == 4 && out.max_error <= 1e-2;
    out.detail = "coefficients (" + fmt(c.coeffs(0)) + ", " + fmt(c.coeffs(1)) + ", " +
                 fmt(c.coeffs(2)) + ", -1), max relative error " + fmt(out.max_error);
    return out;
}

}  // namespace mixloc
