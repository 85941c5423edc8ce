#include "mixloc/rigidity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace mixloc {

Eigen::Index RigidityMatrix::angle_rows() const {
    return std::count_if(tags.begin(), tags.end(),
                         [](const RowTag& t) { return t.kind == RowTag::Kind::Angle; });
}

Eigen::Index RigidityMatrix::displacement_rows() const {
    return static_cast<Eigen::Index>(tags.size()) - angle_rows();
}

namespace {

void check_members(const std::vector<NodeId>& ids, int n) {
    for (NodeId id : ids) {
        if (id < 0 || id >= n) {
            throw InvalidArgument("constraint references node " + std::to_string(id) +
                                  " outside the configuration");
        }
    }
}

const Vec3& at(const Configuration& p, NodeId id) { return p[static_cast<std::size_t>(id)]; }

}  // namespace

VecX angle_displacement_value(const std::vector<AngleConstraint>& angles,
                              const std::vector<DisplacementConstraint>& displacements,
                              const Configuration& p) {
    const int n = static_cast<int>(p.size());
    VecX out(static_cast<Eigen::Index>(3 * angles.size() + 3 * displacements.size()));
    Eigen::Index row = 0;
    for (const auto& a : angles) {
        check_members({a.triple.begin(), a.triple.end()}, n);
        for (int t = 0; t < 3; ++t) out(row++) = a.residual(t, p);
    }
    for (const auto& d : displacements) {
        check_members(d.members(), n);
        out.segment<3>(row) = d.residual(p);
        row += 3;
    }
    return out;
}

RigidityMatrix build_rigidity_matrix(const std::vector<AngleConstraint>& angles,
                                     const std::vector<DisplacementConstraint>& displacements,
                                     const Configuration& p) {
    const int n = static_cast<int>(p.size());
    RigidityMatrix r;
    r.nodes = n;
    r.matrix = MatX::Zero(static_cast<Eigen::Index>(3 * angles.size() + 3 * displacements.size()),
                          3 * n);
    Eigen::Index row = 0;
    for (std::size_t c = 0; c < angles.size(); ++c) {
        const auto& ang = angles[c];
        check_members({ang.triple.begin(), ang.triple.end()}, n);
        for (int t = 0; t < 3; ++t) {
            const auto [a, b, cc] = ang.nodes(t);
            const auto [w1, w2] = ang.weights[static_cast<std::size_t>(t)];
            const Vec3 &pa = at(p, a), &pb = at(p, b), &pc = at(p, cc);
            // Gradient of w1 (pb-pa).(pc-pa) + w2 (pa-pb).(pc-pb).
            r.matrix.block<1, 3>(row, 3 * a) += (w1 * (2 * pa - pb - pc) + w2 * (pc - pb)).transpose();
            r.matrix.block<1, 3>(row, 3 * b) += (w1 * (pc - pa) + w2 * (2 * pb - pa - pc)).transpose();
            r.matrix.block<1, 3>(row, 3 * cc) += (w1 * (pb - pa) + w2 * (pa - pb)).transpose();
            r.tags.push_back({RowTag::Kind::Angle, static_cast<int>(c), t});
            ++row;
        }
    }
    for (std::size_t c = 0; c < displacements.size(); ++c) {
        const auto& d = displacements[c];
        check_members(d.members(), n);
        const Mat3 eye = Mat3::Identity();
        r.matrix.block<3, 3>(row, 3 * d.center) -= d.coefficient_sum() * eye;
        for (std::size_t e = 0; e < d.neighbors.size(); ++e) {
            r.matrix.block<3, 3>(row, 3 * d.neighbors[e]) +=
                d.coeffs(static_cast<Eigen::Index>(e)) * eye;
        }
        for (int axis = 0; axis < 3; ++axis) {
            r.tags.push_back({RowTag::Kind::Displacement, static_cast<int>(c), axis});
        }
        row += 3;
    }
    return r;
}

MotionBasis trivial_motion_basis(const Configuration& p, double tol) {
    const auto n = static_cast<Eigen::Index>(p.size());
    if (n < 3) {
        throw InvalidArgument("trivial_motion_basis: need at least three nodes");
    }
    MatX gen = MatX::Zero(3 * n, 7);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vec3& x = p[static_cast<std::size_t>(i)];
        gen.block<3, 3>(3 * i, 0).setIdentity();
        // (I_n (x) A) p for the skew generators of rotations about x, y, z.
        gen.block<3, 1>(3 * i, 3) = Vec3(0.0, -x.z(), x.y());
        gen.block<3, 1>(3 * i, 4) = Vec3(x.z(), 0.0, -x.x());
        gen.block<3, 1>(3 * i, 5) = Vec3(-x.y(), x.x(), 0.0);
        gen.block<3, 1>(3 * i, 6) = x;
    }
    // Put generators on a common scale before judging rank.
    for (Eigen::Index c = 0; c < 7; ++c) {
        const double norm = gen.col(c).norm();
        if (norm > 0.0) gen.col(c) /= norm;
    }
    Eigen::JacobiSVD<MatX> svd(gen, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    int dim = 0;
    for (Eigen::Index c = 0; c < s.size(); ++c) {
        if (s(c) > tol * s(0)) ++dim;
    }
    if (dim == 0) {
        throw DegenerateInput("trivial_motion_basis: all nodes collocated");
    }
    return {svd.matrixU().leftCols(dim), dim};
}

RigidityReport is_infinitesimally_rigid(const RigidityMatrix& r, double tol) {
    RigidityReport out;
    const Eigen::Index cols = r.matrix.cols();
    if (r.matrix.rows() == 0) {
        out.nullity = static_cast<int>(cols);
        out.rigid = out.nullity == 7;
        return out;
    }
    Eigen::BDCSVD<MatX> svd(r.matrix);
    out.singular_values = svd.singularValues();
    const double top = out.singular_values.size() > 0 ? out.singular_values(0) : 0.0;
    for (Eigen::Index c = 0; c < out.singular_values.size(); ++c) {
        if (top > 0.0 && out.singular_values(c) > tol * top) ++out.rank;
    }
    out.nullity = static_cast<int>(cols) - out.rank;
    out.rigid = out.nullity == 7;
    return out;
}

InformationMatrix information_matrix(const RigidityMatrix& r, int anchors) {
    if (anchors < 0 || anchors > r.nodes) {
        throw InvalidArgument("information_matrix: anchor count out of range");
    }
    InformationMatrix out;
    out.M = r.matrix.transpose() * r.matrix;
    out.M = 0.5 * (out.M + out.M.transpose()).eval();
    out.anchors = anchors;
    out.free = r.nodes - anchors;
    return out;
}

Spectrum symmetric_spectrum(const MatX& m) {
    if (m.size() == 0) return {};
    Eigen::SelfAdjointEigenSolver<MatX> eig(m, Eigen::EigenvaluesOnly);
    return {eig.eigenvalues()(0), eig.eigenvalues()(eig.eigenvalues().size() - 1)};
}

double spectral_norm(const MatX& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<MatX> svd(m);
    return svd.singularValues()(0);
}

bool check_localizable(const MatX& mff, double tol) {
    if (mff.rows() == 0 || mff.rows() != mff.cols()) {
        throw InvalidArgument("check_localizable: expected a non-empty square matrix");
    }
    const Spectrum s = symmetric_spectrum(mff);
    return s.lambda_max > 0.0 && s.lambda_min > tol * s.lambda_max;
}

NoiseMargin noise_margin_ok(const MatX& mff_clean, const MatX& mff_noisy) {
    if (mff_clean.rows() != mff_noisy.rows() || mff_clean.cols() != mff_noisy.cols()) {
        throw InvalidArgument("noise_margin_ok: shape mismatch");
    }
    NoiseMargin out;
    out.delta_norm = spectral_norm(mff_noisy - mff_clean);
    out.lambda_min = symmetric_spectrum(mff_clean).lambda_min;
    if (out.lambda_min > 0.0) {
        out.ratio = out.delta_norm / out.lambda_min;
        out.ok = out.ratio < 1.0;
    } else {
        out.ratio = std::numeric_limits<double>::infinity();
        out.ok = false;
    }
    return out;
}

std::pair<Vec3, int> weiszfeld(const std::vector<Vec3>& points, const std::vector<double>& weights,
                               const WeiszfeldOptions& opts) {
    if (points.empty() || points.size() != weights.size()) {
        throw InvalidArgument("weiszfeld: need matching, non-empty points and weights");
    }
    double total = 0.0;
    Vec3 y = Vec3::Zero();
    for (std::size_t a = 0; a < points.size(); ++a) {
        if (weights[a] < 0.0) throw InvalidArgument("weiszfeld: negative weight");
        total += weights[a];
        y += weights[a] * points[a];
    }
    if (total <= 0.0) {
        Vec3 mean = Vec3::Zero();
        for (const auto& x : points) mean += x;
        return {mean / static_cast<double>(points.size()), 0};
    }
    y /= total;
    double scale = 0.0;
    for (const auto& x : points) scale = std::max(scale, (x - y).norm());
    scale = std::max(scale, 1e-300);

    int it = 0;
    for (; it < opts.max_iters; ++it) {
        Vec3 num = Vec3::Zero();
        double den = 0.0;
        for (std::size_t a = 0; a < points.size(); ++a) {
            const double d = std::max((points[a] - y).norm(), opts.guard * scale);
            num += weights[a] / d * points[a];
            den += weights[a] / d;
        }
        const Vec3 next = num / den;
        const double step = (next - y).norm();
        y = next;
        if (step < opts.step_tol * scale) {
            ++it;
            break;
        }
    }
    return {y, it};
}

ErrorBound error_bound(const MatX& mff, const MatX& dmff, const MatX& dmfa, const Configuration& p,
                       int anchors, const WeiszfeldOptions& opts) {
    const auto nf = static_cast<Eigen::Index>(p.size()) - anchors;
    if (anchors < 0 || nf < 1 || mff.rows() != 3 * nf || dmff.rows() != 3 * nf ||
        dmfa.rows() != 3 * nf || dmfa.cols() != 3 * anchors) {
        throw InvalidArgument("error_bound: block shapes do not match the configuration");
    }
    const NoiseMargin margin = noise_margin_ok(mff, mff + dmff);
    if (!margin.ok) {
        throw BoundUnavailable("error_bound: ||dM_ff|| = " + std::to_string(margin.delta_norm) +
                               " is not below lambda_min(M_ff) = " +
                               std::to_string(margin.lambda_min));
    }
    const double w_anchor = spectral_norm(dmfa);
    const double w_free = margin.delta_norm;
    std::vector<double> weights(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        weights[i] = static_cast<int>(i) < anchors ? w_anchor : w_free;
    }
    const auto [origin, iters] = weiszfeld(p, weights, opts);
    double numerator = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) numerator += weights[i] * (p[i] - origin).norm();

    const MatX eye = MatX::Identity(mff.rows(), mff.cols());
    const MatX amplified = eye + mff.ldlt().solve(dmff);
    const double denominator = spectral_norm(amplified) * spectral_norm(mff);
    ErrorBound out;
    out.u = numerator / denominator;
    out.origin = origin;
    out.iterations = iters;
    return out;
}

}  // namespace mixloc
