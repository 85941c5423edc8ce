#pragma once

#include <vector>

#include "mixloc/constraints.hpp"
#include "mixloc/types.hpp"

namespace mixloc {

struct RowTag {
    enum class Kind { Angle, Displacement };
    Kind kind = Kind::Angle;
    int constraint = 0;  // index into the angle or displacement list
    int component = 0;   // identity (0..2) for angles, axis (0..2) for displacements
};

/// m x 3n Jacobian of the stacked constraint functions. Angle rows come
/// first (three per triangle, one per identity), then three rows per
/// displacement constraint.
struct RigidityMatrix {
    MatX matrix;
    std::vector<RowTag> tags;
    int nodes = 0;

    Eigen::Index angle_rows() const;
    Eigen::Index displacement_rows() const;
};

/// Stacked angle identities (one scalar each) followed by displacement
/// residuals (three each), evaluated at `p`.
VecX angle_displacement_value(const std::vector<AngleConstraint>& angles,
                              const std::vector<DisplacementConstraint>& displacements,
                              const Configuration& p);

/// Rows for angle identities are evaluated at the positions of the nodes
/// they touch (anchors in practice); displacement rows depend only on the
/// stored coefficients.
RigidityMatrix build_rigidity_matrix(const std::vector<AngleConstraint>& angles,
                                     const std::vector<DisplacementConstraint>& displacements,
                                     const Configuration& p);

inline RigidityMatrix build_rigidity_matrix(const ConstraintSet& set, const Configuration& p) {
    return build_rigidity_matrix(set.angles, set.displacements, p);
}

struct MotionBasis {
    MatX basis;  // 3n x dimension, orthonormal columns
    int dimension = 0;
    bool reduced() const { return dimension < 7; }
};

/// Translations, rotations about the origin and the scaling p, orthonormalized.
MotionBasis trivial_motion_basis(const Configuration& p, double tol = 1e-9);

struct RigidityReport {
    bool rigid = false;
    int nullity = 0;
    int rank = 0;
    VecX singular_values;
};

/// Numerical nullity of R: singular values below tol * sigma_max count as zero.
RigidityReport is_infinitesimally_rigid(const RigidityMatrix& r, double tol = 1e-9);

/// M = R^T R with anchors (the first n_a nodes) ahead of free nodes.
struct InformationMatrix {
    MatX M;
    int anchors = 0;
    int free = 0;

    auto aa() const { return M.topLeftCorner(3 * anchors, 3 * anchors); }
    auto af() const { return M.topRightCorner(3 * anchors, 3 * free); }
    auto fa() const { return M.bottomLeftCorner(3 * free, 3 * anchors); }
    auto ff() const { return M.bottomRightCorner(3 * free, 3 * free); }
};

InformationMatrix information_matrix(const RigidityMatrix& r, int anchors);

struct Spectrum {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
};

/// Extreme eigenvalues of a symmetric matrix (zeros for an empty one).
Spectrum symmetric_spectrum(const MatX& m);

/// Largest singular value.
double spectral_norm(const MatX& m);

bool check_localizable(const MatX& mff, double tol = 1e-10);

struct NoiseMargin {
    bool ok = false;
    double ratio = 0.0;  // ||dM_ff|| / lambda_min(M_ff)
    double delta_norm = 0.0;
    double lambda_min = 0.0;
};

NoiseMargin noise_margin_ok(const MatX& mff_clean, const MatX& mff_noisy);

struct ErrorBound {
    double u = 0.0;
    Vec3 origin = Vec3::Zero();
    int iterations = 0;
};

struct WeiszfeldOptions {
    double guard = 1e-12;
    double step_tol = 1e-10;
    int max_iters = 10000;
};

/// Minimizes sum_i w_i ||x_i - y|| over y. Returns the minimizer and the
/// iteration count.
std::pair<Vec3, int> weiszfeld(const std::vector<Vec3>& points, const std::vector<double>& weights,
                               const WeiszfeldOptions& opts = {});

/// Error bound on the noisy fixed point: the anchor/free weighted distance
/// sum minimized over the frame origin, divided by
/// ||I + M_ff^-1 dM_ff|| ||M_ff||. Throws BoundUnavailable when
/// ||dM_ff|| >= lambda_min(M_ff).
ErrorBound error_bound(const MatX& mff, const MatX& dmff, const MatX& dmfa, const Configuration& p,
                       int anchors, const WeiszfeldOptions& opts = {});

}  // namespace mixloc
