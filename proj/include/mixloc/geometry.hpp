#pragma once

// Distance-geometry primitives: Cayley-Menger volumes and areas, congruent
// embedding of a squared-distance matrix, null-space coefficients and
// barycentric coordinates. Everything here is header-only and templated on
// the scalar type.
//
// Squared-distance matrices are used throughout: entry (a, b) holds d_ab^2,
// or d_ab^2 / d_ref^2 for a ratio matrix. Both give identical coefficients.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "mixloc/types.hpp"

namespace mixloc {

struct GeometryTolerances {
    /// V^2 counts as zero below volume * (mean squared distance)^3.
    double volume = 1e-9;
    /// S^2 counts as zero below area * (mean squared distance)^2.
    double area = 1e-9;
    /// Relative slack on the triangle equalities of the colinear branch.
    double colinear = 1e-7;
    /// The centred Gram matrix may not have an eigenvalue below
    /// -realizability * lambda_max. Loose enough for measurement noise; a
    /// violated triangle inequality lands far beyond it.
    double realizability = 1e-3;
};

template <typename Scalar>
using SquareMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

namespace detail {

template <typename Scalar>
void require_nonnegative(std::initializer_list<Scalar> values, const char* where) {
    for (Scalar v : values) {
        if (!(v >= Scalar(0))) {
            throw InvalidArgument(std::string(where) + ": negative squared distance");
        }
    }
}

template <typename Scalar>
Scalar clamp_small_negative(Scalar value, Scalar scale, Scalar tol) {
    if (value < Scalar(0) && value >= -tol * scale) {
        return Scalar(0);
    }
    return value;
}

}  // namespace detail

/// Squared volume of the tetrahedron j,k,h,l from its six squared edge lengths.
template <typename Scalar>
Scalar cayley_menger_volume_sq(Scalar jk, Scalar jh, Scalar jl, Scalar kh, Scalar kl, Scalar hl,
                               Scalar tol = Scalar(1e-9)) {
    detail::require_nonnegative<Scalar>({jk, jh, jl, kh, kl, hl}, "cayley_menger_volume_sq");
    Eigen::Matrix<Scalar, 3, 3> g;
    g << 2 * jk, jk + jh - kh, jk + jl - kl,
         jk + jh - kh, 2 * jh, jh + jl - hl,
         jk + jl - kl, jh + jl - hl, 2 * jl;
    const Scalar mean = (jk + jh + jl + kh + kl + hl) / Scalar(6);
    return detail::clamp_small_negative<Scalar>(g.determinant() / Scalar(288), mean * mean * mean,
                                                tol);
}

/// Squared area of the triangle j,k,h from its three squared edge lengths.
template <typename Scalar>
Scalar cayley_menger_area_sq(Scalar jk, Scalar jh, Scalar kh, Scalar tol = Scalar(1e-9)) {
    detail::require_nonnegative<Scalar>({jk, jh, kh}, "cayley_menger_area_sq");
    const Scalar off = jk + jh - kh;
    const Scalar det = Scalar(4) * jk * jh - off * off;
    const Scalar mean = (jk + jh + kh) / Scalar(3);
    return detail::clamp_small_negative<Scalar>(det / Scalar(16), mean * mean, tol);
}

/// Volume^2 of the points a,b,c,d picked out of a squared-distance matrix.
template <typename Derived>
typename Derived::Scalar volume_sq_of(const Eigen::MatrixBase<Derived>& d2, int a, int b, int c,
                                      int d) {
    return cayley_menger_volume_sq(d2(a, b), d2(a, c), d2(a, d), d2(b, c), d2(b, d), d2(c, d));
}

template <typename Derived>
typename Derived::Scalar area_sq_of(const Eigen::MatrixBase<Derived>& d2, int a, int b, int c) {
    return cayley_menger_area_sq(d2(a, b), d2(a, c), d2(b, c));
}

/// Mean of the strictly-upper entries over the given index subset.
template <typename Derived, std::size_t N>
typename Derived::Scalar mean_entry(const Eigen::MatrixBase<Derived>& d2,
                                    const std::array<int, N>& idx) {
    using Scalar = typename Derived::Scalar;
    Scalar sum(0);
    int count = 0;
    for (std::size_t a = 0; a < N; ++a) {
        for (std::size_t b = a + 1; b < N; ++b) {
            sum += d2(idx[a], idx[b]);
            ++count;
        }
    }
    return count > 0 ? sum / Scalar(count) : Scalar(0);
}

template <typename Derived>
bool is_coplanar(const Eigen::MatrixBase<Derived>& d2, int a, int b, int c, int d,
                 const GeometryTolerances& tol = {}) {
    const auto mean = mean_entry(d2, std::array<int, 4>{a, b, c, d});
    return volume_sq_of(d2, a, b, c, d) <= tol.volume * mean * mean * mean;
}

template <typename Derived>
bool is_colinear(const Eigen::MatrixBase<Derived>& d2, int a, int b, int c,
                 const GeometryTolerances& tol = {}) {
    const auto mean = mean_entry(d2, std::array<int, 3>{a, b, c});
    return area_sq_of(d2, a, b, c) <= tol.area * mean * mean;
}

/// Classical multidimensional scaling: returns one row per point whose
/// pairwise squared distances reproduce `d2` when it is realizable in
/// `dim` dimensions. Residual positive spectrum beyond `dim` (noise) is
/// projected away; a clearly negative eigenvalue is not Euclidean at all.
template <typename Derived>
SquareMatrix<typename Derived::Scalar> embed_congruent(const Eigen::MatrixBase<Derived>& d2,
                                                       int dim,
                                                       double realizability_tol = 1e-3) {
    using Scalar = typename Derived::Scalar;
    using Matrix = SquareMatrix<Scalar>;
    const Eigen::Index n = d2.rows();
    if (d2.cols() != n || n == 0) {
        throw InvalidArgument("embed_congruent: matrix must be square and non-empty");
    }
    if (dim < 1 || dim > 3) {
        throw InvalidArgument("embed_congruent: target dimension must be 1, 2 or 3");
    }
    const Scalar scale = d2.cwiseAbs().maxCoeff();
    for (Eigen::Index a = 0; a < n; ++a) {
        if (std::abs(d2(a, a)) > Scalar(1e-12) * scale) {
            throw InvalidArgument("embed_congruent: diagonal must be zero");
        }
        for (Eigen::Index b = a + 1; b < n; ++b) {
            if (d2(a, b) < Scalar(0) || std::abs(d2(a, b) - d2(b, a)) > Scalar(1e-12) * scale) {
                throw InvalidArgument("embed_congruent: matrix must be symmetric and nonnegative");
            }
        }
    }
    const Matrix centering =
        Matrix::Identity(n, n) - Matrix::Constant(n, n, Scalar(1) / Scalar(n));
    const Matrix gram = Scalar(-0.5) * centering * d2 * centering;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
    const auto& values = eig.eigenvalues();  // ascending
    const Scalar top = std::max(values(n - 1), Scalar(0));
    if (values(0) < -Scalar(realizability_tol) * top) {
        throw RealizabilityError("embed_congruent: distances are not realizable in " +
                                 std::to_string(dim) + "-D");
    }
    const Eigen::Index kept = std::min<Eigen::Index>(dim, n);
    Matrix points = Matrix::Zero(n, dim);
    for (Eigen::Index c = 0; c < kept; ++c) {
        const Eigen::Index src = n - 1 - c;
        points.col(c) = eig.eigenvectors().col(src) * std::sqrt(std::max(values(src), Scalar(0)));
    }
    return points;
}

/// Scales `mu` to unit Euclidean norm with its first nonzero entry positive.
template <typename Derived>
void normalize_coefficients(Eigen::MatrixBase<Derived>& mu) {
    using Scalar = typename Derived::Scalar;
    const Scalar norm = mu.norm();
    if (!(norm > Scalar(0))) {
        throw DegenerateInput("normalize_coefficients: all coefficients are zero");
    }
    mu /= norm;
    for (Eigen::Index a = 0; a < mu.size(); ++a) {
        if (std::abs(mu(a)) > Scalar(1e-12)) {
            if (mu(a) < Scalar(0)) {
                mu = -mu;
            }
            break;
        }
    }
}

/// Nonzero mu with E * mu ~ 0 for a wide 3 x m matrix E (m > 3 guarantees an
/// exact null vector). Returns the right-singular vector of the smallest
/// singular value, normalized.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> null_space_coefficients(
    const Eigen::MatrixBase<Derived>& columns) {
    using Scalar = typename Derived::Scalar;
    using Matrix = SquareMatrix<Scalar>;
    if (columns.cols() < 1) {
        throw InvalidArgument("null_space_coefficients: no columns");
    }
    // Pad to a square matrix so FullV always yields cols() right-singular vectors.
    const Eigen::Index m = columns.cols();
    Matrix padded = Matrix::Zero(std::max(columns.rows(), m), m);
    padded.topRows(columns.rows()) = columns;
    Eigen::JacobiSVD<Matrix> svd(padded, Eigen::ComputeFullV);
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> mu = svd.matrixV().col(m - 1);
    normalize_coefficients(mu);
    return mu;
}

namespace detail {

template <typename Scalar>
Scalar det4(const Eigen::Matrix<Scalar, 3, 1>& a, const Eigen::Matrix<Scalar, 3, 1>& b,
            const Eigen::Matrix<Scalar, 3, 1>& c, const Eigen::Matrix<Scalar, 3, 1>& d) {
    // det [1 1 1 1; a b c d] = det [b-a, c-a, d-a]
    Eigen::Matrix<Scalar, 3, 3> m;
    m << b - a, c - a, d - a;
    return m.determinant();
}

template <typename Scalar>
Scalar det3(const Eigen::Matrix<Scalar, 2, 1>& a, const Eigen::Matrix<Scalar, 2, 1>& b,
            const Eigen::Matrix<Scalar, 2, 1>& c) {
    const Eigen::Matrix<Scalar, 2, 1> u = b - a;
    const Eigen::Matrix<Scalar, 2, 1> v = c - a;
    return u.x() * v.y() - u.y() * v.x();
}

}  // namespace detail

/// Barycentric coordinate of point 0 with respect to points 1..4 of a 5 x 5
/// squared-distance (or ratio) matrix. Requires points 1..4 non-coplanar.
/// The result sums to one and reproduces point 0 as the affine combination.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 4, 1> barycentric_3d(const Eigen::MatrixBase<Derived>& d2,
                                                             const GeometryTolerances& tol = {}) {
    using Scalar = typename Derived::Scalar;
    using Point = Eigen::Matrix<Scalar, 3, 1>;
    if (d2.rows() != 5 || d2.cols() != 5) {
        throw InvalidArgument("barycentric_3d: expected a 5 x 5 matrix");
    }
    if (is_coplanar(d2, 1, 2, 3, 4, tol)) {
        throw DegenerateInput("barycentric_3d: neighbors are coplanar; use the planar path");
    }
    const auto q = embed_congruent(d2, 3, tol.realizability);
    const auto pt = [&](int r) { return Point(q.row(r).transpose()); };
    const Point i = pt(0), j = pt(1), k = pt(2), h = pt(3), l = pt(4);
    const Scalar whole = detail::det4(j, k, h, l);
    Eigen::Matrix<Scalar, 4, 1> mu;
    mu << detail::det4(i, k, h, l) / whole, detail::det4(j, i, h, l) / whole,
        detail::det4(j, k, i, l) / whole, detail::det4(j, k, h, i) / whole;
    return mu;
}

/// Barycentric coordinate of point 0 with respect to the triangle 1,2,3 of a
/// 4 x 4 squared-distance (or ratio) matrix of coplanar points. Magnitudes
/// come from Cayley-Menger area ratios; signs from a planar embedding.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 3, 1> barycentric_planar(
    const Eigen::MatrixBase<Derived>& d2, const GeometryTolerances& tol = {}) {
    using Scalar = typename Derived::Scalar;
    using Point = Eigen::Matrix<Scalar, 2, 1>;
    if (d2.rows() != 4 || d2.cols() != 4) {
        throw InvalidArgument("barycentric_planar: expected a 4 x 4 matrix");
    }
    if (is_colinear(d2, 1, 2, 3, tol)) {
        throw DegenerateInput("barycentric_planar: reference triangle is colinear; use the "
                              "colinear path");
    }
    const Scalar whole = std::sqrt(area_sq_of(d2, 1, 2, 3));
    const auto area = [&](int a, int b, int c) {
        return std::sqrt(std::max(area_sq_of(d2, a, b, c), Scalar(0)));
    };
    Eigen::Matrix<Scalar, 3, 1> mu;
    mu << area(0, 2, 3) / whole, area(0, 3, 1) / whole, area(0, 1, 2) / whole;

    // Out-of-plane residue was already judged by the volume test upstream.
    const auto q = embed_congruent(d2, 2, tol.realizability);
    const auto pt = [&](int r) { return Point(q.row(r).transpose()); };
    const Point l = pt(0), j = pt(1), k = pt(2), h = pt(3);
    const Scalar orient = detail::det3(j, k, h);
    const std::array<Scalar, 3> signed_area = {detail::det3(l, k, h), detail::det3(j, l, h),
                                               detail::det3(j, k, l)};
    for (int c = 0; c < 3; ++c) {
        if (signed_area[c] * orient < Scalar(0)) {
            mu(c) = -mu(c);
        }
    }
    return mu;
}

}  // namespace mixloc
