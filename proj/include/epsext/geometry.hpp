#pragma once

#include <vector>

#include <Eigen/Dense>

#include "epsext/errors.hpp"

namespace epsext {

// The ambient dimension n is fixed per scenario (n <= 8 in practice); all
// vectors and matrices are dense dynamic-size Eigen objects of that size.
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

constexpr double kOrthoTol = 1e-12;   // ||T^T T - I||_max after re-orthonormalization
constexpr double kGramSchmidtTol = 1e-6;  // smallest admissible singular value

/// Rigid map x -> T x + x0 with T orthogonal.
struct EuclideanMotion {
    Mat linear;
    Vec offset;

    EuclideanMotion() = default;
    EuclideanMotion(Mat t, Vec x0);

    static EuclideanMotion identity(int n);

    int dim() const { return static_cast<int>(offset.size()); }

    Vec operator()(const Vec& x) const { return linear * x + offset; }

    double det_sign() const;
};

/// Closed ball B(center, radius).
struct Ball {
    Vec center;
    double radius = 0.0;
};

/// a(b(x)) for all x.
EuclideanMotion compose(const EuclideanMotion& a, const EuclideanMotion& b);

EuclideanMotion inverse(const EuclideanMotion& a);

/// Orthonormalizes the columns of `frame` (modified Gram-Schmidt with one
/// re-orthogonalization pass). Column k of the result spans the same flag as
/// the input with a positive coefficient on input k. Throws DegenerateFrame
/// when the smallest singular value of the input falls below `tol`.
Mat gram_schmidt(const Mat& frame, double tol = kGramSchmidtTol);

/// l-dimensional volume of the simplex spanned by l+1 points in R^n, via the
/// Gram determinant of the edge vectors from points[0]. Throws DimensionError
/// for l > n.
double simplex_volume(const std::vector<Vec>& points);

/// Operator 2-norm.
double spectral_norm(const Mat& m);

/// Deviation of the singular values of `m` from 1: max(sigma_max - 1, 1 - sigma_min).
double singular_deviation(const Mat& m);

double max_abs(const Mat& m);

}  // namespace epsext
