#include "epsext/geometry.hpp"

#include <cmath>

namespace epsext {

EuclideanMotion::EuclideanMotion(Mat t, Vec x0)
    : linear(std::move(t)), offset(std::move(x0)) {
    const int n = static_cast<int>(offset.size());
    if (linear.rows() != n || linear.cols() != n) {
        throw InvalidConfig("motion linear part does not match translation dimension");
    }
    Mat gram = linear.transpose() * linear;
    if (max_abs(gram - Mat::Identity(n, n)) > kOrthoTol) {
        throw InvalidConfig("motion linear part is not orthogonal to 1e-12");
    }
    double d = linear.determinant();
    if (std::abs(std::abs(d) - 1.0) > 1e-9) {
        throw InvalidConfig("motion determinant is not +-1 within 1e-9");
    }
}

EuclideanMotion EuclideanMotion::identity(int n) {
    return EuclideanMotion(Mat::Identity(n, n), Vec::Zero(n));
}

double EuclideanMotion::det_sign() const {
    return linear.determinant() > 0.0 ? 1.0 : -1.0;
}

EuclideanMotion compose(const EuclideanMotion& a, const EuclideanMotion& b) {
    return EuclideanMotion(a.linear * b.linear, a.linear * b.offset + a.offset);
}

EuclideanMotion inverse(const EuclideanMotion& a) {
    Mat ti = a.linear.transpose();
    return EuclideanMotion(ti, -(ti * a.offset));
}

Mat gram_schmidt(const Mat& frame, double tol) {
    const int n = static_cast<int>(frame.cols());
    if (frame.rows() != n) {
        throw DimensionError("gram_schmidt expects a square frame");
    }
    Eigen::JacobiSVD<Mat> svd(frame);
    if (svd.singularValues()(n - 1) < tol) {
        throw DegenerateFrame("frame nearly dependent: smallest singular value " +
                              std::to_string(svd.singularValues()(n - 1)));
    }

    // Modified Gram-Schmidt with one re-orthogonalization sweep per column.
    Mat q(n, n);
    for (int k = 0; k < n; ++k) {
        Vec v = frame.col(k);
        for (int sweep = 0; sweep < 2; ++sweep) {
            for (int j = 0; j < k; ++j) {
                v -= q.col(j).dot(v) * q.col(j);
            }
        }
        double nrm = v.norm();
        if (nrm < tol) {
            throw DegenerateFrame("frame collapsed during orthonormalization");
        }
        q.col(k) = v / nrm;
    }
    return q;
}

double simplex_volume(const std::vector<Vec>& points) {
    if (points.empty()) throw DimensionError("simplex needs at least one point");
    const int n = static_cast<int>(points[0].size());
    const int l = static_cast<int>(points.size()) - 1;
    if (l > n) throw DimensionError("simplex dimension exceeds ambient dimension");
    if (l == 0) return 0.0;

    Mat edges(n, l);
    for (int i = 0; i < l; ++i) edges.col(i) = points[i + 1] - points[0];
    Mat gram = edges.transpose() * edges;
    double det = gram.determinant();
    if (det <= 0.0) return 0.0;

    double fact = 1.0;
    for (int i = 2; i <= l; ++i) fact *= i;
    return std::sqrt(det) / fact;
}

double spectral_norm(const Mat& m) {
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues()(0);
}

double singular_deviation(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(m.transpose() * m);
    const auto& ev = es.eigenvalues();
    double smin = std::sqrt(std::max(ev(0), 0.0));
    double smax = std::sqrt(std::max(ev(ev.size() - 1), 0.0));
    return std::max(smax - 1.0, 1.0 - smin);
}

double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace epsext
