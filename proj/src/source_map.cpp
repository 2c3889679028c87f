#include "epsext/source_map.hpp"

#include <cmath>

namespace epsext {

namespace {

void check_frame_orthogonal(const Mat& frame) {
    const int n = static_cast<int>(frame.rows());
    if (frame.cols() != n) throw InvalidConfig("frame must be square");
    if (max_abs(frame.transpose() * frame - Mat::Identity(n, n)) > kOrthoTol) {
        throw InvalidConfig("twist frame is not orthogonal to 1e-12");
    }
}

// Block rotation S(t) x and its Jacobian for the twist profile
// theta_b(t) = a_b * log(1 + t), t = |x|.
Vec twist_apply(const Vec& a, const Vec& x) {
    const int n = static_cast<int>(x.size());
    double t = x.norm();
    Vec y(n);
    for (int b = 0; 2 * b + 1 < n; ++b) {
        double th = a[b] * std::log1p(t);
        double c = std::cos(th), s = std::sin(th);
        double x0 = x[2 * b], x1 = x[2 * b + 1];
        y[2 * b] = c * x0 + s * x1;
        y[2 * b + 1] = -s * x0 + c * x1;
    }
    if (n % 2 == 1) y[n - 1] = x[n - 1];
    return y;
}

Mat twist_grad(const Vec& a, const Vec& x) {
    const int n = static_cast<int>(x.size());
    double t = x.norm();
    Mat j = Mat::Zero(n, n);
    for (int b = 0; 2 * b + 1 < n; ++b) {
        double th = a[b] * std::log1p(t);
        double c = std::cos(th), s = std::sin(th);
        j(2 * b, 2 * b) = c;
        j(2 * b, 2 * b + 1) = s;
        j(2 * b + 1, 2 * b) = -s;
        j(2 * b + 1, 2 * b + 1) = c;
    }
    if (n % 2 == 1) j(n - 1, n - 1) = 1.0;
    if (t > 0.0) {
        Vec dt = x / t;  // gradient of |x|
        for (int b = 0; 2 * b + 1 < n; ++b) {
            double th = a[b] * std::log1p(t);
            double c = std::cos(th), s = std::sin(th);
            double rate = a[b] / (1.0 + t);
            double x0 = x[2 * b], x1 = x[2 * b + 1];
            // d/dtheta of the rotated block coordinates
            double g0 = -s * x0 + c * x1;
            double g1 = -c * x0 - s * x1;
            j.row(2 * b) += rate * g0 * dt.transpose();
            j.row(2 * b + 1) += rate * g1 * dt.transpose();
        }
    }
    return j;
}

}  // namespace

SourceMap SourceMap::motion(EuclideanMotion m) {
    int n = m.dim();
    return SourceMap(Motion{std::move(m)}, n);
}

SourceMap SourceMap::slow_twist(Vec block_amplitudes, Mat frame, double budget) {
    const int n = static_cast<int>(frame.rows());
    check_frame_orthogonal(frame);
    if (block_amplitudes.size() != n / 2) {
        throw InvalidConfig("slow twist needs one amplitude per 2x2 block");
    }
    // sup_t t |f'(t)| = |a_b| for f(t) = a_b log(1+t)
    double bound = block_amplitudes.size() > 0
                       ? block_amplitudes.cwiseAbs().maxCoeff()
                       : 0.0;
    if (bound > budget) {
        throw InvalidConfig("slow twist amplitude bound " + std::to_string(bound) +
                            " exceeds distortion budget " + std::to_string(budget));
    }
    return SourceMap(SlowTwist{std::move(block_amplitudes), std::move(frame)}, n);
}

SourceMap SourceMap::slide(Vec amplitude, Mat frequency, double budget) {
    const int n = static_cast<int>(amplitude.size());
    if (frequency.rows() != n || frequency.cols() != n) {
        throw InvalidConfig("slide frequency matrix must be n x n");
    }
    double bound = amplitude.norm() * spectral_norm(frequency);
    if (bound > budget) {
        throw InvalidConfig("slide gradient bound " + std::to_string(bound) +
                            " exceeds distortion budget " + std::to_string(budget));
    }
    return SourceMap(Slide{std::move(amplitude), std::move(frequency)}, n);
}

SourceMap SourceMap::compose(std::vector<SourceMap> parts) {
    if (parts.empty()) throw InvalidConfig("compose needs at least one part");
    int n = parts[0].dim();
    for (const auto& p : parts) {
        if (p.dim() != n) throw InvalidConfig("compose parts of mixed dimension");
    }
    return SourceMap(std::move(parts), n);
}

Vec SourceMap::eval(const Vec& x) const {
    return std::visit(
        [&](const auto& node) -> Vec {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, Motion>) {
                return node.m(x);
            } else if constexpr (std::is_same_v<T, SlowTwist>) {
                return node.frame.transpose() * twist_apply(node.amplitudes, x);
            } else if constexpr (std::is_same_v<T, Slide>) {
                Vec phase = node.frequency * x;
                return x + node.amplitude.cwiseProduct(phase.array().sin().matrix());
            } else {
                Vec y = x;
                for (auto it = node.rbegin(); it != node.rend(); ++it) {
                    y = it->eval(y);
                }
                return y;
            }
        },
        *node_);
}

Mat SourceMap::grad(const Vec& x) const {
    return std::visit(
        [&](const auto& node) -> Mat {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, Motion>) {
                return node.m.linear;
            } else if constexpr (std::is_same_v<T, SlowTwist>) {
                return node.frame.transpose() * twist_grad(node.amplitudes, x);
            } else if constexpr (std::is_same_v<T, Slide>) {
                Vec phase = node.frequency * x;
                Mat j = Mat::Identity(dim_, dim_);
                j += node.amplitude.cwiseProduct(phase.array().cos().matrix())
                         .asDiagonal() *
                     node.frequency;
                return j;
            } else {
                Vec y = x;
                Mat j = Mat::Identity(dim_, dim_);
                for (auto it = node.rbegin(); it != node.rend(); ++it) {
                    j = it->grad(y) * j;
                    y = it->eval(y);
                }
                return j;
            }
        },
        *node_);
}

namespace {

// Volume-weighted ball choice followed by a uniform draw inside it.
Vec sample_point_in_union(const BallUnionSet& e, const std::vector<double>& cdf,
                          Rng& rng) {
    double u = rng.uniform01();
    std::size_t i = 0;
    while (i + 1 < cdf.size() && u > cdf[i]) ++i;
    const Ball& b = e.balls()[i];
    return rng.in_ball(b.center, b.radius);
}

std::vector<double> volume_cdf(const BallUnionSet& e) {
    const int n = e.dim();
    std::vector<double> w;
    w.reserve(e.balls().size());
    double total = 0.0;
    for (const auto& b : e.balls()) {
        total += std::pow(b.radius, n);
        w.push_back(total);
    }
    for (auto& v : w) v /= total;
    return w;
}

}  // namespace

DistortionMeasurement measure_distortion_on_E(const SourceMap& phi,
                                              const BallUnionSet& e,
                                              std::int64_t pairs,
                                              std::uint64_t seed) {
    if (pairs < 1) throw InvalidConfig("measure_distortion needs pairs >= 1");
    Rng rng = Rng::forked(seed, 0x64697374ULL);
    auto cdf = volume_cdf(e);

    DistortionMeasurement m;
    m.sample_count = pairs;
    m.seed = seed;
    for (std::int64_t k = 0; k < pairs; ++k) {
        Vec x = sample_point_in_union(e, cdf, rng);
        Vec y = sample_point_in_union(e, cdf, rng);
        double base = (x - y).norm();
        if (base > 1e-9) {
            double ratio = (phi.eval(x) - phi.eval(y)).norm() / base;
            m.eps_pairwise = std::max(m.eps_pairwise, std::abs(ratio - 1.0));
        }
        m.eps_matrix = std::max(m.eps_matrix, singular_deviation(phi.grad(x)));
    }
    return m;
}

double check_first_order(const SourceMap& phi, const BallUnionSet& e,
                         double eta, std::int64_t samples, std::uint64_t seed) {
    if (samples < 1) throw InvalidConfig("check_first_order needs samples >= 1");
    if (eta <= 0.0) throw InvalidConfig("check_first_order needs eta > 0");
    Rng rng = Rng::forked(seed, 0x666f726dULL);
    Vec lo, hi;
    e.bounding_box(eta, lo, hi);

    double sup = 0.0;
    std::int64_t accepted = 0;
    while (accepted < samples) {
        Vec x = rng.in_box(lo, hi);
        if (e.distance(x) > eta) continue;
        Vec y = rng.in_ball(x, eta);
        double base = (y - x).norm();
        if (base < 1e-12) continue;
        ++accepted;
        Vec lin = phi.eval(x) + phi.grad(x) * (y - x);
        sup = std::max(sup, (phi.eval(y) - lin).norm() / base);
    }
    return sup;
}

}  // namespace epsext
