#pragma once

#include <cstdint>
#include <memory>
#include <variant>
#include <vector>

#include "epsext/ball_set.hpp"
#include "epsext/geometry.hpp"

namespace epsext {

/// Measured distortion of a source map over E.
struct DistortionMeasurement {
    double eps_pairwise = 0.0;  // sup over pairs of | |phi(x)-phi(y)|/|x-y| - 1 |
    double eps_matrix = 0.0;    // sup over points of max(sigma_max-1, 1-sigma_min)
    std::int64_t sample_count = 0;
    std::uint64_t seed = 0;

    double worst() const { return std::max(eps_pairwise, eps_matrix); }
};

/// Expression tree of built-in C-infinity near-isometries, globally defined
/// on R^n: Euclidean motions, slow twists, slides, and compositions. Values
/// and Jacobians are exact (analytic chain rule over the tree).
class SourceMap {
public:
    /// phi(x) = T x + x0.
    static SourceMap motion(EuclideanMotion m);

    /// phi(x) = Theta^T S(Theta x) x where S is block-diagonal with 2x2
    /// rotation blocks of angle a_b * log(1 + |x|) (and a unit last entry for
    /// odd n). Rejects amplitudes whose twist-rate bound max|a_b| exceeds
    /// `budget`.
    static SourceMap slow_twist(Vec block_amplitudes, Mat frame, double budget);

    /// phi(x) = x + a .* sin(Omega x). Rejects parameters with
    /// |a|_2 * |Omega|_2 > budget.
    static SourceMap slide(Vec amplitude, Mat frequency, double budget);

    /// parts[0] applied last: compose({f, g}) evaluates f(g(x)).
    static SourceMap compose(std::vector<SourceMap> parts);

    int dim() const { return dim_; }

    Vec eval(const Vec& x) const;
    Mat grad(const Vec& x) const;

private:
    struct Motion {
        EuclideanMotion m;
    };
    struct SlowTwist {
        Vec amplitudes;  // one per 2x2 block
        Mat frame;       // orthogonal
    };
    struct Slide {
        Vec amplitude;
        Mat frequency;
    };
    using Node = std::variant<Motion, SlowTwist, Slide, std::vector<SourceMap>>;

    SourceMap(Node node, int dim) : node_(std::make_shared<Node>(std::move(node))), dim_(dim) {}

    std::shared_ptr<const Node> node_;
    int dim_ = 0;
};

/// Realized distortion of phi over E: pairwise ratios on volume-weighted
/// random pairs plus singular values of the Jacobian at random points.
/// Deterministic given the seed.
DistortionMeasurement measure_distortion_on_E(const SourceMap& phi,
                                              const BallUnionSet& e,
                                              std::int64_t pairs,
                                              std::uint64_t seed);

/// Sampled sup of |phi(y) - [phi(x) + grad phi(x)(y-x)]| / |y-x| over pairs
/// with d(x) <= eta and |y-x| <= eta.
double check_first_order(const SourceMap& phi, const BallUnionSet& e,
                         double eta, std::int64_t samples, std::uint64_t seed);

}  // namespace epsext
