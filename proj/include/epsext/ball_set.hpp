#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "epsext/geometry.hpp"
#include "epsext/rng.hpp"

namespace epsext {

/// Empirically certified constants of the interior-ball assumption.
struct GeometryReport {
    double c0 = 0.0;
    double C1_achieved = 0.0;  // sampled sup of |z - x| / d(x)
    double c2_achieved = 0.0;  // sampled inf of r / d(x)
    std::int64_t sample_count = 0;
    Vec worst_point;  // where C1_achieved was realized
};

/// Caps that make a witness query fail hard instead of silently degrading.
struct WitnessCaps {
    double max_center_ratio;  // cap on |z - x| / d(x)
    double min_radius_ratio;  // floor on r / d(x)
};

/// Compact set E as a finite union of closed balls. Immutable after
/// construction; all queries are pure.
class BallUnionSet {
public:
    explicit BallUnionSet(std::vector<Ball> balls);

    const std::vector<Ball>& balls() const { return balls_; }
    int dim() const { return static_cast<int>(balls_[0].center.size()); }
    double diameter() const { return diameter_; }
    double scale() const { return scale_; }

    /// dist(x, E) = min over balls of max(|x - z_i| - r_i, 0).
    double distance(const Vec& x) const;

    bool contains(const Vec& x) const { return distance(x) == 0.0; }

    /// Axis-aligned bounds of the union, inflated by `margin`.
    void bounding_box(double margin, Vec& lo, Vec& hi) const;

    Vec centroid() const;

    /// Index of the ball with the largest radius.
    std::size_t largest_ball() const;

    /// Rescales about the centroid so that diam = 1; the applied factor is
    /// recorded in scale() of the result.
    static BallUnionSet normalize_to_unit_diameter(const BallUnionSet& e);

private:
    std::vector<Ball> balls_;
    double diameter_ = 0.0;
    double scale_ = 1.0;
};

/// Witness ball of the interior-ball assumption at x: the input ball
/// maximizing r_i / (|z_i - x| + r_i). Requires 0 < d(x) <= c0 * diam E.
/// With caps given, throws NoWitness when the best ball misses them.
Ball interior_ball_query(const BallUnionSet& e, const Vec& x, double c0,
                         const std::optional<WitnessCaps>& caps = std::nullopt);

/// Samples the shell {0 < d(x) <= c0 diam E} and records the realized
/// interior-ball constants. Deterministic given the seed.
GeometryReport validate_geometry(const BallUnionSet& e, double c0,
                                 std::int64_t samples, std::uint64_t seed);

}  // namespace epsext
