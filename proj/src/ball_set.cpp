#include "epsext/ball_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace epsext {

BallUnionSet::BallUnionSet(std::vector<Ball> balls) : balls_(std::move(balls)) {
    if (balls_.empty()) throw InvalidConfig("ball union must be nonempty");
    const int n = static_cast<int>(balls_[0].center.size());
    for (const auto& b : balls_) {
        if (b.radius <= 0.0) throw InvalidConfig("ball radius must be positive");
        if (b.center.size() != n) throw InvalidConfig("mixed ball dimensions");
        if (!b.center.allFinite()) throw InvalidConfig("ball center not finite");
    }
    double d = 0.0;
    for (std::size_t i = 0; i < balls_.size(); ++i) {
        for (std::size_t j = i; j < balls_.size(); ++j) {
            double span = (balls_[i].center - balls_[j].center).norm() +
                          balls_[i].radius + balls_[j].radius;
            d = std::max(d, span);
        }
    }
    diameter_ = d;
}

double BallUnionSet::distance(const Vec& x) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& b : balls_) {
        best = std::min(best, std::max((x - b.center).norm() - b.radius, 0.0));
        if (best == 0.0) return 0.0;
    }
    return best;
}

void BallUnionSet::bounding_box(double margin, Vec& lo, Vec& hi) const {
    const int n = dim();
    lo = Vec::Constant(n, std::numeric_limits<double>::infinity());
    hi = Vec::Constant(n, -std::numeric_limits<double>::infinity());
    for (const auto& b : balls_) {
        for (int k = 0; k < n; ++k) {
            lo[k] = std::min(lo[k], b.center[k] - b.radius);
            hi[k] = std::max(hi[k], b.center[k] + b.radius);
        }
    }
    lo.array() -= margin;
    hi.array() += margin;
}

Vec BallUnionSet::centroid() const {
    Vec c = Vec::Zero(dim());
    for (const auto& b : balls_) c += b.center;
    return c / static_cast<double>(balls_.size());
}

std::size_t BallUnionSet::largest_ball() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < balls_.size(); ++i) {
        if (balls_[i].radius > balls_[best].radius) best = i;
    }
    return best;
}

BallUnionSet BallUnionSet::normalize_to_unit_diameter(const BallUnionSet& e) {
    if (e.diameter() < 1e-12) {
        throw DegenerateSet("ball union diameter below 1e-12");
    }
    if (std::abs(e.diameter() - 1.0) <= 1e-12) {
        BallUnionSet out = e;
        out.scale_ = 1.0;
        return out;
    }
    double s = 1.0 / e.diameter();
    Vec c = e.centroid();
    std::vector<Ball> scaled;
    scaled.reserve(e.balls().size());
    for (const auto& b : e.balls()) {
        scaled.push_back(Ball{c + s * (b.center - c), s * b.radius});
    }
    BallUnionSet out(std::move(scaled));
    out.scale_ = s;
    return out;
}

Ball interior_ball_query(const BallUnionSet& e, const Vec& x, double c0,
                         const std::optional<WitnessCaps>& caps) {
    double d = e.distance(x);
    if (d == 0.0) {
        throw OutOfRange("interior ball query at a point of E");
    }
    if (d > c0 * e.diameter() * (1.0 + 1e-12)) {
        throw OutOfRange("interior ball query beyond c0 * diam E");
    }
    const auto& balls = e.balls();
    std::size_t best = 0;
    double best_score = -1.0;
    for (std::size_t i = 0; i < balls.size(); ++i) {
        double score = balls[i].radius /
                       ((balls[i].center - x).norm() + balls[i].radius);
        if (score > best_score) {
            best_score = score;
            best = i;
        }
    }
    const Ball& b = balls[best];
    if (caps) {
        double center_ratio = (b.center - x).norm() / d;
        double radius_ratio = b.radius / d;
        if (center_ratio > caps->max_center_ratio ||
            radius_ratio < caps->min_radius_ratio) {
            std::vector<double> p(x.data(), x.data() + x.size());
            throw NoWitness(
                "interior-ball assumption fails at query point: |z-x|/d = " +
                    std::to_string(center_ratio) + ", r/d = " +
                    std::to_string(radius_ratio),
                std::move(p));
        }
    }
    return b;
}

GeometryReport validate_geometry(const BallUnionSet& e, double c0,
                                 std::int64_t samples, std::uint64_t seed) {
    if (samples < 1) throw InvalidConfig("validate_geometry needs samples >= 1");
    const double shell = c0 * e.diameter();
    Vec lo, hi;
    e.bounding_box(shell, lo, hi);
    Rng rng = Rng::forked(seed, 0x67656f6dULL);

    GeometryReport rep;
    rep.c0 = c0;
    rep.C1_achieved = 0.0;
    rep.c2_achieved = std::numeric_limits<double>::infinity();
    rep.worst_point = Vec::Zero(e.dim());

    std::int64_t accepted = 0;
    while (accepted < samples) {
        Vec x = rng.in_box(lo, hi);
        double d = e.distance(x);
        if (d <= 0.0 || d > shell) continue;
        ++accepted;
        Ball b = interior_ball_query(e, x, c0);
        double center_ratio = (b.center - x).norm() / d;
        double radius_ratio = b.radius / d;
        if (center_ratio > rep.C1_achieved) {
            rep.C1_achieved = center_ratio;
            rep.worst_point = x;
        }
        rep.c2_achieved = std::min(rep.c2_achieved, radius_ratio);
    }
    rep.sample_count = samples;
    return rep;
}

}  // namespace epsext
