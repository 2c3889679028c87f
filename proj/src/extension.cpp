#include "epsext/extension.hpp"

#include <cmath>

#include "epsext/smoothstep.hpp"

namespace epsext {

std::pair<double, double> CutoffSpec::eval(double t) const {
    if (t <= eta) return {1.0, 0.0};
    if (t >= 2.0 * eta) return {0.0, 0.0};
    auto [s, ds] = smoothstep01((t - eta) / eta);
    return {1.0 - s, -ds / eta};
}

double CutoffSpec::slope_constant() {
    // max |chi'| * eta = max of the smoothstep derivative; the profile is
    // fixed, so scan it once.
    static const double c = [] {
        double best = 0.0;
        for (int i = 1; i < 20000; ++i) {
            best = std::max(best, smoothstep01(i / 20000.0).second);
        }
        return best;
    }();
    return c;
}

ExtensionStructure::ExtensionStructure(BallUnionSet set, SourceMap phi,
                                       WhitneyDecomposition decomp,
                                       MotionAssignment assignment,
                                       RegularizedDistance rd, double c0,
                                       double eta)
    : set_(std::move(set)),
      phi_(std::move(phi)),
      decomp_(std::move(decomp)),
      assignment_(std::move(assignment)),
      rd_(std::move(rd)),
      cutoff_{eta},
      c0_(c0),
      eta_(eta),
      anchor_inverse_(inverse(assignment_.anchor_motion)) {}

Region ExtensionStructure::region(const Vec& x) const {
    if (!decomp_.in_root_box(x) || set_.distance(x) >= c0_) return Region::FAR;
    if (rd_.value(x) <= eta_) return Region::NEAR;
    return Region::BLEND;
}

Vec ExtensionStructure::eval(const Vec& x) const {
    if (!decomp_.in_root_box(x) || set_.distance(x) >= c0_) {
        return assignment_.anchor_motion(x);
    }
    double delta = rd_.value(x);
    auto [chi, dchi] = cutoff_.eval(delta);
    (void)dchi;
    if (chi >= 1.0) return phi_.eval(x);

    Vec acc = Vec::Zero(dim());
    if (chi > 0.0) acc = chi * phi_.eval(x);
    const double outer = 1.0 - chi;
    for (const auto& ab : active_bumps(decomp_, x)) {
        acc += outer * ab.theta * assignment_.motions[ab.cube](x);
    }
    return acc;
}

Mat ExtensionStructure::grad(const Vec& x) const {
    const int n = dim();
    if (!decomp_.in_root_box(x) || set_.distance(x) >= c0_) {
        return assignment_.anchor_motion.linear;
    }
    auto [delta, ddelta] = rd_.value_and_grad(x);
    auto [chi, dchi] = cutoff_.eval(delta);
    if (chi >= 1.0 && dchi == 0.0) return phi_.grad(x);

    Vec grad_in = dchi * ddelta;  // gradient of Theta~_in
    Mat j = Mat::Zero(n, n);
    if (chi > 0.0 || dchi != 0.0) {
        j = chi * phi_.grad(x) + phi_.eval(x) * grad_in.transpose();
    }
    const double outer = 1.0 - chi;
    for (const auto& ab : active_bumps(decomp_, x)) {
        const auto& m = assignment_.motions[ab.cube];
        Vec grad_nu = outer * ab.grad - ab.theta * grad_in;
        j += m(x) * grad_nu.transpose() + (outer * ab.theta) * m.linear;
    }
    return j;
}

double ExtensionStructure::partition_sum(const Vec& x) const {
    double delta = rd_.value(x);
    auto [chi, dchi] = cutoff_.eval(delta);
    (void)dchi;
    double total = chi;
    for (const auto& ab : active_bumps(decomp_, x)) {
        total += (1.0 - chi) * ab.theta;
    }
    return total;
}

Vec ExtensionStructure::invert(const Vec& y, double tol, int max_iter) const {
    Vec x = anchor_inverse_(y);
    std::vector<double> trace;
    trace.reserve(max_iter);
    for (int it = 0; it < max_iter; ++it) {
        Vec r = eval(x) - y;
        double res = r.norm();
        trace.push_back(res);
        if (res <= tol) return x;
        x -= grad(x).partialPivLu().solve(r);
    }
    Vec r = eval(x) - y;
    if (r.norm() <= tol) return x;
    trace.push_back(r.norm());
    throw NoConvergence("Newton inversion failed to reach tolerance", trace);
}

ExtensionStructure build_extension(const BallUnionSet& e, const SourceMap& phi,
                                   const BuildConfig& config) {
    if (config.c0 <= 0.0) throw InvalidConfig("c0 must be positive");
    if (config.epsilon_budget <= 0.0) {
        throw InvalidConfig("epsilon budget must be positive");
    }
    if (phi.dim() != e.dim()) {
        throw InvalidConfig("source map and E dimensions differ");
    }

    BallUnionSet set = BallUnionSet::normalize_to_unit_diameter(e);

    double r_min = set.balls()[0].radius;
    for (const auto& b : set.balls()) r_min = std::min(r_min, b.radius);
    double eta = config.eta.value_or(std::min(config.c0, r_min) / 10.0);
    if (!(eta > 0.0 && eta < config.c0 / 8.0)) {
        throw InvalidConfig("eta must satisfy 0 < eta < c0/8");
    }

    RegularizedDistance rd(set, config.softmin_exponent);
    // The far-field shortcut needs delta >= 2 eta whenever d >= c0.
    if (2.0 * eta > rd.lower_factor() * config.c0) {
        throw InvalidConfig("eta too large for the regularized-distance sandwich");
    }

    DistortionMeasurement distortion = measure_distortion_on_E(
        phi, set, config.distortion_pairs, config.seed);
    if (distortion.worst() > config.epsilon_budget) {
        throw DistortionBudgetExceeded(
            "measured distortion " + std::to_string(distortion.worst()) +
                " exceeds budget " + std::to_string(config.epsilon_budget),
            distortion.worst(), config.epsilon_budget);
    }

    GeometryReport geometry =
        validate_geometry(set, config.c0, config.geometry_samples, config.seed);

    WhitneyDecomposition decomp = decompose(set, config.c0, eta, config.decompose);
    MotionAssignment assignment =
        pick_motions(decomp, phi, config.anchor_samples, config.seed);
    ConsistencyReport consistency = consistency_check(
        assignment, decomp, phi, rd, eta, config.consistency_samples, config.seed);
    WhitneyStats stats =
        compute_whitney_stats(decomp, rd, config.stats_samples, config.seed);

    ExtensionStructure ext(std::move(set), phi, std::move(decomp),
                           std::move(assignment), std::move(rd), config.c0, eta);
    ext.distortion = distortion;
    ext.geometry = geometry;
    ext.consistency = consistency;
    ext.whitney_stats = stats;
    return ext;
}

}  // namespace epsext
