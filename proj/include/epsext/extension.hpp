#pragma once

#include <cstdint>
#include <optional>

#include "epsext/motion_selection.hpp"
#include "epsext/source_map.hpp"
#include "epsext/whitney.hpp"

namespace epsext {

/// C-infinity cutoff in the regularized distance: 1 on (-inf, eta],
/// 0 on [2 eta, inf), monotone smoothstep between.
struct CutoffSpec {
    double eta = 0.0;

    /// (chi(t), chi'(t)).
    std::pair<double, double> eval(double t) const;

    /// Recorded C_chi with |chi'| <= C_chi / eta.
    static double slope_constant();
};

struct BuildConfig {
    double epsilon_budget = 0.0;
    double c0 = 0.0;
    std::optional<double> eta;     // default min(c0, smallest radius) / 10
    int softmin_exponent = 8;      // p of the regularized distance
    std::int64_t distortion_pairs = 10000;
    std::int64_t geometry_samples = 10000;
    std::int64_t consistency_samples = 4000;
    std::int64_t anchor_samples = 2000;
    std::int64_t stats_samples = 4000;
    std::uint64_t seed = 1;
    DecomposeConfig decompose;
};

enum class Region { NEAR, BLEND, FAR };

/// Everything needed to evaluate the blended extension Phi and its gradient:
/// Phi = Theta~_in phi + sum_nu Theta~_nu A_nu, with Theta~_in = chi(delta)
/// and Theta~_nu = (1 - Theta~_in) Theta_nu. Immutable once built; eval,
/// grad and invert are pure.
class ExtensionStructure {
public:
    ExtensionStructure(BallUnionSet set, SourceMap phi,
                       WhitneyDecomposition decomp, MotionAssignment assignment,
                       RegularizedDistance rd, double c0, double eta);

    /// Phi(x): exactly phi where delta <= eta, exactly A_inf where d >= c0 or
    /// outside the root box, the finite blend in between.
    Vec eval(const Vec& x) const;

    /// Analytic Jacobian of Phi.
    Mat grad(const Vec& x) const;

    /// Newton solve of Phi(x) = y starting from A_inf^{-1}(y).
    Vec invert(const Vec& y, double tol = 1e-10, int max_iter = 50) const;

    Region region(const Vec& x) const;

    /// Theta~_in + sum Theta~_nu at x (1 on the root box by construction).
    double partition_sum(const Vec& x) const;

    const BallUnionSet& set() const { return set_; }
    const SourceMap& phi() const { return phi_; }
    const WhitneyDecomposition& decomp() const { return decomp_; }
    const MotionAssignment& assignment() const { return assignment_; }
    const RegularizedDistance& rd() const { return rd_; }
    const EuclideanMotion& anchor_motion() const { return assignment_.anchor_motion; }
    const CutoffSpec& cutoff() const { return cutoff_; }
    double c0() const { return c0_; }
    double eta() const { return eta_; }
    int dim() const { return set_.dim(); }

    // Reports attached by build_extension.
    DistortionMeasurement distortion;
    GeometryReport geometry;
    ConsistencyReport consistency;
    WhitneyStats whitney_stats;

private:
    BallUnionSet set_;
    SourceMap phi_;
    WhitneyDecomposition decomp_;
    MotionAssignment assignment_;
    RegularizedDistance rd_;
    CutoffSpec cutoff_;
    double c0_ = 0.0;
    double eta_ = 0.0;
    EuclideanMotion anchor_inverse_;
};

/// Runs the full pipeline: normalize E, measure the distortion of phi
/// against the budget, validate the interior-ball geometry, decompose,
/// pick motions, run the consistency diagnostics and assemble the structure.
ExtensionStructure build_extension(const BallUnionSet& e, const SourceMap& phi,
                                   const BuildConfig& config);

}  // namespace epsext
