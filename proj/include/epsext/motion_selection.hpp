#pragma once

#include <cstdint>
#include <vector>

#include "epsext/source_map.hpp"
#include "epsext/whitney.hpp"

namespace epsext {

enum class CubeCase { SmallCube, NotSoSmall };

/// Per-cube Euclidean motions: small cubes carry a motion fitted on their
/// witness ball, all not-so-small cubes share the anchor motion A_inf.
struct MotionAssignment {
    std::vector<EuclideanMotion> motions;
    std::vector<CubeCase> cases;
    EuclideanMotion anchor_motion;
    double anchor_sup_error = 0.0;  // sampled sup over E of |phi - A_inf|
};

/// Mutual-consistency diagnostics of the fitted motions, plus how well they
/// track phi where the blend hands over to it.
struct ConsistencyReport {
    double sup_value_gap = 0.0;    // sup over overlaps of |A_mu(x)-A_nu(x)| / delta(x)
    double sup_grad_gap = 0.0;     // sup over overlapping pairs of |T_mu - T_nu|
    double near_E_value_gap = 0.0; // sup over delta(x)<=eta of |phi(x)-A_nu(x)| / delta(x)
    double near_E_grad_gap = 0.0;  // sup over delta(x)<=eta of |grad phi(x) - T_nu|
    std::int64_t pair_count = 0;
    std::uint64_t seed = 0;
};

/// Fits a Euclidean motion to phi on a ball: frame vectors
/// v_i = (phi(z + r e_i) - phi(z)) / r are orthonormalized by Gram-Schmidt
/// and the motion anchors at phi(z). Throws DegenerateFrame when phi is too
/// distorted for the frame to span.
EuclideanMotion fit_local_motion(const SourceMap& phi, const Ball& ball);

/// Case I/II assignment over the decomposition; also samples the anchor
/// approximation sup over E.
MotionAssignment pick_motions(const WhitneyDecomposition& decomp,
                              const SourceMap& phi,
                              std::int64_t anchor_samples = 2000,
                              std::uint64_t seed = 1);

ConsistencyReport consistency_check(const MotionAssignment& assignment,
                                    const WhitneyDecomposition& decomp,
                                    const SourceMap& phi,
                                    const RegularizedDistance& rd, double eta,
                                    std::int64_t samples, std::uint64_t seed);

}  // namespace epsext
