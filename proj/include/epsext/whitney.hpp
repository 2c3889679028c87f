#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "epsext/ball_set.hpp"
#include "epsext/geometry.hpp"

namespace epsext {

/// Dyadic cube [corner, corner + side)^n at subdivision depth `level`.
/// Q* denotes the concentric dilation by factor 3.
struct DyadicCube {
    Vec corner;
    double side = 0.0;
    int level = 0;

    Vec center() const { return corner.array() + 0.5 * side; }

    bool contains(const Vec& x) const {
        for (int d = 0; d < corner.size(); ++d) {
            if (x[d] < corner[d] || x[d] >= corner[d] + side) return false;
        }
        return true;
    }

    bool dilation_contains(const Vec& x) const {
        for (int d = 0; d < corner.size(); ++d) {
            if (x[d] < corner[d] - side || x[d] > corner[d] + 2.0 * side) return false;
        }
        return true;
    }
};

/// Smooth replacement for d(x): the power-mean softmin of the per-ball
/// distances, delta(x) = (sum h_i^-p)^(-1/p). Satisfies
/// m^(-1/p) d <= delta <= d and |grad delta| <= 1 off E.
class RegularizedDistance {
public:
    RegularizedDistance() = default;
    RegularizedDistance(const BallUnionSet& e, int exponent);

    double value(const Vec& x) const;
    /// (delta(x), grad delta(x)); the gradient is reported as zero on E.
    std::pair<double, Vec> value_and_grad(const Vec& x) const;

    int exponent() const { return p_; }
    /// The sandwich constant m^(-1/p).
    double lower_factor() const { return lower_factor_; }

private:
    std::vector<Ball> balls_;
    int p_ = 8;
    double lower_factor_ = 1.0;
};

struct DecomposeConfig {
    std::int64_t cube_cap = 1000000;
    std::optional<WitnessCaps> witness_caps;
};

/// Whitney decomposition of the complement of E inside the root box
/// [-L, L]^n, with per-cube witness balls and the anchor ball.
class WhitneyDecomposition {
public:
    std::vector<DyadicCube> cubes;   // accepted: diam <= dist(Q, E) <= 4 diam
    std::vector<DyadicCube> pruned;  // leaves with d <= eta on all of Q*
    std::vector<std::optional<Ball>> witness;  // per accepted cube, small only
    std::shared_ptr<const BallUnionSet> set;   // the decomposed E

    double root_halfwidth = 0.0;  // L
    double eta = 0.0;
    double c0 = 0.0;
    double c_low = 0.0;   // realized constants of c delta <= d <= C delta on Q*
    double c_high = 0.0;
    double c3 = 0.0;      // small-cube threshold c0 / c_high
    int overlap_bound = 0;  // K_ov from the corner/center probe sweep

    Ball anchor;
    double anchor_containment = 0.0;  // realized C of E in B(z_inf, C r_inf)

    bool is_small(std::size_t nu) const { return cubes[nu].side <= c3; }

    bool in_root_box(const Vec& x) const {
        return x.cwiseAbs().maxCoeff() < root_halfwidth;
    }

    void build_index();

    /// Indices of all accepted cubes with x in Q_nu*, ascending.
    std::vector<int> covering_dilations(const Vec& x) const;

    /// The accepted cube containing x under the half-open convention, or -1.
    int containing_cube(const Vec& x) const;

    /// Probes cube centers and Q/Q* corners for the deepest dilation overlap.
    int probe_overlap_bound() const;

private:
    struct LevelIndex {
        double side = 0.0;
        std::unordered_map<std::uint64_t, std::vector<int>> cells;
    };
    std::vector<LevelIndex> levels_;
};

/// Recursive dyadic subdivision of the root box: accept when
/// dist(Q, E) >= diam(Q) (the [1,4] band follows by induction), prune when
/// Q* provably lies in {d <= eta}, otherwise subdivide. Witness balls are
/// assigned at the centers of all small cubes, and the anchor ball is found
/// at a point with d = c0/2.
WhitneyDecomposition decompose(const BallUnionSet& e, double c0, double eta,
                               const DecomposeConfig& config = {});

/// Locates x* with |d(x*) - c0/2| <= 1e-10 along the outward ray from the
/// largest ball's center and returns its witness ball.
Ball find_anchor_ball(const BallUnionSet& e, double c0,
                      const std::optional<WitnessCaps>& caps = std::nullopt);

struct BumpEval {
    double value = 0.0;
    Vec grad;
};

/// Normalized Whitney bump Theta_nu(x) = psi_nu / sum psi_mu with analytic
/// gradient; (0, 0) outside Q_nu*.
BumpEval theta_bump(const WhitneyDecomposition& d, int nu, const Vec& x);

struct ActiveBump {
    int cube = -1;
    double theta = 0.0;
    Vec grad;
};

/// All nonzero normalized bumps at x (empty when no accepted dilation covers
/// x, which only happens where the blend is frozen to phi).
std::vector<ActiveBump> active_bumps(const WhitneyDecomposition& d, const Vec& x);

/// Realized constants of the small-cube ball relations, sampled over Q_nu*.
struct WhitneyStats {
    double containment_C = 0.0;    // Q* in B(z_nu, C r_nu), exact over corners
    double radius_low = 0.0;       // realized bounds of r_nu vs delta(x)
    double radius_high = 0.0;
    double center_offset_C = 0.0;  // |z_nu - x| <= C delta(x)
    double pair_containment_C = 0.0;  // B(z_nu,r_nu) in B(z_mu, C r_mu) on overlaps
    double bump_grad_C = 0.0;      // sup |grad Theta_nu| * delta_nu
    std::int64_t samples = 0;
};

WhitneyStats compute_whitney_stats(const WhitneyDecomposition& d,
                                   const RegularizedDistance& rd,
                                   std::int64_t samples, std::uint64_t seed);

}  // namespace epsext
