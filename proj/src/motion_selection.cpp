#include "epsext/motion_selection.hpp"

#include <cmath>

namespace epsext {

EuclideanMotion fit_local_motion(const SourceMap& phi, const Ball& ball) {
    const int n = static_cast<int>(ball.center.size());
    const Vec at_center = phi.eval(ball.center);
    Mat frame(n, n);
    for (int i = 0; i < n; ++i) {
        Vec probe = ball.center;
        probe[i] += ball.radius;
        frame.col(i) = (phi.eval(probe) - at_center) / ball.radius;
    }
    Mat t = gram_schmidt(frame);
    return EuclideanMotion(t, at_center - t * ball.center);
}

MotionAssignment pick_motions(const WhitneyDecomposition& decomp,
                              const SourceMap& phi,
                              std::int64_t anchor_samples, std::uint64_t seed) {
    MotionAssignment out;
    out.anchor_motion = fit_local_motion(phi, decomp.anchor);
    out.motions.reserve(decomp.cubes.size());
    out.cases.reserve(decomp.cubes.size());
    for (std::size_t nu = 0; nu < decomp.cubes.size(); ++nu) {
        if (decomp.is_small(nu)) {
            try {
                out.motions.push_back(fit_local_motion(phi, *decomp.witness[nu]));
            } catch (const DegenerateFrame& e) {
                throw DegenerateFrame("cube " + std::to_string(nu) + ": " +
                                      e.what());
            }
            out.cases.push_back(CubeCase::SmallCube);
        } else {
            out.motions.push_back(out.anchor_motion);
            out.cases.push_back(CubeCase::NotSoSmall);
        }
    }

    // Realized constant of the anchor estimate: sup over E of |phi - A_inf|.
    if (decomp.set && anchor_samples > 0) {
        Rng rng = Rng::forked(seed, 0x616e6368ULL);
        const auto& balls = decomp.set->balls();
        for (std::int64_t k = 0; k < anchor_samples; ++k) {
            const Ball& b = balls[k % balls.size()];
            Vec y = rng.in_ball(b.center, b.radius);
            out.anchor_sup_error = std::max(
                out.anchor_sup_error,
                (phi.eval(y) - out.anchor_motion(y)).norm());
        }
    }
    return out;
}

ConsistencyReport consistency_check(const MotionAssignment& assignment,
                                    const WhitneyDecomposition& decomp,
                                    const SourceMap& phi,
                                    const RegularizedDistance& rd, double eta,
                                    std::int64_t samples, std::uint64_t seed) {
    ConsistencyReport rep;
    rep.seed = seed;
    if (decomp.cubes.empty()) return rep;
    Rng rng = Rng::forked(seed, 0x636f6e73ULL);

    const std::int64_t per_cube = std::max<std::int64_t>(
        1, samples / static_cast<std::int64_t>(decomp.cubes.size()));

    for (std::size_t nu = 0; nu < decomp.cubes.size(); ++nu) {
        const auto& q = decomp.cubes[nu];
        Vec lo = q.corner.array() - q.side;
        Vec hi = q.corner.array() + 2.0 * q.side;
        for (std::int64_t s = 0; s < per_cube; ++s) {
            Vec x = rng.in_box(lo, hi);
            double delta = rd.value(x);
            if (delta <= 0.0) continue;
            auto ids = decomp.covering_dilations(x);
            for (std::size_t a = 0; a < ids.size(); ++a) {
                for (std::size_t b = a + 1; b < ids.size(); ++b) {
                    const auto& ma = assignment.motions[ids[a]];
                    const auto& mb = assignment.motions[ids[b]];
                    rep.sup_value_gap = std::max(
                        rep.sup_value_gap, (ma(x) - mb(x)).norm() / delta);
                    rep.sup_grad_gap = std::max(
                        rep.sup_grad_gap, spectral_norm(ma.linear - mb.linear));
                    ++rep.pair_count;
                }
            }
            if (delta <= eta) {
                Vec px = phi.eval(x);
                Mat gx = phi.grad(x);
                for (int id : ids) {
                    const auto& m = assignment.motions[id];
                    rep.near_E_value_gap = std::max(
                        rep.near_E_value_gap, (px - m(x)).norm() / delta);
                    rep.near_E_grad_gap = std::max(
                        rep.near_E_grad_gap, spectral_norm(gx - m.linear));
                }
            }
        }
    }
    return rep;
}

}  // namespace epsext
