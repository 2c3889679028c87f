#include "epsext/verification.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace epsext {

namespace {

// Draw a point from one stratum by rejection; the strata are equally weighted
// so the blend zone is not swamped by the trivial far field.
Vec sample_stratum(const ExtensionStructure& ext, Region want, Rng& rng) {
    const auto& set = ext.set();
    Vec lo, hi;
    const double L = ext.decomp().root_halfwidth;
    switch (want) {
        case Region::NEAR:
            set.bounding_box(2.0 * ext.eta(), lo, hi);
            break;
        case Region::BLEND:
            set.bounding_box(ext.c0(), lo, hi);
            break;
        case Region::FAR:
            lo = Vec::Constant(set.dim(), -(L + 0.5));
            hi = Vec::Constant(set.dim(), L + 0.5);
            break;
    }
    for (;;) {
        Vec x = rng.in_box(lo, hi);
        if (ext.region(x) == want) return x;
    }
}

constexpr Region kStrata[3] = {Region::NEAR, Region::BLEND, Region::FAR};

double sigma_deviation_at(const ExtensionStructure& ext, const Vec& x) {
    return singular_deviation(ext.grad(x));
}

struct PairScan {
    double ratio_sup = 0.0;
    double chord_sigma_sup = 0.0;
    std::int64_t count = 0;
};

PairScan bilipschitz_scan(const ExtensionStructure& ext, std::int64_t pairs,
                          std::uint64_t seed) {
    Rng rng = Rng::forked(seed, 0x70616972ULL);
    PairScan out;
    for (std::int64_t k = 0; k < pairs; ++k) {
        Vec x = sample_stratum(ext, kStrata[k % 3], rng);
        Vec y = sample_stratum(ext, kStrata[(k / 3) % 3], rng);
        double base = (x - y).norm();
        if (base < 1e-9) continue;
        double ratio = (ext.eval(x) - ext.eval(y)).norm() / base;
        out.ratio_sup = std::max(out.ratio_sup, std::abs(ratio - 1.0));
        ++out.count;
        // The spectrum sup also scans the interiors of the sampled chords,
        // so the two reports are comparable at the sampled level.
        for (int t = 1; t <= 5; ++t) {
            Vec mid = x + (t / 6.0) * (y - x);
            out.chord_sigma_sup =
                std::max(out.chord_sigma_sup, sigma_deviation_at(ext, mid));
        }
    }
    return out;
}

}  // namespace

double distortion_spectrum_report(const ExtensionStructure& ext,
                                  std::int64_t samples, std::uint64_t seed) {
    Rng rng = Rng::forked(seed, 0x73706563ULL);
    double sup = 0.0;
    for (std::int64_t k = 0; k < samples; ++k) {
        Vec x = sample_stratum(ext, kStrata[k % 3], rng);
        sup = std::max(sup, sigma_deviation_at(ext, x));
    }
    return sup;
}

double bilipschitz_report(const ExtensionStructure& ext, std::int64_t pairs,
                          std::uint64_t seed) {
    return bilipschitz_scan(ext, pairs, seed).ratio_sup;
}

std::pair<double, double> far_near_field_checks(const ExtensionStructure& ext,
                                                std::int64_t samples,
                                                std::uint64_t seed) {
    Rng rng = Rng::forked(seed, 0x6661726eULL);
    double far_err = 0.0;
    double near_err = 0.0;
    const auto& anchor = ext.anchor_motion();
    for (std::int64_t k = 0; k < samples / 2; ++k) {
        Vec x = sample_stratum(ext, Region::FAR, rng);
        far_err = std::max(far_err, (ext.eval(x) - anchor(x)).norm());
        Vec y = sample_stratum(ext, Region::NEAR, rng);
        near_err = std::max(near_err, (ext.eval(y) - ext.phi().eval(y)).norm());
    }
    return {far_err, near_err};
}

InjectivityResult injectivity_probe(const ExtensionStructure& ext,
                                    std::int64_t grid_resolution,
                                    double distortion) {
    const int n = ext.dim();
    const double L = ext.decomp().root_halfwidth;
    const double h = 2.0 * L / static_cast<double>(grid_resolution);
    const double margin = std::max(1.0 - 2.0 * distortion, 0.1);

    std::int64_t total = 1;
    for (int d = 0; d < n; ++d) total *= grid_resolution;

    InjectivityResult out;
    out.grid_points = total;

    std::vector<Vec> images(total);
    std::vector<int> signs(total);
    Vec x(n);
    for (std::int64_t idx = 0; idx < total; ++idx) {
        std::int64_t t = idx;
        for (int d = 0; d < n; ++d) {
            x[d] = -L + (static_cast<double>(t % grid_resolution) + 0.5) * h;
            t /= grid_resolution;
        }
        images[idx] = ext.eval(x);
        signs[idx] = ext.grad(x).determinant() > 0.0 ? 1 : -1;
    }

    out.det_sign = signs[0];
    out.det_consistent = true;
    for (int s : signs) {
        if (s != out.det_sign) {
            out.det_consistent = false;
            break;
        }
    }

    // Image-space hash at the collision scale.
    const double cell = margin * h;
    std::unordered_map<std::uint64_t, std::vector<std::int64_t>> buckets;
    auto key_of = [&](const Vec& p) {
        std::uint64_t h64 = 1469598103934665603ULL;
        for (int d = 0; d < n; ++d) {
            auto c = static_cast<std::int64_t>(std::floor(p[d] / cell));
            h64 ^= static_cast<std::uint64_t>(c) + 0x9e3779b97f4a7c15ULL;
            h64 *= 1099511628211ULL;
        }
        return h64;
    };

    auto grid_coords = [&](std::int64_t idx, std::int64_t* c) {
        for (int d = 0; d < n; ++d) {
            c[d] = idx % grid_resolution;
            idx /= grid_resolution;
        }
    };

    int offsets = 1;
    for (int d = 0; d < n; ++d) offsets *= 3;

    std::int64_t ca[8];
    std::int64_t cb[8];
    for (std::int64_t idx = 0; idx < total; ++idx) {
        // probe neighbors in image space
        const Vec& p = images[idx];
        grid_coords(idx, ca);
        for (int o = 0; o < offsets; ++o) {
            Vec q = p;
            int t = o;
            for (int d = 0; d < n; ++d) {
                q[d] += cell * ((t % 3) - 1);
                t /= 3;
            }
            auto it = buckets.find(key_of(q));
            if (it == buckets.end()) continue;
            for (std::int64_t other : it->second) {
                grid_coords(other, cb);
                std::int64_t cheb = 0;
                for (int d = 0; d < n; ++d) {
                    cheb = std::max(cheb, std::abs(ca[d] - cb[d]));
                }
                if (cheb < 2) continue;  // adjacent preimages are fine
                double pre = 0.0;
                for (int d = 0; d < n; ++d) {
                    double dd = static_cast<double>(ca[d] - cb[d]) * h;
                    pre += dd * dd;
                }
                pre = std::sqrt(pre);
                if ((images[idx] - images[other]).norm() < margin * pre) {
                    ++out.collisions;
                }
            }
        }
        buckets[key_of(p)].push_back(idx);
    }
    return out;
}

namespace {

// Central finite differences against the analytic Jacobian, skipping the
// 1e-4 neighborhoods of the plateau breakpoints where a stencil would
// straddle a formula boundary.
double fd_gradient_check(const ExtensionStructure& ext, std::int64_t samples,
                         std::uint64_t seed) {
    Rng rng = Rng::forked(seed, 0x66646768ULL);
    const int n = ext.dim();
    const double step = 1e-5;
    const double guard = 1e-4;
    const double eta = ext.eta();

    double worst = 0.0;
    std::int64_t accepted = 0;
    while (accepted < samples) {
        Vec x = sample_stratum(ext, kStrata[accepted % 3], rng);
        double delta = ext.rd().value(x);
        if (std::abs(delta - eta) < guard || std::abs(delta - 2.0 * eta) < guard) {
            continue;
        }
        if (std::abs(ext.set().distance(x) - ext.c0()) < guard) continue;
        bool near_breakpoint = false;
        for (int id : ext.decomp().covering_dilations(x)) {
            const auto& q = ext.decomp().cubes[id];
            for (int d = 0; d < n && !near_breakpoint; ++d) {
                for (int k = -1; k <= 2; ++k) {
                    if (std::abs(x[d] - (q.corner[d] + k * q.side)) < guard) {
                        near_breakpoint = true;
                        break;
                    }
                }
            }
            if (near_breakpoint) break;
        }
        if (near_breakpoint) continue;
        ++accepted;

        Mat jan = ext.grad(x);
        Mat jfd(n, n);
        for (int d = 0; d < n; ++d) {
            Vec xp = x;
            Vec xm = x;
            xp[d] += step;
            xm[d] -= step;
            jfd.col(d) = (ext.eval(xp) - ext.eval(xm)) / (2.0 * step);
        }
        worst = std::max(worst, (jfd - jan).norm() / jan.norm());
    }
    return worst;
}

double roundtrip_check(const ExtensionStructure& ext, std::int64_t samples,
                       std::uint64_t seed) {
    Rng rng = Rng::forked(seed, 0x726f756eULL);
    double worst = 0.0;
    for (std::int64_t k = 0; k < samples; ++k) {
        Vec x = sample_stratum(ext, kStrata[k % 3], rng);
        worst = std::max(worst, (ext.invert(ext.eval(x)) - x).norm());
    }
    return worst;
}

}  // namespace

VerificationReport full_report(const ExtensionStructure& ext,
                               const VerifyConfig& config) {
    VerificationReport rep;
    rep.eps_input = ext.distortion.worst();

    double point_sup =
        distortion_spectrum_report(ext, config.samples, config.seed);
    PairScan pairs = bilipschitz_scan(ext, config.pairs, config.seed);
    rep.distortion_spectrum_sup = std::max(point_sup, pairs.chord_sigma_sup);
    rep.bilipschitz_sup = pairs.ratio_sup;
    rep.spectrum_samples = config.samples + 5 * pairs.count;
    rep.pair_samples = pairs.count;

    auto [far_err, near_err] =
        far_near_field_checks(ext, config.samples, config.seed);
    rep.far_field_max_err = far_err;
    rep.near_field_max_err = near_err;

    InjectivityResult inj = injectivity_probe(ext, config.grid_resolution,
                                              rep.distortion_spectrum_sup);
    rep.det_sign = inj.det_sign;
    rep.det_consistent = inj.det_consistent;
    rep.injectivity_collisions = inj.collisions;
    rep.grid_points = inj.grid_points;

    rep.fd_grad_max_rel_err = fd_gradient_check(ext, config.fd_samples, config.seed);
    rep.roundtrip_max_err =
        roundtrip_check(ext, config.roundtrip_samples, config.seed);

    rep.realized_C = rep.eps_input > 0.0
                         ? rep.distortion_spectrum_sup / rep.eps_input
                         : 0.0;

    // Rigid inputs have no measurable distortion to scale against; the
    // spectrum bound becomes absolute there.
    bool spectrum_ok = rep.eps_input >= 1e-9
                           ? rep.realized_C <= config.max_realized_C
                           : rep.distortion_spectrum_sup <= config.rigid_tol;
    rep.pass = spectrum_ok &&
               rep.bilipschitz_sup <= rep.distortion_spectrum_sup + 1e-9 &&
               rep.far_field_max_err <= config.far_tol &&
               rep.near_field_max_err <= config.near_tol &&
               rep.injectivity_collisions == 0 && rep.det_consistent &&
               rep.fd_grad_max_rel_err <= config.fd_tol &&
               rep.roundtrip_max_err <= config.roundtrip_tol;
    return rep;
}

}  // namespace epsext
