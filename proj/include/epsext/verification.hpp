#pragma once

#include <cstdint>

#include "epsext/extension.hpp"

namespace epsext {

struct VerifyConfig {
    std::int64_t samples = 10000;         // stratified NEAR/BLEND/FAR points
    std::int64_t pairs = 10000;           // bilipschitz pairs
    std::int64_t grid_resolution = 64;    // injectivity grid per axis
    std::int64_t fd_samples = 1000;
    std::int64_t roundtrip_samples = 1000;
    std::uint64_t seed = 1;

    double max_realized_C = 50.0;  // distortion_spectrum_sup <= C * eps_input
    double rigid_tol = 1e-10;      // absolute fallback when eps_input ~ 0
    double far_tol = 1e-12;
    double near_tol = 1e-12;
    double fd_tol = 1e-6;
    double roundtrip_tol = 1e-8;
};

struct VerificationReport {
    double eps_input = 0.0;
    double distortion_spectrum_sup = 0.0;
    double bilipschitz_sup = 0.0;
    double far_field_max_err = 0.0;
    double near_field_max_err = 0.0;
    int det_sign = 0;
    bool det_consistent = false;
    std::int64_t injectivity_collisions = 0;
    double fd_grad_max_rel_err = 0.0;
    double roundtrip_max_err = 0.0;
    double realized_C = 0.0;
    bool pass = false;

    // Deterministic work counters.
    std::int64_t spectrum_samples = 0;
    std::int64_t pair_samples = 0;
    std::int64_t grid_points = 0;
};

/// Sampled sup of max(sigma_max - 1, 1 - sigma_min) of grad Phi over equally
/// weighted NEAR/BLEND/FAR strata.
double distortion_spectrum_report(const ExtensionStructure& ext,
                                  std::int64_t samples, std::uint64_t seed);

/// Sampled sup of | |Phi(x)-Phi(y)| / |x-y| - 1 | over stratified pairs.
double bilipschitz_report(const ExtensionStructure& ext, std::int64_t pairs,
                          std::uint64_t seed);

/// (far_err, near_err): max |Phi - A_inf| over d >= c0 and max |Phi - phi|
/// over delta <= eta.
std::pair<double, double> far_near_field_checks(const ExtensionStructure& ext,
                                                std::int64_t samples,
                                                std::uint64_t seed);

struct InjectivityResult {
    std::int64_t collisions = 0;
    int det_sign = 0;
    bool det_consistent = false;
    std::int64_t grid_points = 0;
};

/// Grid sweep over the root box: buckets images in a spatial hash and counts
/// non-adjacent preimage pairs whose images land closer than
/// (1 - 2 distortion) times their separation; also checks det grad Phi keeps
/// one sign.
InjectivityResult injectivity_probe(const ExtensionStructure& ext,
                                    std::int64_t grid_resolution,
                                    double distortion);

/// Runs every check and applies the configured thresholds.
VerificationReport full_report(const ExtensionStructure& ext,
                               const VerifyConfig& config);

}  // namespace epsext
