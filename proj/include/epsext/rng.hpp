#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace epsext {

// Deterministic sampling helpers. All randomness in the library flows through
// this wrapper so that a scenario seed reproduces every report byte for byte.
// Doubles are derived from raw engine output rather than std distributions to
// keep the stream independent of the standard library implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // Derive an independent stream for a pipeline stage; stage tags keep the
    // streams stable when stages are added or reordered.
    static Rng forked(std::uint64_t seed, std::uint64_t stage_tag) {
        return Rng(seed_mix(seed, stage_tag));
    }

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    std::size_t index(std::size_t count) {
        return static_cast<std::size_t>(eng_() % count);
    }

    // Standard normal via Box-Muller (one value per call; cache unused half).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    Eigen::VectorXd normal_vector(int n) {
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v[i] = normal();
        return v;
    }

    Eigen::VectorXd in_box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
        Eigen::VectorXd x(lo.size());
        for (int i = 0; i < lo.size(); ++i) x[i] = uniform(lo[i], hi[i]);
        return x;
    }

    // Uniform in the closed ball: gaussian direction, radius by inverse CDF.
    Eigen::VectorXd in_ball(const Eigen::VectorXd& center, double radius) {
        const int n = static_cast<int>(center.size());
        Eigen::VectorXd dir = normal_vector(n);
        double nrm = dir.norm();
        while (nrm < 1e-300) {
            dir = normal_vector(n);
            nrm = dir.norm();
        }
        double r = radius * std::pow(uniform01(), 1.0 / n);
        return center + (r / nrm) * dir;
    }

    Eigen::VectorXd on_sphere(const Eigen::VectorXd& center, double radius) {
        const int n = static_cast<int>(center.size());
        Eigen::VectorXd dir = normal_vector(n);
        double nrm = dir.norm();
        while (nrm < 1e-300) {
            dir = normal_vector(n);
            nrm = dir.norm();
        }
        return center + (radius / nrm) * dir;
    }

private:
    static std::uint64_t seed_mix(std::uint64_t a, std::uint64_t b) {
        // splitmix64 finalizer over the combined word.
        std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace epsext
