#include "epsext/whitney.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "epsext/smoothstep.hpp"

namespace epsext {

namespace {

double box_point_distance(const Vec& lo, const Vec& hi, const Vec& z) {
    double s = 0.0;
    for (int d = 0; d < z.size(); ++d) {
        double c = std::clamp(z[d], lo[d], hi[d]);
        s += (z[d] - c) * (z[d] - c);
    }
    return std::sqrt(s);
}

// dist(Q, E) for the closed box [lo, hi]: exact for a union of balls.
double box_set_distance(const Vec& lo, const Vec& hi, const BallUnionSet& e) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& b : e.balls()) {
        best = std::min(best, std::max(box_point_distance(lo, hi, b.center) - b.radius, 0.0));
        if (best == 0.0) break;
    }
    return best;
}

// Upper bound on max over the box of d(x): per ball the max of |x - z| over a
// box is attained at a corner, and min_i max_x >= max_x min_i.
double box_set_distance_upper(const Vec& lo, const Vec& hi, const BallUnionSet& e) {
    const int n = static_cast<int>(lo.size());
    double best = std::numeric_limits<double>::infinity();
    for (const auto& b : e.balls()) {
        double far2 = 0.0;
        for (int d = 0; d < n; ++d) {
            double a = std::abs(lo[d] - b.center[d]);
            double c = std::abs(hi[d] - b.center[d]);
            double m = std::max(a, c);
            far2 += m * m;
        }
        best = std::min(best, std::max(std::sqrt(far2) - b.radius, 0.0));
    }
    return best;
}

std::pair<double, double> plateau(double s) {
    if (s <= -1.0 || s >= 2.0) return {0.0, 0.0};
    if (s < 0.0) return smoothstep01(s + 1.0);
    if (s <= 1.0) return {1.0, 0.0};
    auto [v, dv] = smoothstep01(2.0 - s);
    return {v, -dv};
}

// psi_nu and its gradient: product of per-axis plateaus equal to 1 on Q_nu
// and supported in Q_nu*.
std::pair<double, Vec> cube_bump(const DyadicCube& q, const Vec& x) {
    const int n = static_cast<int>(x.size());
    Vec grad = Vec::Zero(n);
    double value = 1.0;
    double dvals[8];
    double pvals[8];
    for (int d = 0; d < n; ++d) {
        double s = (x[d] - q.corner[d]) / q.side;
        auto [p, dp] = plateau(s);
        if (p == 0.0) return {0.0, Vec::Zero(n)};
        pvals[d] = p;
        dvals[d] = dp / q.side;
        value *= p;
    }
    for (int d = 0; d < n; ++d) grad[d] = value / pvals[d] * dvals[d];
    return {value, grad};
}

std::uint64_t hash_cells(const long long* c, int n, int level) {
    std::uint64_t h = 1469598103934665603ULL ^ static_cast<std::uint64_t>(level);
    for (int d = 0; d < n; ++d) {
        h ^= static_cast<std::uint64_t>(c[d]) + 0x9e3779b97f4a7c15ULL;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

RegularizedDistance::RegularizedDistance(const BallUnionSet& e, int exponent)
    : balls_(e.balls()), p_(exponent) {
    if (p_ < 1) throw InvalidConfig("regularized distance exponent must be >= 1");
    lower_factor_ = std::pow(static_cast<double>(balls_.size()), -1.0 / p_);
}

double RegularizedDistance::value(const Vec& x) const {
    double hmin = std::numeric_limits<double>::infinity();
    for (const auto& b : balls_) {
        hmin = std::min(hmin, std::max((x - b.center).norm() - b.radius, 0.0));
    }
    if (hmin == 0.0) return 0.0;
    double sum = 0.0;
    for (const auto& b : balls_) {
        double h = std::max((x - b.center).norm() - b.radius, 0.0);
        sum += std::pow(hmin / h, p_);
    }
    return hmin * std::pow(sum, -1.0 / p_);
}

std::pair<double, Vec> RegularizedDistance::value_and_grad(const Vec& x) const {
    const int n = static_cast<int>(x.size());
    double hmin = std::numeric_limits<double>::infinity();
    for (const auto& b : balls_) {
        hmin = std::min(hmin, std::max((x - b.center).norm() - b.radius, 0.0));
    }
    if (hmin == 0.0) return {0.0, Vec::Zero(n)};
    double sum = 0.0;
    for (const auto& b : balls_) {
        double h = (x - b.center).norm() - b.radius;
        sum += std::pow(hmin / h, p_);
    }
    double delta = hmin * std::pow(sum, -1.0 / p_);
    Vec grad = Vec::Zero(n);
    for (const auto& b : balls_) {
        double dist = (x - b.center).norm();
        double h = dist - b.radius;
        double w = std::pow(delta / h, p_ + 1);
        grad += w * (x - b.center) / dist;
    }
    return {delta, grad};
}

void WhitneyDecomposition::build_index() {
    levels_.clear();
    int max_level = 0;
    for (const auto& q : cubes) max_level = std::max(max_level, q.level);
    levels_.resize(max_level + 1);
    for (int l = 0; l <= max_level; ++l) {
        levels_[l].side = 2.0 * root_halfwidth / std::pow(2.0, l);
    }
    const int n = cubes.empty() ? 0 : static_cast<int>(cubes[0].corner.size());
    long long cell[8];
    for (std::size_t i = 0; i < cubes.size(); ++i) {
        const auto& q = cubes[i];
        for (int d = 0; d < n; ++d) {
            cell[d] = std::llround((q.corner[d] + root_halfwidth) / q.side);
        }
        levels_[q.level].cells[hash_cells(cell, n, q.level)].push_back(
            static_cast<int>(i));
    }
}

std::vector<int> WhitneyDecomposition::covering_dilations(const Vec& x) const {
    std::vector<int> out;
    if (cubes.empty()) return out;
    const int n = static_cast<int>(cubes[0].corner.size());
    long long base[8];
    long long cell[8];
    for (std::size_t l = 0; l < levels_.size(); ++l) {
        const auto& li = levels_[l];
        if (li.cells.empty()) continue;
        for (int d = 0; d < n; ++d) {
            base[d] = static_cast<long long>(
                std::floor((x[d] + root_halfwidth) / li.side));
        }
        int offsets = 1;
        for (int d = 0; d < n; ++d) offsets *= 3;
        for (int o = 0; o < offsets; ++o) {
            int t = o;
            for (int d = 0; d < n; ++d) {
                cell[d] = base[d] + (t % 3) - 1;
                t /= 3;
            }
            auto it = li.cells.find(hash_cells(cell, n, static_cast<int>(l)));
            if (it == li.cells.end()) continue;
            for (int id : it->second) {
                if (cubes[id].dilation_contains(x)) out.push_back(id);
            }
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

int WhitneyDecomposition::containing_cube(const Vec& x) const {
    if (cubes.empty()) return -1;
    const int n = static_cast<int>(cubes[0].corner.size());
    long long cell[8];
    for (std::size_t l = 0; l < levels_.size(); ++l) {
        const auto& li = levels_[l];
        if (li.cells.empty()) continue;
        for (int d = 0; d < n; ++d) {
            cell[d] = static_cast<long long>(
                std::floor((x[d] + root_halfwidth) / li.side));
        }
        auto it = li.cells.find(hash_cells(cell, n, static_cast<int>(l)));
        if (it == li.cells.end()) continue;
        for (int id : it->second) {
            if (cubes[id].contains(x)) return id;
        }
    }
    return -1;
}

int WhitneyDecomposition::probe_overlap_bound() const {
    if (cubes.empty()) return 0;
    const int n = static_cast<int>(cubes[0].corner.size());
    const int corners = 1 << n;
    std::size_t best = 0;
    Vec probe(n);
    for (const auto& q : cubes) {
        best = std::max(best, covering_dilations(q.center()).size());
        for (int mask = 0; mask < corners; ++mask) {
            for (int d = 0; d < n; ++d) {
                probe[d] = (mask >> d) & 1 ? q.corner[d] + q.side : q.corner[d];
            }
            best = std::max(best, covering_dilations(probe).size());
            for (int d = 0; d < n; ++d) {
                probe[d] = (mask >> d) & 1 ? q.corner[d] + 2.0 * q.side
                                           : q.corner[d] - q.side;
            }
            best = std::max(best, covering_dilations(probe).size());
        }
    }
    return static_cast<int>(best);
}

Ball find_anchor_ball(const BallUnionSet& e, double c0,
                      const std::optional<WitnessCaps>& caps) {
    const int n = e.dim();
    const Ball& seed = e.balls()[e.largest_ball()];
    Vec dir = Vec::Zero(n);
    dir[0] = 1.0;
    const double target = c0 / 2.0;

    double t_hi = seed.radius + target;
    while (e.distance(seed.center + t_hi * dir) <= target) t_hi *= 2.0;
    double t_lo = 0.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (t_lo + t_hi);
        if (e.distance(seed.center + mid * dir) < target) {
            t_lo = mid;
        } else {
            t_hi = mid;
        }
        if (t_hi - t_lo < 1e-12) break;
    }
    Vec star = seed.center + 0.5 * (t_lo + t_hi) * dir;
    if (std::abs(e.distance(star) - target) > 1e-10) {
        throw Error("anchor bisection failed to localize d = c0/2");
    }
    return interior_ball_query(e, star, c0, caps);
}

WhitneyDecomposition decompose(const BallUnionSet& e, double c0, double eta,
                               const DecomposeConfig& config) {
    const int n = e.dim();
    if (std::abs(e.diameter() - 1.0) > 1e-9) {
        throw InvalidConfig("decompose expects E normalized to unit diameter");
    }
    if (!(eta > 0.0 && eta < c0 / 8.0)) {
        throw InvalidConfig("decompose requires 0 < eta < c0/8");
    }

    double reach = 0.0;
    for (const auto& b : e.balls()) {
        reach = std::max(reach, b.center.cwiseAbs().maxCoeff() + b.radius);
    }
    const double L = reach + c0 + 2.0;
    const double sqrt_n = std::sqrt(static_cast<double>(n));

    WhitneyDecomposition out;
    out.set = std::make_shared<BallUnionSet>(e);
    out.root_halfwidth = L;
    out.eta = eta;
    out.c0 = c0;

    std::vector<DyadicCube> stack;
    stack.push_back(DyadicCube{Vec::Constant(n, -L), 2.0 * L, 0});
    std::int64_t processed = 0;
    while (!stack.empty()) {
        DyadicCube q = stack.back();
        stack.pop_back();
        if (++processed > config.cube_cap) {
            throw BudgetExceeded("cube budget exceeded during decomposition");
        }
        Vec hi = q.corner.array() + q.side;
        double dist = box_set_distance(q.corner, hi, e);
        double diam = q.side * sqrt_n;
        if (dist >= diam) {
            out.cubes.push_back(q);
            continue;
        }
        if (e.distance(q.center()) + 1.5 * sqrt_n * q.side <= eta) {
            out.pruned.push_back(q);
            continue;
        }
        const int children = 1 << n;
        for (int mask = 0; mask < children; ++mask) {
            DyadicCube child;
            child.side = q.side / 2.0;
            child.level = q.level + 1;
            child.corner = q.corner;
            for (int d = 0; d < n; ++d) {
                if ((mask >> d) & 1) child.corner[d] += child.side;
            }
            stack.push_back(child);
        }
    }

    // Realized constants of c delta_nu <= d(x) <= C delta_nu over Q_nu*.
    out.c_low = std::numeric_limits<double>::infinity();
    out.c_high = 0.0;
    for (const auto& q : out.cubes) {
        Vec lo = q.corner.array() - q.side;
        Vec hi = q.corner.array() + 2.0 * q.side;
        out.c_low = std::min(out.c_low, box_set_distance(lo, hi, e) / q.side);
        out.c_high = std::max(out.c_high, box_set_distance_upper(lo, hi, e) / q.side);
    }
    out.c3 = c0 / out.c_high;

    out.witness.assign(out.cubes.size(), std::nullopt);
    for (std::size_t i = 0; i < out.cubes.size(); ++i) {
        if (out.cubes[i].side <= out.c3) {
            out.witness[i] = interior_ball_query(e, out.cubes[i].center(), c0,
                                                 config.witness_caps);
        }
    }

    out.anchor = find_anchor_ball(e, c0, config.witness_caps);
    double contain = 0.0;
    for (const auto& b : e.balls()) {
        contain = std::max(
            contain, ((b.center - out.anchor.center).norm() + b.radius) /
                         out.anchor.radius);
    }
    out.anchor_containment = contain;

    out.build_index();
    out.overlap_bound = out.probe_overlap_bound();
    return out;
}

BumpEval theta_bump(const WhitneyDecomposition& d, int nu, const Vec& x) {
    const int n = static_cast<int>(x.size());
    BumpEval out;
    out.grad = Vec::Zero(n);
    if (nu < 0 || nu >= static_cast<int>(d.cubes.size())) {
        throw OutOfRange("theta_bump cube index out of range");
    }
    if (!d.cubes[nu].dilation_contains(x)) return out;
    for (const auto& ab : active_bumps(d, x)) {
        if (ab.cube == nu) {
            out.value = ab.theta;
            out.grad = ab.grad;
            break;
        }
    }
    return out;
}

std::vector<ActiveBump> active_bumps(const WhitneyDecomposition& d, const Vec& x) {
    const int n = static_cast<int>(x.size());
    std::vector<ActiveBump> out;
    std::vector<int> ids = d.covering_dilations(x);
    if (ids.empty()) return out;

    std::vector<double> psi(ids.size());
    std::vector<Vec> dpsi(ids.size());
    double total = 0.0;
    Vec dtotal = Vec::Zero(n);
    for (std::size_t k = 0; k < ids.size(); ++k) {
        auto [v, g] = cube_bump(d.cubes[ids[k]], x);
        psi[k] = v;
        dpsi[k] = g;
        total += v;
        dtotal += g;
    }
    if (total <= 0.0) return out;

    out.reserve(ids.size());
    for (std::size_t k = 0; k < ids.size(); ++k) {
        ActiveBump ab;
        ab.cube = ids[k];
        ab.theta = psi[k] / total;
        ab.grad = dpsi[k] / total - psi[k] / (total * total) * dtotal;
        out.push_back(std::move(ab));
    }
    return out;
}

WhitneyStats compute_whitney_stats(const WhitneyDecomposition& d,
                                   const RegularizedDistance& rd,
                                   std::int64_t samples, std::uint64_t seed) {
    WhitneyStats st;
    if (d.cubes.empty()) return st;
    const int n = static_cast<int>(d.cubes[0].corner.size());
    Rng rng = Rng::forked(seed, 0x77686974ULL);
    st.radius_low = std::numeric_limits<double>::infinity();

    std::int64_t per_cube =
        std::max<std::int64_t>(1, samples / static_cast<std::int64_t>(d.cubes.size()));
    const int corners = 1 << n;

    for (std::size_t nu = 0; nu < d.cubes.size(); ++nu) {
        const auto& q = d.cubes[nu];
        const bool small = d.is_small(nu);
        if (small) {
            const Ball& b = *d.witness[nu];
            // Q* subset of B(z_nu, C r_nu): exact over the dilation corners.
            for (int mask = 0; mask < corners; ++mask) {
                Vec corner(n);
                for (int k = 0; k < n; ++k) {
                    corner[k] = (mask >> k) & 1 ? q.corner[k] + 2.0 * q.side
                                                : q.corner[k] - q.side;
                }
                st.containment_C = std::max(
                    st.containment_C, (corner - b.center).norm() / b.radius);
            }
        }
        Vec lo = q.corner.array() - q.side;
        Vec hi = q.corner.array() + 2.0 * q.side;
        for (std::int64_t s = 0; s < per_cube; ++s) {
            Vec x = rng.in_box(lo, hi);
            double delta = rd.value(x);
            if (delta <= 0.0) continue;
            ++st.samples;
            if (small) {
                const Ball& b = *d.witness[nu];
                st.radius_low = std::min(st.radius_low, b.radius / delta);
                st.radius_high = std::max(st.radius_high, b.radius / delta);
                st.center_offset_C = std::max(
                    st.center_offset_C, (b.center - x).norm() / delta);
                for (int mu : d.covering_dilations(x)) {
                    if (mu == static_cast<int>(nu) || !d.is_small(mu)) continue;
                    const Ball& bm = *d.witness[mu];
                    st.pair_containment_C = std::max(
                        st.pair_containment_C,
                        ((bm.center - b.center).norm() + b.radius) / bm.radius);
                }
            }
            BumpEval be = theta_bump(d, static_cast<int>(nu), x);
            st.bump_grad_C = std::max(st.bump_grad_C, be.grad.norm() * q.side);
        }
    }
    if (!std::isfinite(st.radius_low)) st.radius_low = 0.0;
    return st;
}

}  // namespace epsext
