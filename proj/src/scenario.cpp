#include "epsext/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

#include "epsext/alignment.hpp"

namespace epsext {

namespace {

Json vec_to_json(const Vec& v) {
    Json a = Json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

Vec vec_from_json(const Json& j, int n, const char* what) {
    if (!j.is_array() || static_cast<int>(j.size()) != n) {
        throw InvalidConfig(std::string(what) + " must be an array of length n");
    }
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = j[i].get<double>();
    return v;
}

Json mat_to_json(const Mat& m) {
    Json rows = Json::array();
    for (int r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Mat mat_from_json(const Json& j, int n, const char* what) {
    if (!j.is_array() || static_cast<int>(j.size()) != n) {
        throw InvalidConfig(std::string(what) + " must be an n x n matrix");
    }
    Mat m(n, n);
    for (int r = 0; r < n; ++r) {
        if (!j[r].is_array() || static_cast<int>(j[r].size()) != n) {
            throw InvalidConfig(std::string(what) + " must be an n x n matrix");
        }
        for (int c = 0; c < n; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
    if (!j.contains(key) || j[key].is_null()) return fallback;
    return j[key].get<T>();
}

}  // namespace

SourceMap parse_source_map(const Json& j, int n, double budget) {
    if (!j.is_object() || !j.contains("kind")) {
        throw InvalidConfig("source map record needs a 'kind'");
    }
    const std::string kind = j["kind"].get<std::string>();
    if (kind == "motion") {
        Mat t = j.contains("linear") ? mat_from_json(j["linear"], n, "linear")
                                     : Mat::Identity(n, n);
        Vec x0 = j.contains("offset") ? vec_from_json(j["offset"], n, "offset")
                                      : Vec::Zero(n);
        return SourceMap::motion(EuclideanMotion(std::move(t), std::move(x0)));
    }
    if (kind == "slow_twist") {
        if (!j.contains("amplitudes")) {
            throw InvalidConfig("slow_twist needs 'amplitudes'");
        }
        const auto& amps = j["amplitudes"];
        Vec a(static_cast<int>(amps.size()));
        for (int i = 0; i < a.size(); ++i) a[i] = amps[i].get<double>();
        Mat frame = j.contains("frame") && !j["frame"].is_null()
                        ? mat_from_json(j["frame"], n, "frame")
                        : Mat::Identity(n, n);
        return SourceMap::slow_twist(std::move(a), std::move(frame), budget);
    }
    if (kind == "slide") {
        if (!j.contains("amplitude") || !j.contains("frequency")) {
            throw InvalidConfig("slide needs 'amplitude' and 'frequency'");
        }
        Vec a = vec_from_json(j["amplitude"], n, "amplitude");
        Mat w = mat_from_json(j["frequency"], n, "frequency");
        return SourceMap::slide(std::move(a), std::move(w), budget);
    }
    if (kind == "compose") {
        if (!j.contains("parts") || !j["parts"].is_array() || j["parts"].empty()) {
            throw InvalidConfig("compose needs a nonempty 'parts' array");
        }
        std::vector<SourceMap> parts;
        for (const auto& p : j["parts"]) {
            parts.push_back(parse_source_map(p, n, budget));
        }
        return SourceMap::compose(std::move(parts));
    }
    throw InvalidConfig("unknown source map kind '" + kind + "'");
}

namespace {

// Rebuild the phi record with a fixed key order so config echoes are
// byte-stable regardless of how the input file ordered its keys.
Json canonical_phi(const Json& j, int n) {
    Json out;
    const std::string kind = j["kind"].get<std::string>();
    out["kind"] = kind;
    if (kind == "motion") {
        out["linear"] = j.contains("linear")
                            ? j["linear"]
                            : mat_to_json(Mat::Identity(n, n));
        out["offset"] =
            j.contains("offset") ? j["offset"] : vec_to_json(Vec::Zero(n));
    } else if (kind == "slow_twist") {
        out["amplitudes"] = j["amplitudes"];
        out["frame"] = j.contains("frame") && !j["frame"].is_null()
                           ? j["frame"]
                           : mat_to_json(Mat::Identity(n, n));
    } else if (kind == "slide") {
        out["amplitude"] = j["amplitude"];
        out["frequency"] = j["frequency"];
    } else if (kind == "compose") {
        Json parts = Json::array();
        for (const auto& p : j["parts"]) parts.push_back(canonical_phi(p, n));
        out["parts"] = std::move(parts);
    }
    return out;
}

}  // namespace

ScenarioConfig parse_scenario_config(const Json& j) {
    ScenarioConfig cfg;
    cfg.schema_version = get_or<int>(j, "schema_version", 1);
    if (cfg.schema_version != 1) {
        throw InvalidConfig("unsupported schema_version");
    }
    if (!j.contains("n") || !j.contains("epsilon_budget") || !j.contains("E") ||
        !j.contains("phi")) {
        throw InvalidConfig("scenario config needs n, epsilon_budget, E, phi");
    }
    cfg.n = j["n"].get<int>();
    if (cfg.n < 1 || cfg.n > 8) throw InvalidConfig("n must be in [1, 8]");
    cfg.epsilon_budget = j["epsilon_budget"].get<double>();
    if (cfg.epsilon_budget <= 0.0) {
        throw InvalidConfig("epsilon_budget must be positive");
    }
    cfg.c0 = get_or<double>(j, "c0", 0.5);
    if (cfg.c0 <= 0.0 || cfg.c0 > 1.0) {
        throw InvalidConfig("c0 must lie in (0, 1]");
    }
    cfg.C1 = get_or<double>(j, "C1", 64.0);
    cfg.c2 = get_or<double>(j, "c2", 0.05);
    if (cfg.C1 <= 1.0 || cfg.c2 <= 0.0) {
        throw InvalidConfig("geometry constants need C1 > 1 and c2 > 0");
    }
    if (j.contains("eta") && !j["eta"].is_null()) {
        cfg.eta = j["eta"].get<double>();
    }
    cfg.p = get_or<int>(j, "p", 8);
    if (cfg.p < 1) throw InvalidConfig("p must be >= 1");

    const auto& e = j["E"];
    if (!e.is_array() || e.empty()) {
        throw InvalidConfig("E must be a nonempty ball list");
    }
    for (const auto& b : e) {
        if (!b.contains("center") || !b.contains("radius")) {
            throw InvalidConfig("each ball needs 'center' and 'radius'");
        }
        Ball ball;
        ball.center = vec_from_json(b["center"], cfg.n, "ball center");
        ball.radius = b["radius"].get<double>();
        if (ball.radius <= 0.0) throw InvalidConfig("ball radius must be positive");
        cfg.balls.push_back(std::move(ball));
    }

    cfg.phi = canonical_phi(j["phi"], cfg.n);
    // Validate the record eagerly so malformed maps fail as ConfigError.
    parse_source_map(cfg.phi, cfg.n, cfg.epsilon_budget);

    if (j.contains("sampling")) {
        const auto& s = j["sampling"];
        cfg.sampling.samples = get_or<std::int64_t>(s, "samples", 10000);
        cfg.sampling.pairs = get_or<std::int64_t>(s, "pairs", 10000);
        cfg.sampling.grid_resolution =
            get_or<std::int64_t>(s, "grid_resolution", 64);
        cfg.sampling.seed = get_or<std::uint64_t>(s, "seed", 1);
    }
    if (cfg.sampling.samples < 1 || cfg.sampling.pairs < 1 ||
        cfg.sampling.grid_resolution < 2) {
        throw InvalidConfig("sampling counts must be positive");
    }
    if (j.contains("caps")) {
        const auto& c = j["caps"];
        cfg.caps.cube_cap = get_or<std::int64_t>(c, "cube_cap", 1000000);
        cfg.caps.tuple_cap = get_or<std::int64_t>(c, "tuple_cap", 100000);
    }
    if (cfg.caps.cube_cap < 1 || cfg.caps.tuple_cap < 1) {
        throw InvalidConfig("caps must be positive");
    }
    if (j.contains("thresholds")) {
        const auto& t = j["thresholds"];
        cfg.thresholds.max_realized_C =
            get_or<double>(t, "max_realized_C", 50.0);
        cfg.thresholds.rigid_tol = get_or<double>(t, "rigid_tol", 1e-10);
        cfg.thresholds.far_tol = get_or<double>(t, "far_tol", 1e-12);
        cfg.thresholds.near_tol = get_or<double>(t, "near_tol", 1e-12);
        cfg.thresholds.fd_tol = get_or<double>(t, "fd_tol", 1e-6);
        cfg.thresholds.roundtrip_tol = get_or<double>(t, "roundtrip_tol", 1e-8);
        cfg.thresholds.partition_tol = get_or<double>(t, "partition_tol", 1e-12);
    }
    return cfg;
}

ScenarioConfig load_scenario_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidConfig("cannot open config file: " + path);
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw InvalidConfig(std::string("config parse error: ") + e.what());
    }
    return parse_scenario_config(j);
}

Json scenario_config_to_json(const ScenarioConfig& cfg) {
    Json j;
    j["schema_version"] = cfg.schema_version;
    j["n"] = cfg.n;
    j["epsilon_budget"] = cfg.epsilon_budget;
    j["c0"] = cfg.c0;
    j["C1"] = cfg.C1;
    j["c2"] = cfg.c2;
    if (cfg.eta) {
        j["eta"] = *cfg.eta;
    } else {
        j["eta"] = nullptr;
    }
    j["p"] = cfg.p;
    Json balls = Json::array();
    for (const auto& b : cfg.balls) {
        Json jb;
        jb["center"] = vec_to_json(b.center);
        jb["radius"] = b.radius;
        balls.push_back(std::move(jb));
    }
    j["E"] = std::move(balls);
    j["phi"] = cfg.phi;
    Json s;
    s["samples"] = cfg.sampling.samples;
    s["pairs"] = cfg.sampling.pairs;
    s["grid_resolution"] = cfg.sampling.grid_resolution;
    s["seed"] = cfg.sampling.seed;
    j["sampling"] = std::move(s);
    Json c;
    c["cube_cap"] = cfg.caps.cube_cap;
    c["tuple_cap"] = cfg.caps.tuple_cap;
    j["caps"] = std::move(c);
    Json t;
    t["max_realized_C"] = cfg.thresholds.max_realized_C;
    t["rigid_tol"] = cfg.thresholds.rigid_tol;
    t["far_tol"] = cfg.thresholds.far_tol;
    t["near_tol"] = cfg.thresholds.near_tol;
    t["fd_tol"] = cfg.thresholds.fd_tol;
    t["roundtrip_tol"] = cfg.thresholds.roundtrip_tol;
    t["partition_tol"] = cfg.thresholds.partition_tol;
    j["thresholds"] = std::move(t);
    return j;
}

BuildConfig build_config_from(const ScenarioConfig& cfg) {
    BuildConfig b;
    b.epsilon_budget = cfg.epsilon_budget;
    b.c0 = cfg.c0;
    b.eta = cfg.eta;
    b.softmin_exponent = cfg.p;
    b.distortion_pairs = cfg.sampling.pairs;
    b.geometry_samples = cfg.sampling.samples;
    b.consistency_samples = std::max<std::int64_t>(cfg.sampling.samples / 2, 1000);
    b.anchor_samples = std::max<std::int64_t>(cfg.sampling.samples / 4, 500);
    b.stats_samples = std::max<std::int64_t>(cfg.sampling.samples / 2, 1000);
    b.seed = cfg.sampling.seed;
    b.decompose.cube_cap = cfg.caps.cube_cap;
    b.decompose.witness_caps = WitnessCaps{cfg.C1, cfg.c2};
    return b;
}

VerifyConfig verify_config_from(const ScenarioConfig& cfg) {
    VerifyConfig v;
    v.samples = cfg.sampling.samples;
    v.pairs = cfg.sampling.pairs;
    v.grid_resolution = cfg.sampling.grid_resolution;
    v.fd_samples = std::max<std::int64_t>(cfg.sampling.samples / 10, 200);
    v.roundtrip_samples = std::max<std::int64_t>(cfg.sampling.samples / 10, 200);
    v.seed = cfg.sampling.seed;
    v.max_realized_C = cfg.thresholds.max_realized_C;
    v.rigid_tol = cfg.thresholds.rigid_tol;
    v.far_tol = cfg.thresholds.far_tol;
    v.near_tol = cfg.thresholds.near_tol;
    v.fd_tol = cfg.thresholds.fd_tol;
    v.roundtrip_tol = cfg.thresholds.roundtrip_tol;
    return v;
}

namespace {

Json geometry_to_json(const GeometryReport& g) {
    Json j;
    j["c0"] = g.c0;
    j["C1_achieved"] = g.C1_achieved;
    j["c2_achieved"] = g.c2_achieved;
    j["sample_count"] = g.sample_count;
    j["worst_point"] = vec_to_json(g.worst_point);
    return j;
}

Json decomposition_to_json(const ExtensionStructure& ext) {
    const auto& d = ext.decomp();
    Json j;
    j["cube_count"] = d.cubes.size();
    std::size_t small = 0;
    for (std::size_t i = 0; i < d.cubes.size(); ++i) {
        if (d.is_small(i)) ++small;
    }
    j["small_cube_count"] = small;
    j["pruned_count"] = d.pruned.size();
    j["root_halfwidth"] = d.root_halfwidth;
    j["c_low"] = d.c_low;
    j["c_high"] = d.c_high;
    j["c3"] = d.c3;
    j["overlap_bound"] = d.overlap_bound;
    j["anchor_center"] = vec_to_json(d.anchor.center);
    j["anchor_radius"] = d.anchor.radius;
    j["anchor_containment"] = d.anchor_containment;
    const auto& w = ext.whitney_stats;
    Json ws;
    ws["containment_C"] = w.containment_C;
    ws["radius_low"] = w.radius_low;
    ws["radius_high"] = w.radius_high;
    ws["center_offset_C"] = w.center_offset_C;
    ws["pair_containment_C"] = w.pair_containment_C;
    ws["bump_grad_C"] = w.bump_grad_C;
    ws["samples"] = w.samples;
    j["stats"] = std::move(ws);
    return j;
}

Json motions_to_json(const ExtensionStructure& ext) {
    Json j;
    j["anchor_sup_error"] = ext.assignment().anchor_sup_error;
    const auto& c = ext.consistency;
    j["sup_value_gap"] = c.sup_value_gap;
    j["sup_grad_gap"] = c.sup_grad_gap;
    j["near_E_value_gap"] = c.near_E_value_gap;
    j["near_E_grad_gap"] = c.near_E_grad_gap;
    j["pair_count"] = c.pair_count;
    j["seed"] = c.seed;
    return j;
}

Json verification_to_json(const VerificationReport& v) {
    Json j;
    j["eps_input"] = v.eps_input;
    j["distortion_spectrum_sup"] = v.distortion_spectrum_sup;
    j["bilipschitz_sup"] = v.bilipschitz_sup;
    j["far_field_max_err"] = v.far_field_max_err;
    j["near_field_max_err"] = v.near_field_max_err;
    j["det_sign"] = v.det_sign;
    j["det_consistent"] = v.det_consistent;
    j["injectivity_collisions"] = v.injectivity_collisions;
    j["fd_grad_max_rel_err"] = v.fd_grad_max_rel_err;
    j["roundtrip_max_err"] = v.roundtrip_max_err;
    j["realized_C"] = v.realized_C;
    j["pass"] = v.pass;
    return j;
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
    BallUnionSet e(cfg.balls);
    SourceMap phi = parse_source_map(cfg.phi, cfg.n, cfg.epsilon_budget);
    ExtensionStructure ext = build_extension(e, phi, build_config_from(cfg));
    VerificationReport ver = full_report(ext, verify_config_from(cfg));

    ScenarioResult out;
    out.pass = ver.pass;
    Json& j = out.report;
    j["schema_version"] = 1;
    j["config"] = scenario_config_to_json(cfg);
    j["geometry"] = geometry_to_json(ext.geometry);
    j["decomposition"] = decomposition_to_json(ext);
    j["motions"] = motions_to_json(ext);
    Json ver_json = verification_to_json(ver);
    Json dist;
    dist["eps_pairwise"] = ext.distortion.eps_pairwise;
    dist["eps_matrix"] = ext.distortion.eps_matrix;
    dist["sample_count"] = ext.distortion.sample_count;
    ver_json["distortion"] = std::move(dist);
    j["verification"] = std::move(ver_json);
    j["pass"] = ver.pass;
    Json timings;
    timings["cube_count"] = ext.decomp().cubes.size();
    timings["spectrum_samples"] = ver.spectrum_samples;
    timings["pair_samples"] = ver.pair_samples;
    timings["grid_points"] = ver.grid_points;
    j["timings"] = std::move(timings);
    return out;
}

std::string dump_field_csv(const ExtensionStructure& ext,
                           std::int64_t grid_resolution, int threads) {
    const int n = ext.dim();
    const double L = ext.decomp().root_halfwidth;
    const double h = 2.0 * L / static_cast<double>(grid_resolution);

    std::int64_t total = 1;
    for (int d = 0; d < n; ++d) total *= grid_resolution;

    std::vector<std::string> rows(total);
    auto worker = [&](std::int64_t begin, std::int64_t end) {
        Vec x(n);
        char buf[64];
        for (std::int64_t idx = begin; idx < end; ++idx) {
            std::int64_t t = idx;
            for (int d = 0; d < n; ++d) {
                x[d] = -L + (static_cast<double>(t % grid_resolution) + 0.5) * h;
                t /= grid_resolution;
            }
            Vec y = ext.eval(x);
            Mat g = ext.grad(x);
            Eigen::SelfAdjointEigenSolver<Mat> es(g.transpose() * g);
            double smin = std::sqrt(std::max(es.eigenvalues()(0), 0.0));
            double smax = std::sqrt(std::max(es.eigenvalues()(n - 1), 0.0));
            Region r = ext.region(x);
            std::string line;
            for (int d = 0; d < n; ++d) {
                std::snprintf(buf, sizeof(buf), "%.17g", x[d]);
                line += buf;
                line += ',';
            }
            for (int d = 0; d < n; ++d) {
                std::snprintf(buf, sizeof(buf), "%.17g", y[d]);
                line += buf;
                line += ',';
            }
            std::snprintf(buf, sizeof(buf), "%.17g", smin);
            line += buf;
            line += ',';
            std::snprintf(buf, sizeof(buf), "%.17g", smax);
            line += buf;
            line += ',';
            line += r == Region::NEAR ? "NEAR" : (r == Region::FAR ? "FAR" : "BLEND");
            line += '\n';
            rows[idx] = std::move(line);
        }
    };

    threads = std::max(1, threads);
    if (threads == 1) {
        worker(0, total);
    } else {
        std::vector<std::thread> pool;
        std::int64_t chunk = (total + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            std::int64_t begin = t * chunk;
            std::int64_t end = std::min(total, begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(worker, begin, end);
        }
        for (auto& t : pool) t.join();
    }

    std::string out;
    for (int d = 1; d <= n; ++d) out += "x_" + std::to_string(d) + ",";
    for (int d = 1; d <= n; ++d) out += "Phi_" + std::to_string(d) + ",";
    out += "sigma_min,sigma_max,region\n";
    for (const auto& r : rows) out += r;
    return out;
}

AlignConfig parse_align_config(const Json& j) {
    AlignConfig cfg;
    cfg.schema_version = get_or<int>(j, "schema_version", 1);
    if (cfg.schema_version != 1) throw InvalidConfig("unsupported schema_version");
    if (!j.contains("n") || !j.contains("ys") || !j.contains("zs")) {
        throw InvalidConfig("align config needs n, ys, zs");
    }
    cfg.n = j["n"].get<int>();
    if (cfg.n < 1 || cfg.n > 8) throw InvalidConfig("n must be in [1, 8]");
    for (const auto& p : j["ys"]) {
        cfg.ys.push_back(vec_from_json(p, cfg.n, "source point"));
    }
    for (const auto& p : j["zs"]) {
        cfg.zs.push_back(vec_from_json(p, cfg.n, "image point"));
    }
    cfg.eta = get_or<double>(j, "eta", 0.1);
    cfg.proper = get_or<bool>(j, "proper", false);
    cfg.tuple_cap = get_or<std::int64_t>(j, "tuple_cap", 100000);
    if (cfg.tuple_cap < 1) throw InvalidConfig("tuple_cap must be positive");
    return cfg;
}

AlignConfig load_align_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidConfig("cannot open config file: " + path);
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw InvalidConfig(std::string("config parse error: ") + e.what());
    }
    return parse_align_config(j);
}

Json align_config_to_json(const AlignConfig& cfg) {
    Json j;
    j["schema_version"] = cfg.schema_version;
    j["n"] = cfg.n;
    Json ys = Json::array();
    for (const auto& p : cfg.ys) ys.push_back(vec_to_json(p));
    j["ys"] = std::move(ys);
    Json zs = Json::array();
    for (const auto& p : cfg.zs) zs.push_back(vec_to_json(p));
    j["zs"] = std::move(zs);
    j["eta"] = cfg.eta;
    j["proper"] = cfg.proper;
    j["tuple_cap"] = cfg.tuple_cap;
    return j;
}

Json run_alignment(const AlignConfig& cfg) {
    LabelledPair pair{cfg.ys, cfg.zs};
    ProcrustesResult pr = procrustes_align(pair, cfg.proper);

    Json j;
    j["schema_version"] = 1;
    j["config"] = align_config_to_json(cfg);
    Json motion;
    motion["linear"] = mat_to_json(pr.motion.linear);
    motion["offset"] = vec_to_json(pr.motion.offset);
    motion["det_sign"] = pr.motion.det_sign();
    j["motion"] = std::move(motion);
    j["max_residual"] = pr.max_residual;

    Json volumes = Json::array();
    for (int l = 1; l <= cfg.n; ++l) {
        if (static_cast<int>(cfg.ys.size()) < l + 1) break;
        MaxSimplexVolume mv = max_simplex_volume(cfg.ys, l, cfg.tuple_cap);
        Json entry;
        entry["l"] = l;
        entry["value"] = mv.value;
        entry["truncated"] = mv.truncated;
        volumes.push_back(std::move(entry));
    }
    j["max_simplex_volumes"] = std::move(volumes);

    if (static_cast<int>(cfg.ys.size()) >= cfg.n + 1) {
        BlockScan scan = eta_block_scan(pair, cfg.eta, cfg.tuple_cap);
        auto blocks_json = [](const std::vector<EtaBlock>& blocks) {
            Json arr = Json::array();
            for (const auto& b : blocks) {
                Json e;
                e["indices"] = b.indices;
                e["volume"] = b.volume;
                e["diam"] = b.diam;
                e["orientation"] = b.orientation;
                arr.push_back(std::move(e));
            }
            return arr;
        };
        Json blocks;
        blocks["positive"] = blocks_json(scan.positive);
        blocks["negative"] = blocks_json(scan.negative);
        blocks["truncated"] = scan.truncated;
        blocks["eta"] = cfg.eta;
        j["eta_blocks"] = std::move(blocks);
    }
    return j;
}

}  // namespace epsext
