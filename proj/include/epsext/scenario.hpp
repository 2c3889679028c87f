#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "epsext/extension.hpp"
#include "epsext/verification.hpp"

namespace epsext {

using Json = nlohmann::ordered_json;

struct SamplingConfig {
    std::int64_t samples = 10000;
    std::int64_t pairs = 10000;
    std::int64_t grid_resolution = 64;
    std::uint64_t seed = 1;
};

struct CapsConfig {
    std::int64_t cube_cap = 1000000;
    std::int64_t tuple_cap = 100000;
};

struct ThresholdConfig {
    double max_realized_C = 50.0;
    double rigid_tol = 1e-10;
    double far_tol = 1e-12;
    double near_tol = 1e-12;
    double fd_tol = 1e-6;
    double roundtrip_tol = 1e-8;
    double partition_tol = 1e-12;
};

/// One scenario = one config file = one report.
struct ScenarioConfig {
    int schema_version = 1;
    int n = 2;
    double epsilon_budget = 0.0;
    double c0 = 0.5;
    double C1 = 64.0;   // declared interior-ball caps, enforced at
    double c2 = 0.05;   // construction-time witness queries
    std::optional<double> eta;
    int p = 8;
    std::vector<Ball> balls;
    Json phi;  // canonicalized source-map record
    SamplingConfig sampling;
    CapsConfig caps;
    ThresholdConfig thresholds;
};

ScenarioConfig parse_scenario_config(const Json& j);
ScenarioConfig load_scenario_config(const std::string& path);
Json scenario_config_to_json(const ScenarioConfig& config);

SourceMap parse_source_map(const Json& j, int n, double budget);

/// Assembled pipeline outcome: the full report document plus the pass flag.
struct ScenarioResult {
    Json report;
    bool pass = false;
};

BuildConfig build_config_from(const ScenarioConfig& config);
VerifyConfig verify_config_from(const ScenarioConfig& config);

ScenarioResult run_scenario(const ScenarioConfig& config);

/// CSV field dump: x_1..x_n, Phi_1..Phi_n, sigma_min, sigma_max, region over
/// a uniform cell-center grid of the root box. `threads` parallelizes the
/// evaluations without changing the output bytes.
std::string dump_field_csv(const ExtensionStructure& ext,
                           std::int64_t grid_resolution, int threads = 1);

/// Alignment driver config: labelled points plus block-scan parameters.
struct AlignConfig {
    int schema_version = 1;
    int n = 2;
    std::vector<Vec> ys;
    std::vector<Vec> zs;
    double eta = 0.1;
    bool proper = false;
    std::int64_t tuple_cap = 100000;
};

AlignConfig parse_align_config(const Json& j);
AlignConfig load_align_config(const std::string& path);
Json align_config_to_json(const AlignConfig& config);

Json run_alignment(const AlignConfig& config);

}  // namespace epsext
