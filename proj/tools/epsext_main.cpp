// Command-line driver: one scenario config in, one report or dump out.
//
// Exit codes: 0 success (and pass where applicable), 2 config error,
// 3 assumption failure (distortion budget, witness, frame, cube budget),
// 4 threshold failure (report written, pass = false), 5 I/O error,
// 1 anything else.

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "epsext/scenario.hpp"

namespace {

constexpr int kExitPassFail = 4;
constexpr int kExitConfig = 2;
constexpr int kExitAssumption = 3;
constexpr int kExitIo = 5;

void write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot open " + out_path);
    out << text;
    if (!out) throw std::ios_base::failure("write failed: " + out_path);
}

struct CommonOpts {
    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    std::int64_t grid = 0;
    int threads = 1;
};

epsext::ScenarioConfig load_with_overrides(const CommonOpts& opts) {
    epsext::ScenarioConfig cfg = epsext::load_scenario_config(opts.config_path);
    if (opts.seed) cfg.sampling.seed = *opts.seed;
    if (opts.grid > 0) cfg.sampling.grid_resolution = opts.grid;
    return cfg;
}

int run(const std::string& mode, const CommonOpts& opts) {
    using clock = std::chrono::steady_clock;
    auto t0 = clock::now();
    int status = 0;

    if (mode == "extend") {
        epsext::ScenarioConfig cfg = load_with_overrides(opts);
        epsext::ScenarioResult res = epsext::run_scenario(cfg);
        write_output(res.report.dump(2) + "\n", opts.out_path);
        status = res.pass ? 0 : kExitPassFail;
    } else if (mode == "dump") {
        epsext::ScenarioConfig cfg = load_with_overrides(opts);
        epsext::SourceMap phi =
            epsext::parse_source_map(cfg.phi, cfg.n, cfg.epsilon_budget);
        epsext::BallUnionSet e(cfg.balls);
        epsext::ExtensionStructure ext =
            epsext::build_extension(e, phi, epsext::build_config_from(cfg));
        write_output(epsext::dump_field_csv(ext, cfg.sampling.grid_resolution,
                                            opts.threads),
                     opts.out_path);
    } else if (mode == "align") {
        epsext::AlignConfig cfg = epsext::load_align_config(opts.config_path);
        write_output(epsext::run_alignment(cfg).dump(2) + "\n", opts.out_path);
    } else if (mode == "validate-geometry") {
        epsext::ScenarioConfig cfg = load_with_overrides(opts);
        epsext::BallUnionSet e(cfg.balls);
        epsext::BallUnionSet set = epsext::BallUnionSet::normalize_to_unit_diameter(e);
        epsext::GeometryReport rep = epsext::validate_geometry(
            set, cfg.c0, cfg.sampling.samples, cfg.sampling.seed);
        epsext::Json j;
        j["schema_version"] = 1;
        j["c0"] = rep.c0;
        j["C1_achieved"] = rep.C1_achieved;
        j["c2_achieved"] = rep.c2_achieved;
        j["sample_count"] = rep.sample_count;
        epsext::Json wp = epsext::Json::array();
        for (int i = 0; i < rep.worst_point.size(); ++i) {
            wp.push_back(rep.worst_point[i]);
        }
        j["worst_point"] = std::move(wp);
        write_output(j.dump(2) + "\n", opts.out_path);
    }

    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  clock::now() - t0)
                  .count();
    std::cerr << mode << " finished in " << ms << " ms\n";
    return status;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"epsext: distorted-isometry extension and alignment toolkit"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::vector<CLI::App*> subs;
    for (const char* name :
         {"extend", "dump", "align", "validate-geometry"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", opts.config_path, "scenario config path")
            ->required();
        sub->add_option("--out", opts.out_path, "output path (default stdout)");
        sub->add_option("--grid", opts.grid, "grid resolution override");
        std::uint64_t seed_holder = 0;
        sub->add_option_function<std::uint64_t>(
            "--seed", [&opts](const std::uint64_t& s) { opts.seed = s; },
            "seed override");
        (void)seed_holder;
        sub->add_option("--threads", opts.threads, "worker threads for dumps");
        subs.push_back(sub);
    }

    CLI11_PARSE(app, argc, argv);

    std::string mode;
    for (auto* sub : subs) {
        if (sub->parsed()) {
            mode = sub->get_name();
            break;
        }
    }

    try {
        return run(mode, opts);
    } catch (const epsext::InvalidConfig& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const epsext::DistortionBudgetExceeded& e) {
        std::cerr << "assumption failure (small-epsilon): " << e.what() << "\n";
        return kExitAssumption;
    } catch (const epsext::NoWitness& e) {
        std::cerr << "assumption failure (geometry of E): " << e.what() << "\n";
        return kExitAssumption;
    } catch (const epsext::DegenerateFrame& e) {
        std::cerr << "assumption failure (map distortion): " << e.what() << "\n";
        return kExitAssumption;
    } catch (const epsext::BudgetExceeded& e) {
        std::cerr << "assumption failure (work cap): " << e.what() << "\n";
        return kExitAssumption;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
