// alrf: train, compare and inspect networks regularized with adaptive
// rank-1 weight simplification.
//
// Exit codes: 0 success, 1 configuration/usage error, 2 runtime failure.

#include "alrf/checkpoint.hpp"
#include "alrf/config.hpp"
#include "alrf/errors.hpp"
#include "alrf/experiment.hpp"
#include "alrf/io.hpp"
#include "alrf/surface.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct Globals {
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
    bool quiet = false;
};

int run_matrix(const std::string& config_path, const Globals& g, bool checkpoints, bool summary, bool traces) {
    alrf::RunConfig cfg;
    try {
        cfg = alrf::load_run_config(config_path);
    } catch (const alrf::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    alrf::ExperimentOptions opts;
    opts.out_dir = g.out_dir;
    opts.seed_override = g.seed;
    opts.write_checkpoints = checkpoints;
    opts.write_summary = summary;
    opts.write_condition_traces = traces;
    opts.log = g.quiet ? nullptr : &std::cout;

    try {
        const auto result = alrf::run_experiment(cfg, opts);
        if (!g.quiet && summary) std::cout << "summary: " << (opts.out_dir / "summary.csv").string() << '\n';
        if (!g.quiet && traces) std::cout << "traces: " << (opts.out_dir / "sncn_trace.csv").string() << '\n';
        if (result.failed() > 0) {
            std::cerr << result.failed() << " of " << result.runs.size() << " runs failed\n";
            return kExitRuntime;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive low-rank factorization regularization toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--seed", g.seed, "Run only this seed instead of the configured list");
    app.add_option("--out-dir", g.out_dir, "Directory for run artifacts")->capture_default_str();
    app.add_flag("--quiet", g.quiet, "Suppress progress output");

    std::string config_path;
    auto* train = app.add_subcommand("train", "Train every (regularizer, seed) run and save checkpoints");
    train->add_option("config", config_path, "Run configuration (JSON)")->required();

    auto* compare = app.add_subcommand("compare", "Run the regularizer x seed matrix and write summary.csv");
    compare->add_option("config", config_path, "Run configuration (JSON)")->required();

    auto* condtrace = app.add_subcommand("condtrace", "Run the matrix and write per-epoch condition traces");
    condtrace->add_option("config", config_path, "Run configuration (JSON)")->required();

    std::string checkpoint, bounds_text = "-3,3,-3,3", grid_out = "grid.csv";
    std::size_t resolution = alrf::kDefaultSurfaceResolution;
    auto* surface = app.add_subcommand("surface", "Export a decision-surface grid from a checkpoint");
    surface->add_option("checkpoint", checkpoint, "Checkpoint file")->required();
    surface->add_option("--bounds", bounds_text, "x1_min,x1_max,x2_min,x2_max")->capture_default_str();
    surface->add_option("--res", resolution, "Grid points per axis")->capture_default_str();
    surface->add_option("--out", grid_out, "Output CSV")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    if (*train) return run_matrix(config_path, g, true, true, false);
    if (*compare) return run_matrix(config_path, g, false, true, false);
    if (*condtrace) return run_matrix(config_path, g, false, false, true);

    alrf::SurfaceBounds bounds;
    try {
        bounds = alrf::parse_bounds(bounds_text);
        if (resolution == 0) throw alrf::DomainError("--res must be positive");
    } catch (const alrf::Error& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitConfig;
    }
    try {
        const alrf::Network net = alrf::load_checkpoint(checkpoint);
        const auto grid = alrf::export_surface_grid(net, bounds, resolution, grid_out);
        if (!g.quiet)
            std::cout << "wrote " << grid.score.size() << " grid points to " << grid_out << " (total variation "
                      << alrf::format_number(alrf::total_variation(grid)) << ")\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}
