// Command-line front end: run, compare, validate and gap.
//
// Exit codes: 0 success, 2 configuration error, 3 episode failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dncb/config.hpp"
#include "dncb/harness.hpp"

namespace
{

constexpr int kExitConfig = 2;
constexpr int kExitEpisode = 3;

std::string out_dir_for(const dncb::ExperimentConfig& cfg, const std::string& override_dir)
{
    return override_dir.empty() ? cfg.output.dir : override_dir;
}

void print_result(const dncb::ExperimentResult& r)
{
    std::printf("%s: median final regret", dncb::to_string(r.algorithm));
    for (const double v : r.median_final_regret())
        std::printf(" %.3f", v);
    std::printf("\n");
    for (const auto& w : r.warnings)
        std::fprintf(stderr, "warning: %s\n", w.c_str());
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Decentralized competing bandits in drifting matching markets"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int workers = 0;

    auto* run = app.add_subcommand("run", "Run the configured algorithm over all seeds");
    auto* compare = app.add_subcommand("compare", "Paired runs of every algorithm in `compare`");
    auto* validate = app.add_subcommand("validate", "Check a config and print its hash");
    auto* gap = app.add_subcommand("gap", "Export dynamic-gap diagnostics for the first seed");
    for (auto* sub : {run, compare, validate, gap})
        sub->add_option("config", config_path, "JSON config file")->required();
    for (auto* sub : {run, compare})
    {
        sub->add_option("-o,--out", out_dir, "Output directory (overrides output.dir)");
        sub->add_option("-j,--workers", workers, "Worker threads (default: DNCB_WORKERS or cores)");
    }
    std::string gap_out;
    gap->add_option("-o,--out", gap_out, "CSV path (default: <output.dir>/gap.csv)");

    CLI11_PARSE(app, argc, argv);

    dncb::ExperimentConfig cfg;
    try
    {
        cfg = dncb::load_config(config_path);
        if (*validate)
        {
            // Building one trajectory checks custom keyframes against the drift step.
            (void)dncb::generate_trajectory(cfg.drift, cfg.dims, cfg.base_seed, cfg.noise_sigma);
            std::printf("ok %s\n", dncb::config_hash(cfg).c_str());
            const auto check = dncb::effective_drift_check(cfg.drift.step, cfg.algorithm.delta, cfg.dims.arms,
                                                           cfg.episode.comm, cfg.drift_check_c);
            if (!check.pass)
                std::fprintf(stderr, "warning: %s\n", check.message.c_str());
            return 0;
        }
        if (*gap)
        {
            const std::string path =
                gap_out.empty() ? (std::filesystem::path(cfg.output.dir) / "gap.csv").string() : gap_out;
            if (const auto parent = std::filesystem::path(path).parent_path(); !parent.empty())
                std::filesystem::create_directories(parent);
            std::ofstream out(path, std::ios::binary);
            dncb::write_gap_csv(out, cfg);
            std::printf("wrote %s\n", path.c_str());
            return 0;
        }

        dncb::RunOptions opts{out_dir_for(cfg, out_dir), workers};
        if (*run)
        {
            print_result(dncb::run_experiment(cfg, cfg.algorithm.name, opts));
        }
        else
        {
            for (const auto& r : dncb::compare_algorithms(cfg, opts))
                print_result(r);
        }
        std::printf("outputs in %s\n", opts.out_dir.c_str());
    }
    catch (const dncb::ConfigError& e)
    {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    }
    catch (const dncb::EpisodeFailure& e)
    {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitEpisode;
    }
    catch (const std::exception& e)
    {
        std::fprintf(stderr, "episode failure: %s\n", e.what());
        return kExitEpisode;
    }
    return 0;
}
