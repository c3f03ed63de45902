// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The tarsim Authors
//
// Command-line front end: run, aggregate, synth, bins, trajectory, timing.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "tarsim/cli.hpp"

int main(int argc, char** argv) {
    namespace cli = tarsim::cli;

    CLI::App app{"Simulation harness for technology-assisted review"};
    app.require_subcommand(1);

    std::string manifest;
    std::string output;
    bool force = false;
    auto* run = app.add_subcommand("run", "Execute every run of an experiment manifest");
    run->add_option("manifest", manifest, "Manifest JSON")->required();
    run->add_option("-o,--output", output, "Output directory (overrides manifest and $TARSIM_OUTPUT_DIR)");
    run->add_flag("--force", force, "Re-run runs that already completed");

    std::string results, baseline, bins_path, json_out;
    auto* agg = app.add_subcommand("aggregate", "Compare a results directory against a baseline");
    agg->add_option("results", results, "Results directory")->required();
    agg->add_option("--baseline", baseline, "Baseline results directory")->required();
    agg->add_option("--bins", bins_path, "Category bins file");
    agg->add_option("--json", json_out, "Also write the report as JSON");

    std::string synth_spec, synth_out;
    std::uint64_t seed = 0;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
    synth->add_option("spec", synth_spec, "Generator spec JSON")->required();
    synth->add_option("-o,--output", synth_out, "Corpus JSONL to write")->required();
    synth->add_option("--seed", seed, "Generator seed")->required();

    std::string traj_results, category, traj_out;
    auto* traj = app.add_subcommand("trajectory", "Cost per iteration for one category");
    traj->add_option("results", traj_results, "Results directory")->required();
    traj->add_option("--category", category, "Category")->required();
    traj->add_option("-o,--output", traj_out, "TSV to write")->required();

    std::string bins_corpus, bins_baseline, bins_out;
    double rare_below = tarsim::BinThresholds{}.rare_below;
    double common_from = tarsim::BinThresholds{}.common_from;
    auto* bins = app.add_subcommand("bins", "Assign prevalence and difficulty bins to categories");
    bins->add_option("corpus", bins_corpus, "Corpus JSONL")->required();
    bins->add_option("--baseline", bins_baseline, "Baseline results directory")->required();
    bins->add_option("-o,--output", bins_out, "Bins JSON to write")->required();
    bins->add_option("--rare-below", rare_below, "Prevalence below which a category is rare")->capture_default_str();
    bins->add_option("--common-from", common_from, "Prevalence from which a category is common")->capture_default_str();

    std::string timing_results;
    auto* timing = app.add_subcommand("timing", "Summarize fit and score wall-clock times");
    timing->add_option("results", timing_results, "Results directory")->required();

    CLI11_PARSE(app, argc, argv);

    auto opt_path = [](const std::string& s) -> std::optional<std::filesystem::path> {
        if (s.empty()) {
            return std::nullopt;
        }
        return std::filesystem::path(s);
    };

    if (run->parsed()) {
        cli::RunOptions options;
        options.output_dir = opt_path(output);
        options.force = force;
        return cli::cmd_run(manifest, options, std::cerr);
    }
    if (agg->parsed()) {
        return cli::cmd_aggregate(results, baseline, opt_path(bins_path), opt_path(json_out), std::cout, std::cerr);
    }
    if (synth->parsed()) {
        return cli::cmd_synth(synth_spec, synth_out, seed, std::cerr);
    }
    if (traj->parsed()) {
        return cli::cmd_trajectory(traj_results, category, traj_out, std::cerr);
    }
    if (bins->parsed()) {
        return cli::cmd_bins(bins_corpus, bins_baseline, bins_out, rare_below, common_from, std::cerr);
    }
    if (timing->parsed()) {
        return cli::cmd_timing(timing_results, std::cout, std::cerr);
    }
    return 2;
}
