// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The tarsim Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "tarsim/corpus.hpp"
#include "tarsim/engine.hpp"
#include "tarsim/metrics.hpp"

namespace tarsim::cli {

/// Environment variable naming the default output directory for `run`.
inline constexpr const char* kOutputDirEnv = "TARSIM_OUTPUT_DIR";

// ---------------------------------------------------------------------------
// Manifests

/// A grid of TAR runs over one corpus. See docs/formats.md for the schema.
struct ExperimentManifest {
    std::filesystem::path base_dir;
    /// As written in the manifest; recorded verbatim in each RunConfig.
    std::string corpus;
    std::optional<std::string> qrels;
    std::optional<DownsampleSpec> downsample;
    VectorizerConfig features;
    std::optional<std::filesystem::path> output_dir;
    std::size_t parallelism = 1;
    bool feature_cache = true;
    std::vector<RunConfig> runs;

    std::filesystem::path resolve(const std::string& p) const;
};

/// Throws ParseError / ArgumentError on schema violations and
/// ValidationError on duplicate (category, strategy, classifier) triples.
ExperimentManifest parse_manifest(const nlohmann::json& j, const std::filesystem::path& base_dir);
ExperimentManifest load_manifest(const std::filesystem::path& path);

struct RunOptions {
    std::optional<std::filesystem::path> output_dir;
    bool force = false;
};

struct RunSummary {
    std::size_t executed = 0;
    std::size_t skipped = 0;
    std::vector<std::string> failures;

    int exit_code() const { return failures.empty() ? 0 : 1; }
};

/// Output files per run, under the output directory:
///   <run_name>.run.jsonl           RunResult (byte-stable)
///   <run_name>.run.jsonl.timings   wall-clock sidecar
///   <run_name>.metrics.jsonl       metrics report
std::filesystem::path run_file(const std::filesystem::path& output_dir, const RunConfig& config);
std::filesystem::path metrics_file(const std::filesystem::path& output_dir, const RunConfig& config);

/// Executes every run not already completed in the output directory (all
/// of them with `force`). A failing run does not stop the others. Setup
/// failures (unreadable manifest or corpus) throw.
RunSummary run_manifest(const ExperimentManifest& manifest, const RunOptions& options, std::ostream& log);

/// `run` subcommand: returns the process exit status.
int cmd_run(const std::filesystem::path& manifest_path, const RunOptions& options, std::ostream& log);

// ---------------------------------------------------------------------------
// Synthetic corpora

struct SynthCategory {
    std::string name;
    double prevalence = 0.05;
    /// 0 = separable by marker tokens; 1 = markers carry no signal.
    double noise = 0.0;
};

struct SynthSpec {
    std::size_t n_docs = 1000;
    std::size_t doc_length = 60;
    std::size_t vocab_size = 5000;
    double zipf_exponent = 1.0;
    std::size_t markers_per_category = 5;
    std::size_t marker_occurrences = 3;
    std::vector<SynthCategory> categories;
};

SynthSpec parse_synth_spec(const nlohmann::json& j);

/// Deterministic given (spec, seed). Category c gets exactly
/// round(n_docs * prevalence) positives. Positives carry marker tokens
/// with probability 1 - noise; negatives carry decoy markers with
/// probability noise * R / (N - R), so at noise = 1 markers are
/// uninformative. Throws ArgumentError when n_docs * prevalence < 1.
Corpus synthesize_corpus(const SynthSpec& spec, std::uint64_t seed);

/// Marker token j of category index c.
std::string marker_token(std::size_t category_index, std::size_t j);

int cmd_synth(const std::filesystem::path& spec_path, const std::filesystem::path& out_path, std::uint64_t seed,
              std::ostream& log);

// ---------------------------------------------------------------------------
// Aggregation

/// One run's projection of a metrics report.
struct RunMetrics {
    std::string category;
    std::string strategy;
    std::string classifier;
    double min_cost_uniform = 0.0;
    double min_cost_expensive = 0.0;
    /// R-Precision at the last recorded iteration.
    double final_r_precision = 0.0;
    std::size_t iterations = 0;
};

/// Reads every *.metrics.jsonl file in `dir`.
std::vector<RunMetrics> load_metrics_dir(const std::filesystem::path& dir);
std::vector<RunMetrics> read_metrics_report(std::istream& in);

using BinMap = std::map<std::string, CategoryBin>;

BinMap load_bins(const std::filesystem::path& path);
void save_bins(const std::vector<CategoryBin>& bins, const BinThresholds& thresholds,
               const std::filesystem::path& path);

struct AggregateCell {
    std::string classifier;
    std::string strategy;
    /// "uniform" or "expensive".
    std::string cost_structure;
    /// "all" or "<difficulty>-<prevalence>".
    std::string bin;
    std::size_t n = 0;
    double mean_relative_cost = 0.0;
    double mean_r_precision = 0.0;
    double baseline_mean_r_precision = 0.0;
    /// Only for the "all" bin; absent when n < 2 or the test is degenerate.
    std::optional<TTestResult> t_test;
    bool t_test_degenerate = false;
};

struct AggregateReport {
    std::vector<AggregateCell> cells;
    /// Categories present in results but missing from the baseline.
    std::vector<std::string> excluded;
};

/// Compares every (classifier, strategy) group of `results` with the
/// baseline run of the same (category, strategy). Throws ArgumentError when
/// the baseline holds more than one run for a (category, strategy).
AggregateReport aggregate(const std::vector<RunMetrics>& results, const std::vector<RunMetrics>& baseline,
                          const std::optional<BinMap>& bins);

void print_aggregate(const AggregateReport& report, std::ostream& out);
nlohmann::json aggregate_to_json(const AggregateReport& report);

int cmd_aggregate(const std::filesystem::path& results_dir, const std::filesystem::path& baseline_dir,
                  const std::optional<std::filesystem::path>& bins_path,
                  const std::optional<std::filesystem::path>& json_out, std::ostream& out, std::ostream& log);

/// Bins every category of the baseline: prevalence from the corpus,
/// difficulty from the mean final baseline R-Precision, cut at terciles
/// unless explicit difficulty thresholds are given.
std::vector<CategoryBin> compute_bins(const Corpus& corpus, const std::vector<RunMetrics>& baseline,
                                      BinThresholds& thresholds, bool difficulty_from_terciles);

int cmd_bins(const std::filesystem::path& corpus_path, const std::filesystem::path& baseline_dir,
             const std::filesystem::path& out_path, double rare_below, double common_from, std::ostream& log);

// ---------------------------------------------------------------------------
// Trajectories and timing

struct TrajectoryPoint {
    std::string classifier;
    std::string strategy;
    std::string cost_structure;
    int iteration = 0;
    double cost = 0.0;
};

/// Every run file in `results_dir` for `category`, ordered by classifier,
/// strategy, cost structure and iteration. Throws ArgumentError when none.
std::vector<TrajectoryPoint> trajectory(const std::filesystem::path& results_dir, const std::string& category);

/// Tab-separated with a header row.
void write_trajectory(const std::vector<TrajectoryPoint>& points, std::ostream& out);

int cmd_trajectory(const std::filesystem::path& results_dir, const std::string& category,
                   const std::filesystem::path& out_path, std::ostream& log);

std::vector<RunResult> load_runs(const std::filesystem::path& results_dir);

int cmd_timing(const std::filesystem::path& results_dir, std::ostream& out, std::ostream& log);

} // namespace tarsim::cli
