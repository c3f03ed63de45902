// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The tarsim Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tarsim/classifier.hpp"
#include "tarsim/corpus.hpp"
#include "tarsim/error.hpp"
#include "tarsim/features.hpp"
#include "tarsim/metrics.hpp"
#include "tarsim/plugin.hpp"
#include "tarsim/sampling.hpp"

namespace tarsim {

struct ClassifierSpec {
    enum class Kind { kLogReg, kPlugin };

    Kind kind = Kind::kLogReg;
    double penalty = 1.0;
    PluginLaunchSpec plugin;

    /// "logreg-C<penalty>" or the plugin name.
    std::string label() const;

    bool operator==(const ClassifierSpec&) const = default;
};

struct DownsampleSpec {
    double fraction = 1.0;
    std::uint64_t seed = 0;

    bool operator==(const DownsampleSpec&) const = default;
};

struct RunConfig {
    std::string corpus_ref;
    std::optional<DownsampleSpec> downsample;
    std::string category;
    SamplingStrategy strategy;
    int iterations = 20;
    double recall_target = 0.8;
    std::vector<CostStructure> cost_structures{CostStructure::uniform(), CostStructure::expensive_training()};
    ClassifierSpec classifier;
    VectorizerConfig features;
    std::uint64_t rng_seed = 0;

    /// Throws ArgumentError on iterations < 1, recall_target outside (0,1],
    /// batch_size 0, no cost structures, or duplicate cost-structure names.
    void validate() const;

    /// "<category>__<strategy>__<classifier label>", filesystem-safe.
    std::string run_name() const;

    bool operator==(const RunConfig&) const = default;
};

struct IterationTiming {
    std::optional<double> fit_seconds;
    std::optional<double> score_seconds;

    bool operator==(const IterationTiming&) const = default;
};

/// One evaluated model. Metrics reflect the model trained on the labeled set
/// before `batch_selected` was reviewed.
struct IterationRecord {
    int iteration = 0;
    std::vector<std::string> batch_selected;
    /// Training set at this iteration, plus the optimal second phase.
    CostBreakdown counts;
    /// One entry per RunConfig::cost_structures, same order.
    std::vector<double> costs;
    double r_precision = 0.0;
    double dfr = 0.0;
    double wss = 0.0;
    /// FNV-1a over the score vector, 16 hex digits.
    std::string scores_digest;
    IterationTiming timing;

    std::size_t n_labeled() const noexcept { return counts.train_pos + counts.train_neg; }
    std::size_t d_star() const noexcept { return counts.review_depth(); }

    bool operator==(const IterationRecord&) const = default;
};

struct RunResult {
    RunConfig config;
    std::string seed_doc;
    std::vector<IterationRecord> records;
    /// One entry per cost structure.
    std::vector<IterationCost> min_cost;
    bool complete = true;
    bool exhausted = false;
    std::string error;

    bool operator==(const RunResult&) const = default;
};

/// Thrown when the classifier fails mid-run; carries every record completed
/// before the failure.
class RunAborted : public Error {
public:
    RunAborted(const std::string& what, RunResult partial) : Error(what), partial_(std::move(partial)) {}
    const RunResult& partial() const noexcept { return partial_; }

private:
    RunResult partial_;
};

/// Seeds with one random relevant document, then for k = 1..iterations:
/// fit on every labeled document, score the corpus, record metrics, select
/// the next batch and reveal its gold labels. Stops early once the corpus
/// is exhausted.
RunResult run_tar(const RunConfig& config, const Corpus& corpus, Scorer& scorer);

/// Builds the classifier named by config.classifier. `features` is required
/// for logistic regression; `corpus_path` is what a plugin is asked to load.
std::unique_ptr<Scorer> make_scorer(const RunConfig& config, const Corpus& corpus,
                                    const FeatureMatrix* features,
                                    const std::filesystem::path& corpus_path);

std::vector<IterationCost> costs_for(const RunResult& result, std::size_t structure);

// Persistence. The run file is newline-delimited JSON: a config line, one
// line per iteration, and a summary line. Timings are nondeterministic and
// live in a sidecar "<path>.timings" so the run file itself is byte-stable.

void write_run(const RunResult& result, std::ostream& out);
void write_timings(const RunResult& result, std::ostream& out);
RunResult read_run(std::istream& in);
void read_timings(std::istream& in, RunResult& result);

void persist_run(const RunResult& result, const std::filesystem::path& path);
RunResult load_run(const std::filesystem::path& path);
std::filesystem::path timings_path(const std::filesystem::path& run_path);

nlohmann::json config_to_json(const RunConfig& config);
RunConfig config_from_json(const nlohmann::json& j);

/// One line per iteration with {category, iteration, n_labeled,
/// n_labeled_pos, r_precision, d_star, cost_uniform, cost_expensive, dfr,
/// wss}, plus strategy and classifier for grouping.
void write_metrics_report(const RunResult& result, std::ostream& out);

struct TimingStats {
    std::size_t iterations = 0;
    std::optional<double> mean_fit_seconds;
    std::optional<double> mean_score_seconds;
    std::optional<double> total_fit_seconds;
    std::optional<double> total_score_seconds;
};

struct TimingSummary {
    /// Parallel to the input runs.
    std::vector<TimingStats> per_run;
    /// Pooled over every iteration of every run.
    TimingStats overall;
    /// Mean of per-run totals.
    std::optional<double> mean_run_fit_seconds;
    std::optional<double> mean_run_score_seconds;
};

/// Missing timings are reported as absent, never as zero.
TimingSummary timing_report(std::span<const RunResult> results);

} // namespace tarsim
