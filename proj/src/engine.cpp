// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The tarsim Authors

#include "tarsim/engine.hpp"

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <set>

#include "tarsim/logreg.hpp"
#include "tarsim/rng.hpp"

namespace tarsim {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string digest_scores(const ScoreVector& scores) {
    const std::uint64_t h = fnv1a64(scores.data(), scores.size() * sizeof(double));
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

void finalize(RunResult& result) {
    result.min_cost.clear();
    if (result.records.empty()) {
        return;
    }
    for (std::size_t s = 0; s < result.config.cost_structures.size(); ++s) {
        const auto costs = costs_for(result, s);
        result.min_cost.push_back(min_cost_over_run(costs));
    }
}

} // namespace

std::string ClassifierSpec::label() const {
    if (kind == Kind::kPlugin) {
        return plugin.name;
    }
    return "logreg-C" + format_number(penalty);
}

void RunConfig::validate() const {
    if (category.empty()) {
        throw ArgumentError("run config has no category");
    }
    if (iterations < 1) {
        throw ArgumentError("iterations must be >= 1");
    }
    if (!(recall_target > 0.0 && recall_target <= 1.0)) {
        throw ArgumentError("recall target must lie in (0, 1]");
    }
    if (strategy.batch_size == 0) {
        throw ArgumentError("batch size must be >= 1");
    }
    if (cost_structures.empty()) {
        throw ArgumentError("at least one cost structure is required");
    }
    std::set<std::string> names;
    for (const auto& cs : cost_structures) {
        if (!names.insert(cs.name).second) {
            throw ArgumentError("duplicate cost structure \"" + cs.name + "\"");
        }
        if (cs.train_pos < 0 || cs.train_neg < 0 || cs.review_pos < 0 || cs.review_neg < 0) {
            throw ArgumentError("cost structure \"" + cs.name + "\" has a negative cost");
        }
    }
    if (classifier.kind == ClassifierSpec::Kind::kLogReg && !(classifier.penalty > 0.0)) {
        throw ArgumentError("logistic regression penalty must be > 0");
    }
    if (classifier.kind == ClassifierSpec::Kind::kPlugin &&
        (classifier.plugin.name.empty() || classifier.plugin.command.empty())) {
        throw ArgumentError("plugin classifier needs a name and a command");
    }
    features.validate();
}

std::string RunConfig::run_name() const {
    std::string name = category + "__" + std::string(to_string(strategy.kind)) + "__" + classifier.label();
    for (char& c : name) {
        const bool safe = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                          c == '_' || c == '.';
        if (!safe) {
            c = '_';
        }
    }
    return name;
}

std::vector<IterationCost> costs_for(const RunResult& result, std::size_t structure) {
    std::vector<IterationCost> costs;
    costs.reserve(result.records.size());
    for (const auto& r : result.records) {
        costs.push_back({r.iteration, r.costs.at(structure)});
    }
    return costs;
}

RunResult run_tar(const RunConfig& config, const Corpus& corpus, Scorer& scorer) {
    config.validate();
    const auto relevant = corpus.judgments(config.category);
    const auto doc_ids = corpus.doc_ids();

    RunResult result;
    result.config = config;

    const std::size_t seed = select_seed(corpus, config.category, config.rng_seed);
    result.seed_doc = corpus[seed].doc_id;
    LabeledSet labeled(corpus.size());
    labeled.add(seed, true, 0);

    for (int k = 1; k <= config.iterations; ++k) {
        IterationRecord rec;
        rec.iteration = k;
        ScoreVector scores;
        try {
            auto start = Clock::now();
            scorer.fit(labeled);
            rec.timing.fit_seconds = seconds_since(start);
            start = Clock::now();
            scores = scorer.score();
            rec.timing.score_seconds = seconds_since(start);
            if (scores.size() != corpus.size()) {
                throw ProtocolError("classifier returned " + std::to_string(scores.size()) + " scores for " +
                                    std::to_string(corpus.size()) + " documents");
            }
        } catch (const Error& e) {
            result.complete = false;
            result.error = "iteration " + std::to_string(k) + ": " + e.what();
            finalize(result);
            std::string message = result.error;
            throw RunAborted(std::move(message), std::move(result));
        }

        const RunState state{labeled, scores, doc_ids, relevant, config.recall_target};
        rec.counts = optimal_review(state);
        for (const auto& cs : config.cost_structures) {
            rec.costs.push_back(rec.counts.cost(cs));
        }
        rec.r_precision = r_precision(scores, doc_ids, relevant);
        const auto ranking = rank_documents(scores, doc_ids);
        rec.dfr = dfr(ranking, relevant, config.recall_target);
        rec.wss = wss(rec.dfr, config.recall_target);
        rec.scores_digest = digest_scores(scores);

        const auto batch = select_batch(scores, doc_ids, labeled, config.strategy);
        for (std::size_t doc : batch.docs) {
            labeled.add(doc, relevant[doc] != 0, k);
            rec.batch_selected.push_back(corpus[doc].doc_id);
        }
        result.records.push_back(std::move(rec));
        if (batch.exhausted) {
            result.exhausted = true;
            break;
        }
    }
    finalize(result);
    return result;
}

std::unique_ptr<Scorer> make_scorer(const RunConfig& config, const Corpus& corpus, const FeatureMatrix* features,
                                    const std::filesystem::path& corpus_path) {
    if (config.classifier.kind == ClassifierSpec::Kind::kLogReg) {
        if (features == nullptr) {
            throw ArgumentError("logistic regression needs a feature matrix");
        }
        if (features->rows() != corpus.size()) {
            throw ArgumentError("feature matrix rows do not match the corpus");
        }
        return std::make_unique<LogRegScorer>(*features, config.classifier.penalty);
    }
    return std::make_unique<PluginScorer>(config.classifier.plugin, corpus, corpus_path, config.category);
}

TimingSummary timing_report(std::span<const RunResult> results) {
    TimingSummary summary;
    double pooled_fit = 0.0, pooled_score = 0.0;
    std::size_t n_fit = 0, n_score = 0;
    double sum_run_fit = 0.0, sum_run_score = 0.0;
    std::size_t runs_fit = 0, runs_score = 0;

    for (const auto& run : results) {
        TimingStats stats;
        stats.iterations = run.records.size();
        double fit = 0.0, score = 0.0;
        std::size_t nf = 0, ns = 0;
        for (const auto& r : run.records) {
            if (r.timing.fit_seconds) {
                fit += *r.timing.fit_seconds;
                ++nf;
            }
            if (r.timing.score_seconds) {
                score += *r.timing.score_seconds;
                ++ns;
            }
        }
        if (nf > 0) {
            stats.total_fit_seconds = fit;
            stats.mean_fit_seconds = fit / static_cast<double>(nf);
            pooled_fit += fit;
            n_fit += nf;
            sum_run_fit += fit;
            ++runs_fit;
        }
        if (ns > 0) {
            stats.total_score_seconds = score;
            stats.mean_score_seconds = score / static_cast<double>(ns);
            pooled_score += score;
            n_score += ns;
            sum_run_score += score;
            ++runs_score;
        }
        summary.overall.iterations += stats.iterations;
        summary.per_run.push_back(stats);
    }
    if (n_fit > 0) {
        summary.overall.total_fit_seconds = pooled_fit;
        summary.overall.mean_fit_seconds = pooled_fit / static_cast<double>(n_fit);
        summary.mean_run_fit_seconds = sum_run_fit / static_cast<double>(runs_fit);
    }
    if (n_score > 0) {
        summary.overall.total_score_seconds = pooled_score;
        summary.overall.mean_score_seconds = pooled_score / static_cast<double>(n_score);
        summary.mean_run_score_seconds = sum_run_score / static_cast<double>(runs_score);
    }
    return summary;
}

} // namespace tarsim
