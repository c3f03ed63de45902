// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The tarsim Authors

#include "tarsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tarsim/error.hpp"

namespace tarsim {

namespace {

std::size_t count_relevant(Judgments relevant) {
    return static_cast<std::size_t>(std::count_if(relevant.begin(), relevant.end(), [](auto v) { return v != 0; }));
}

void check_target(double target) {
    if (!(target > 0.0 && target <= 1.0)) {
        throw ArgumentError("recall target must lie in (0, 1]");
    }
}

} // namespace

std::vector<std::size_t> rank_documents(std::span<const double> scores, std::span<const std::string> doc_ids) {
    if (scores.size() != doc_ids.size()) {
        throw ArgumentError("scores and doc ids differ in length");
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) {
            return scores[a] > scores[b];
        }
        return doc_ids[a] < doc_ids[b];
    });
    return order;
}

double r_precision(std::span<const double> scores, std::span<const std::string> doc_ids, Judgments relevant) {
    if (relevant.size() != scores.size()) {
        throw ArgumentError("judgments and scores differ in length");
    }
    const std::size_t r = count_relevant(relevant);
    if (r == 0) {
        throw UndefinedMetricError("R-Precision is undefined with no relevant documents");
    }
    const auto ranking = rank_documents(scores, doc_ids);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < r; ++i) {
        hits += relevant[ranking[i]] ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(r);
}

std::size_t depth_for_recall(std::span<const std::size_t> ranking, Judgments relevant, double target) {
    check_target(target);
    const std::size_t r = count_relevant(relevant);
    if (r == 0) {
        throw UndefinedMetricError("depth for recall is undefined with no relevant documents");
    }
    std::size_t found = 0;
    for (std::size_t d = 0; d < ranking.size(); ++d) {
        found += relevant[ranking[d]] ? 1 : 0;
        if (meets_recall(found, r, target)) {
            return d + 1;
        }
    }
    throw ArgumentError("ranking does not cover every relevant document");
}

double dfr(std::span<const std::size_t> ranking, Judgments relevant, double target) {
    const std::size_t depth = depth_for_recall(ranking, relevant, target);
    return static_cast<double>(depth) / static_cast<double>(ranking.size());
}

CostBreakdown optimal_review(const RunState& state) {
    check_target(state.recall_target);
    const std::size_t n = state.relevant.size();
    if (state.scores.size() != n || state.doc_ids.size() != n || state.labeled.corpus_size() != n) {
        throw ArgumentError("run state components disagree on corpus size");
    }
    const std::size_t r = count_relevant(state.relevant);
    if (r == 0) {
        throw UndefinedMetricError("cost is undefined with no relevant documents");
    }
    CostBreakdown out;
    for (const auto& e : state.labeled.entries()) {
        (state.relevant[e.doc] ? out.train_pos : out.train_neg) += 1;
    }
    std::size_t found = out.train_pos;
    if (meets_recall(found, r, state.recall_target)) {
        return out;
    }
    std::vector<std::size_t> unlabeled;
    unlabeled.reserve(n - state.labeled.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (!state.labeled.contains(i)) {
            unlabeled.push_back(i);
        }
    }
    std::sort(unlabeled.begin(), unlabeled.end(), [&](std::size_t a, std::size_t b) {
        if (state.scores[a] != state.scores[b]) {
            return state.scores[a] > state.scores[b];
        }
        return state.doc_ids[a] < state.doc_ids[b];
    });
    for (std::size_t doc : unlabeled) {
        if (state.relevant[doc]) {
            ++out.review_pos;
            ++found;
        } else {
            ++out.review_neg;
        }
        if (meets_recall(found, r, state.recall_target)) {
            return out;
        }
    }
    return out;
}

std::size_t optimal_second_phase_depth(const RunState& state) { return optimal_review(state).review_depth(); }

double total_cost(const RunState& state, const CostStructure& cs) { return optimal_review(state).cost(cs); }

IterationCost min_cost_over_run(std::span<const IterationCost> costs) {
    if (costs.empty()) {
        throw ArgumentError("no iterations to take a minimum over");
    }
    IterationCost best = costs.front();
    for (const auto& c : costs.subspan(1)) {
        if (c.cost < best.cost) {
            best = c;
        }
    }
    return best;
}

double relative_cost(double cost_run, double cost_baseline) {
    if (!(cost_baseline > 0.0)) {
        throw ArgumentError("baseline cost must be > 0");
    }
    return cost_run / cost_baseline;
}

double aggregate_relative_costs(std::span<const double> ratios) {
    if (ratios.empty()) {
        throw ArgumentError("no relative costs to aggregate");
    }
    double sum = 0.0;
    for (double r : ratios) {
        sum += r;
    }
    return sum / static_cast<double>(ratios.size());
}

} // namespace tarsim
