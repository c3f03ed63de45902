// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The tarsim Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tarsim/classifier.hpp"

namespace tarsim {

/// Per-document review costs by phase and gold label.
struct CostStructure {
    std::string name;
    double train_pos = 1.0;
    double train_neg = 1.0;
    double review_pos = 1.0;
    double review_neg = 1.0;

    static CostStructure uniform() { return {"uniform", 1.0, 1.0, 1.0, 1.0}; }
    static CostStructure expensive_training() { return {"expensive", 10.0, 10.0, 1.0, 1.0}; }

    bool operator==(const CostStructure&) const = default;
};

/// Relevance mask over corpus positions.
using Judgments = std::span<const std::uint8_t>;

/// Corpus positions ordered by score descending, ties by ascending doc id.
std::vector<std::size_t> rank_documents(std::span<const double> scores, std::span<const std::string> doc_ids);

/// True when found / total meets the recall target, compared exactly.
inline bool meets_recall(std::size_t found, std::size_t total, double target) {
    return static_cast<double>(found) / static_cast<double>(total) >= target;
}

/// Precision in the top R of the ranking, R = number of relevant documents.
/// Throws UndefinedMetricError when R = 0.
double r_precision(std::span<const double> scores, std::span<const std::string> doc_ids, Judgments relevant);

/// Smallest depth d such that the top d of `ranking` reach recall `target`.
/// Throws UndefinedMetricError when R = 0 and ArgumentError on a target
/// outside (0, 1].
std::size_t depth_for_recall(std::span<const std::size_t> ranking, Judgments relevant, double target);

/// depth_for_recall / N.
double dfr(std::span<const std::size_t> ranking, Judgments relevant, double target);

inline double wss(double dfr_value, double target) { return target - dfr_value; }

/// Snapshot of a TAR run at one iteration.
struct RunState {
    const LabeledSet& labeled;
    std::span<const double> scores;
    std::span<const std::string> doc_ids;
    Judgments relevant;
    double recall_target = 0.8;
};

/// Reviewed-document counts behind a total cost.
struct CostBreakdown {
    std::size_t train_pos = 0;
    std::size_t train_neg = 0;
    std::size_t review_pos = 0;
    std::size_t review_neg = 0;

    std::size_t review_depth() const noexcept { return review_pos + review_neg; }
    double cost(const CostStructure& cs) const {
        return cs.train_pos * static_cast<double>(train_pos) + cs.train_neg * static_cast<double>(train_neg) +
               cs.review_pos * static_cast<double>(review_pos) + cs.review_neg * static_cast<double>(review_neg);
    }

    bool operator==(const CostBreakdown&) const = default;
};

/// Training counts from the labeled set plus the minimal prefix of the
/// unlabeled ranking (score desc, ties by doc id) that, together with the
/// relevant labeled documents, meets the recall target.
CostBreakdown optimal_review(const RunState& state);

std::size_t optimal_second_phase_depth(const RunState& state);

double total_cost(const RunState& state, const CostStructure& cs);

struct IterationCost {
    int iteration = 0;
    double cost = 0.0;

    bool operator==(const IterationCost&) const = default;
};

/// Earliest iteration with the minimum cost. ArgumentError on empty input.
IterationCost min_cost_over_run(std::span<const IterationCost> costs);

/// cost_run / cost_baseline. ArgumentError when cost_baseline <= 0.
double relative_cost(double cost_run, double cost_baseline);

/// Macro average. ArgumentError on empty input.
double aggregate_relative_costs(std::span<const double> ratios);

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
    int df = 0;
};

/// Two-sided paired Student t-test on a - b. ArgumentError on length
/// mismatch or n < 2; DegenerateTestError when the differences have zero
/// variance.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// P(|T| >= |t|) for Student's t with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);

} // namespace tarsim
