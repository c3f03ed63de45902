// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The tarsim Authors

#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tarsim/error.hpp"
#include "tarsim/metrics.hpp"
#include "tarsim/rng.hpp"

namespace tarsim {
namespace {

std::vector<std::string> ids(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "d%03zu", i);
        out.push_back(buf);
    }
    return out;
}

// Scores that put document i at rank i.
std::vector<double> descending(std::size_t n) {
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
        s[i] = 1.0 - static_cast<double>(i) / static_cast<double>(n);
    }
    return s;
}

std::vector<std::uint8_t> mask(std::size_t n, std::initializer_list<std::size_t> rel) {
    std::vector<std::uint8_t> m(n, 0);
    for (auto i : rel) {
        m[i] = 1;
    }
    return m;
}

TEST(RankDocuments, ScoreThenId) {
    const std::vector<std::string> id{"c", "a", "b"};
    EXPECT_EQ(rank_documents(std::vector<double>{0.5, 0.5, 0.9}, id), (std::vector<std::size_t>{2, 1, 0}));
}

TEST(RPrecision, Examples) {
    const auto id = ids(10);
    const auto s = descending(10);
    EXPECT_EQ(r_precision(s, id, mask(10, {0, 2, 5, 9})), 0.5);
    EXPECT_EQ(r_precision(s, id, mask(10, {0, 1, 2})), 1.0);
    EXPECT_THROW(r_precision(s, id, mask(10, {})), UndefinedMetricError);
}

TEST(Dfr, Examples) {
    const auto id10 = ids(10);
    const auto rank10 = rank_documents(descending(10), id10);
    const auto rel = mask(10, {0, 1, 2, 4});
    EXPECT_EQ(depth_for_recall(rank10, rel, 0.8), 5u);
    EXPECT_EQ(dfr(rank10, rel, 0.8), 0.5);
    EXPECT_EQ(dfr(rank10, mask(10, {1, 9}), 1.0), 1.0);

    const auto rank100 = rank_documents(descending(100), ids(100));
    EXPECT_EQ(dfr(rank100, mask(100, {0, 1, 2, 3, 4}), 0.8), 0.04);

    EXPECT_THROW(dfr(rank10, mask(10, {}), 0.8), UndefinedMetricError);
    EXPECT_THROW(dfr(rank10, rel, 0.0), ArgumentError);
    EXPECT_THROW(dfr(rank10, rel, 1.1), ArgumentError);
}

TEST(Wss, Examples) {
    EXPECT_DOUBLE_EQ(wss(0.5, 0.8), 0.3);
    EXPECT_EQ(wss(0.8, 0.8), 0.0);
    EXPECT_DOUBLE_EQ(wss(0.04, 0.8), 0.76);
}

TEST(MeetsRecall, ExactInequality) {
    EXPECT_TRUE(meets_recall(4, 5, 0.8));
    EXPECT_FALSE(meets_recall(3, 4, 0.8));
    EXPECT_TRUE(meets_recall(7, 10, 0.7));
    EXPECT_TRUE(meets_recall(1, 3, 1.0 / 3.0));
}

TEST(SecondPhase, WorkedExample) {
    // R = 5 with two relevant already labeled. Unlabeled documents in rank
    // order have relevant ones at unlabeled ranks 3 and 7.
    const std::size_t n = 12;
    const auto id = ids(n);
    const auto s = descending(n);
    std::vector<std::uint8_t> rel(n, 0);
    LabeledSet labeled(n);
    labeled.add(0, true, 0);
    labeled.add(1, true, 1);
    rel[0] = rel[1] = 1;
    rel[2 + 2] = 1;  // unlabeled rank 3
    rel[2 + 6] = 1;  // unlabeled rank 7
    rel[2 + 9] = 1;  // unlabeled rank 10
    const RunState state{labeled, s, id, rel, 0.8};
    EXPECT_EQ(optimal_second_phase_depth(state), 7u);
    const auto counts = optimal_review(state);
    EXPECT_EQ(counts, (CostBreakdown{2, 0, 2, 5}));
}

TEST(SecondPhase, ZeroWhenLabeledAlreadyMeetsTarget) {
    const auto id = ids(5);
    const auto s = descending(5);
    const auto rel = mask(5, {3, 4});
    LabeledSet labeled(5);
    labeled.add(3, true, 0);
    labeled.add(4, true, 1);
    EXPECT_EQ(optimal_second_phase_depth({labeled, s, id, rel, 0.8}), 0u);
}

TEST(TotalCost, Arithmetic) {
    const CostBreakdown c{120, 81, 200, 150};
    EXPECT_EQ(c.cost(CostStructure::uniform()), 551.0);
    EXPECT_EQ(c.cost(CostStructure::expensive_training()), 2360.0);
    EXPECT_EQ(c.cost({"zero", 0, 0, 0, 0}), 0.0);
}

TEST(MinCost, Examples) {
    EXPECT_EQ(min_cost_over_run(std::vector<IterationCost>{{1, 900}, {2, 700}, {3, 750}}), (IterationCost{2, 700}));
    EXPECT_EQ(min_cost_over_run(std::vector<IterationCost>{{1, 9}, {2, 8}, {3, 7}}), (IterationCost{3, 7}));
    EXPECT_EQ(min_cost_over_run(std::vector<IterationCost>{{1, 9}, {2, 8}, {3, 5}, {4, 6}, {5, 5}}),
              (IterationCost{3, 5}));
    EXPECT_THROW(min_cost_over_run(std::vector<IterationCost>{}), ArgumentError);
}

TEST(RelativeCost, Examples) {
    EXPECT_DOUBLE_EQ(relative_cost(700, 1000), 0.7);
    EXPECT_EQ(relative_cost(1000, 1000), 1.0);
    EXPECT_THROW(relative_cost(1, 0), ArgumentError);
    // A ratio of 0.5935 reads as a 41% cost reduction.
    EXPECT_EQ(std::lround(100 * (1 - relative_cost(593.5, 1000))), 41);
}

TEST(AggregateRelativeCosts, MacroAverage) {
    EXPECT_DOUBLE_EQ(aggregate_relative_costs(std::vector<double>{0.9, 1.1}), 1.0);
    EXPECT_EQ(aggregate_relative_costs(std::vector<double>{0.37}), 0.37);
    EXPECT_THROW(aggregate_relative_costs(std::vector<double>{}), ArgumentError);
    Rng rng(45);
    std::vector<double> r;
    long double sum = 0;
    for (int i = 0; i < 45; ++i) {
        r.push_back(0.5 + rng.uniform01());
        sum += r.back();
    }
    EXPECT_NEAR(aggregate_relative_costs(r), static_cast<double>(sum / 45), 1e-15);
}

struct Instance {
    std::vector<double> scores;
    std::vector<std::string> ids;
    std::vector<std::uint8_t> relevant;
    std::vector<std::uint8_t> labeled_mask;
    LabeledSet labeled;
};

Instance random_instance(Rng& rng, std::size_t max_n) {
    Instance in;
    const std::size_t n = 1 + rng.uniform_index(max_n);
    const std::size_t r = 1 + rng.uniform_index(std::min<std::size_t>(n, 40));
    in.relevant.assign(n, 0);
    for (auto i : rng.sample_without_replacement(n, r)) {
        in.relevant[i] = 1;
    }
    in.labeled = LabeledSet(n);
    in.labeled_mask.assign(n, 0);
    const bool coarse = rng.bernoulli(0.5);
    for (std::size_t i = 0; i < n; ++i) {
        in.scores.push_back(coarse ? static_cast<double>(rng.uniform_index(5)) / 4.0 : rng.uniform01());
        in.ids.push_back("x" + std::to_string(rng.uniform_index(1000000)) + "-" + std::to_string(i));
        if (rng.bernoulli(0.2)) {
            in.labeled.add(i, in.relevant[i] != 0, 0);
            in.labeled_mask[i] = 1;
        }
    }
    return in;
}

TEST(MetricsOracle, RandomInstancesMatchBruteForce) {
    Rng rng(99);
    const oracle::Rational targets[] = {{4, 5}, {1, 2}, {7, 10}, {9, 10}, {1, 1}, {1, 3}};
    for (int trial = 0; trial < 200; ++trial) {
        const auto in = random_instance(rng, 60);
        const auto target = targets[trial % 6];
        const auto ranking = rank_documents(in.scores, in.ids);
        EXPECT_EQ(r_precision(in.scores, in.ids, in.relevant), oracle::r_precision(in.scores, in.ids, in.relevant));
        EXPECT_EQ(depth_for_recall(ranking, in.relevant, target.value()),
                  oracle::depth_for_recall(in.scores, in.ids, in.relevant, target));
        const RunState state{in.labeled, in.scores, in.ids, in.relevant, target.value()};
        const auto got = optimal_review(state);
        const auto ref = oracle::two_phase(in.scores, in.ids, in.relevant, in.labeled_mask, target);
        EXPECT_EQ(got, (CostBreakdown{ref.train_pos, ref.train_neg, ref.review_pos, ref.review_neg}));
        EXPECT_EQ(optimal_second_phase_depth(state), ref.depth);
        EXPECT_EQ(total_cost(state, CostStructure::uniform()), static_cast<double>(in.labeled.size() + ref.depth));
    }
}

TEST(MetricsProperties, RaisingTargetNeverLowersDepthOrCost) {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const auto in = random_instance(rng, 80);
        std::size_t prev_depth = 0;
        double prev_cost = 0;
        for (double t : {0.1, 0.25, 0.5, 0.8, 0.9, 1.0}) {
            const RunState state{in.labeled, in.scores, in.ids, in.relevant, t};
            const auto d = optimal_second_phase_depth(state);
            const auto c = total_cost(state, CostStructure::expensive_training());
            EXPECT_GE(d, prev_depth);
            EXPECT_GE(c, prev_cost);
            prev_depth = d;
            prev_cost = c;
        }
    }
}

TEST(MetricsProperties, IdRelabelingPreservingOrderIsInvisible) {
    Rng rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        const auto in = random_instance(rng, 50);
        // Prefixing every id keeps their relative order.
        std::vector<std::string> renamed;
        for (const auto& id : in.ids) {
            renamed.push_back("zz/" + id);
        }
        EXPECT_EQ(r_precision(in.scores, in.ids, in.relevant), r_precision(in.scores, renamed, in.relevant));
        EXPECT_EQ(dfr(rank_documents(in.scores, in.ids), in.relevant, 0.8),
                  dfr(rank_documents(in.scores, renamed), in.relevant, 0.8));
    }
}

} // namespace
} // namespace tarsim
