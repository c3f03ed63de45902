// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The tarsim Authors

#include <algorithm>
#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "tarsim/error.hpp"
#include "tarsim/rng.hpp"
#include "tarsim/sampling.hpp"

namespace tarsim {
namespace {

const std::vector<std::string> kIds{"A", "B", "C"};

std::vector<std::string> ids_of(const BatchSelection& s, const std::vector<std::string>& ids) {
    std::vector<std::string> out;
    for (auto i : s.docs) {
        out.push_back(ids[i]);
    }
    return out;
}

TEST(SelectBatch, RelevanceTakesArgmax) {
    const std::vector<double> scores{0.9, 0.55, 0.2};
    const auto s = select_batch(scores, kIds, LabeledSet(3), {StrategyKind::kRelevance, 1});
    EXPECT_EQ(ids_of(s, kIds), (std::vector<std::string>{"A"}));
    EXPECT_FALSE(s.exhausted);
}

TEST(SelectBatch, UncertaintyTakesClosestToHalf) {
    const std::vector<double> scores{0.9, 0.55, 0.2};
    const auto s = select_batch(scores, kIds, LabeledSet(3), {StrategyKind::kUncertainty, 1});
    EXPECT_EQ(ids_of(s, kIds), (std::vector<std::string>{"B"}));
}

TEST(SelectBatch, TiesGoToLowerDocId) {
    const std::vector<std::string> ids{"B", "A"};
    const std::vector<double> scores{0.7, 0.7};
    EXPECT_EQ(ids_of(select_batch(scores, ids, LabeledSet(2), {StrategyKind::kRelevance, 1}), ids),
              (std::vector<std::string>{"A"}));
    EXPECT_EQ(ids_of(select_batch(scores, ids, LabeledSet(2), {StrategyKind::kUncertainty, 1}), ids),
              (std::vector<std::string>{"A"}));
}

TEST(SelectBatch, SkipsLabeledAndSignalsExhaustion) {
    LabeledSet labeled(3);
    labeled.add(0, true, 0);
    const std::vector<double> scores{0.9, 0.55, 0.2};
    const auto s = select_batch(scores, kIds, labeled, {StrategyKind::kRelevance, 5});
    EXPECT_EQ(ids_of(s, kIds), (std::vector<std::string>{"B", "C"}));
    EXPECT_TRUE(s.exhausted);
}

TEST(SelectBatch, RejectsMismatchedInputs) {
    EXPECT_THROW(select_batch(std::vector<double>{0.1}, kIds, LabeledSet(3), {}), ArgumentError);
    EXPECT_THROW(select_batch(std::vector<double>{0.1, 0.2, 0.3}, kIds, LabeledSet(3), {StrategyKind::kRelevance, 0}),
                 ArgumentError);
}

struct Instance {
    std::vector<double> scores;
    std::vector<std::string> ids;
    LabeledSet labeled;
};

Instance random_instance(Rng& rng) {
    Instance in;
    const std::size_t n = 1 + rng.uniform_index(80);
    in.labeled = LabeledSet(n);
    for (std::size_t i = 0; i < n; ++i) {
        // Coarse dyadic scores force ties and keep 1 - s exact, so reflected
        // uncertainty ties stay ties.
        in.scores.push_back(static_cast<double>(rng.uniform_index(17)) / 16.0);
        in.ids.push_back("id" + std::to_string(rng.next() % 100000) + "_" + std::to_string(i));
        if (rng.bernoulli(0.3)) {
            in.labeled.add(i, false, 0);
        }
    }
    return in;
}

TEST(SelectBatch, Properties) {
    Rng rng(77);
    for (int trial = 0; trial < 300; ++trial) {
        auto in = random_instance(rng);
        const std::size_t b = 1 + rng.uniform_index(20);
        const std::size_t unlabeled = in.scores.size() - in.labeled.size();
        for (auto kind : {StrategyKind::kRelevance, StrategyKind::kUncertainty}) {
            const SamplingStrategy st{kind, b};
            const auto s = select_batch(in.scores, in.ids, in.labeled, st);
            EXPECT_EQ(s.docs.size(), std::min(b, unlabeled));
            EXPECT_EQ(s.exhausted, b >= unlabeled);
            std::set<std::size_t> uniq(s.docs.begin(), s.docs.end());
            EXPECT_EQ(uniq.size(), s.docs.size());
            for (auto d : s.docs) {
                EXPECT_FALSE(in.labeled.contains(d));
            }
            EXPECT_EQ(select_batch(in.scores, in.ids, in.labeled, st).docs, s.docs);

            // Priority key (smaller is better), then id.
            auto key = [&](std::size_t i) {
                return kind == StrategyKind::kRelevance ? -in.scores[i] : std::fabs(in.scores[i] - 0.5);
            };
            // Selection is in priority order and nothing unselected beats it.
            for (std::size_t k = 1; k < s.docs.size(); ++k) {
                const auto p = s.docs[k - 1], q = s.docs[k];
                EXPECT_TRUE(key(p) < key(q) || (key(p) == key(q) && in.ids[p] < in.ids[q]));
            }
            if (!s.docs.empty()) {
                const auto last = s.docs.back();
                for (std::size_t i = 0; i < in.scores.size(); ++i) {
                    if (in.labeled.contains(i) || uniq.count(i)) {
                        continue;
                    }
                    EXPECT_TRUE(key(last) < key(i) || (key(last) == key(i) && in.ids[last] < in.ids[i]));
                }
            }
        }

        // Relevance is invariant under a strictly increasing transform;
        // uncertainty under reflection about 0.5.
        std::vector<double> transformed, reflected;
        for (double v : in.scores) {
            transformed.push_back(std::exp(3 * v) - 7);
            reflected.push_back(1.0 - v);
        }
        EXPECT_EQ(select_batch(transformed, in.ids, in.labeled, {StrategyKind::kRelevance, b}).docs,
                  select_batch(in.scores, in.ids, in.labeled, {StrategyKind::kRelevance, b}).docs);
        EXPECT_EQ(select_batch(reflected, in.ids, in.labeled, {StrategyKind::kUncertainty, b}).docs,
                  select_batch(in.scores, in.ids, in.labeled, {StrategyKind::kUncertainty, b}).docs);
    }
}

TEST(SelectSeed, ForcedAndDeterministic) {
    const Corpus one({{"a", "", {}}, {"b", "", {"k"}}, {"c", "", {}}});
    for (std::uint64_t s = 0; s < 10; ++s) {
        EXPECT_EQ(select_seed(one, "k", s), 1u);
    }
    std::vector<Document> docs;
    for (int i = 0; i < 100; ++i) {
        docs.push_back({"d" + std::to_string(i), "", i % 3 == 0 ? std::vector<std::string>{"k"}
                                                                : std::vector<std::string>{}});
    }
    const Corpus many(docs);
    EXPECT_EQ(select_seed(many, "k", 42), select_seed(many, "k", 42));
    std::set<std::size_t> seen;
    for (std::uint64_t s = 0; s < 200; ++s) {
        const auto d = select_seed(many, "k", s);
        EXPECT_EQ(d % 3, 0u);
        seen.insert(d);
    }
    EXPECT_GT(seen.size(), 25u);
}

TEST(SelectSeed, EmptyCategory) {
    const Corpus c(std::vector<Document>{{"a", "", {}}});
    EXPECT_THROW(select_seed(c, "k", 1), CategoryEmptyError);
}

TEST(Strategy, NamesRoundTrip) {
    for (auto k : {StrategyKind::kRelevance, StrategyKind::kUncertainty}) {
        EXPECT_EQ(parse_strategy(to_string(k)), k);
    }
    EXPECT_THROW(parse_strategy("random"), ArgumentError);
}

TEST(RngTest, UniformIndexStaysInRangeAndCovers) {
    Rng rng(1);
    std::vector<int> hits(7, 0);
    for (int i = 0; i < 7000; ++i) {
        const auto v = rng.uniform_index(7);
        ASSERT_LT(v, 7u);
        ++hits[v];
    }
    for (int h : hits) {
        EXPECT_NEAR(h, 1000, 150);
    }
    const auto s = rng.sample_without_replacement(10, 10);
    EXPECT_EQ(std::set<std::size_t>(s.begin(), s.end()).size(), 10u);
}

TEST(RngTest, Fnv1aKnownVector) {
    // Published FNV-1a 64 test vectors.
    EXPECT_EQ(fnv1a64("", 0), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a64("a", 1), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(fnv1a64("foobar", 6), 0x85944171f73967e8ULL);
}

} // namespace
} // namespace tarsim
