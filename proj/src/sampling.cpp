// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The tarsim Authors

#include "tarsim/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "tarsim/error.hpp"
#include "tarsim/rng.hpp"

namespace tarsim {

std::string_view to_string(StrategyKind kind) {
    return kind == StrategyKind::kRelevance ? "relevance" : "uncertainty";
}

StrategyKind parse_strategy(std::string_view s) {
    if (s == "relevance") return StrategyKind::kRelevance;
    if (s == "uncertainty") return StrategyKind::kUncertainty;
    throw ArgumentError("unknown sampling strategy \"" + std::string(s) + "\"");
}

std::size_t select_seed(const Corpus& corpus, std::string_view category, std::uint64_t rng_seed) {
    const auto& relevant = corpus.relevant(category);
    if (relevant.empty()) {
        throw CategoryEmptyError("category \"" + std::string(category) + "\" has no relevant documents");
    }
    Rng rng(rng_seed);
    return relevant[rng.uniform_index(relevant.size())];
}

BatchSelection select_batch(std::span<const double> scores, std::span<const std::string> doc_ids,
                            const LabeledSet& labeled, const SamplingStrategy& strategy) {
    if (strategy.batch_size == 0) {
        throw ArgumentError("batch size must be >= 1");
    }
    if (scores.size() != doc_ids.size() || scores.size() != labeled.corpus_size()) {
        throw ArgumentError("scores, doc ids and labeled set disagree on corpus size");
    }
    std::vector<std::size_t> pool;
    pool.reserve(scores.size() - labeled.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!labeled.contains(i)) {
            pool.push_back(i);
        }
    }
    const std::size_t k = std::min(strategy.batch_size, pool.size());

    auto by_id = [&](std::size_t a, std::size_t b) { return doc_ids[a] < doc_ids[b]; };
    auto first = [&](std::size_t a, std::size_t b) {
        if (strategy.kind == StrategyKind::kRelevance) {
            if (scores[a] != scores[b]) return scores[a] > scores[b];
        } else {
            const double da = std::abs(scores[a] - 0.5);
            const double db = std::abs(scores[b] - 0.5);
            if (da != db) return da < db;
        }
        return by_id(a, b);
    };
    std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k), pool.end(), first);

    BatchSelection out;
    out.exhausted = k == pool.size();
    out.docs.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
    return out;
}

} // namespace tarsim
