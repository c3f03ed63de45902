// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The tarsim Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tarsim/classifier.hpp"
#include "tarsim/corpus.hpp"

namespace tarsim {

enum class StrategyKind {
    /// Highest-scored unlabeled documents first.
    kRelevance,
    /// Least-confidence: smallest |score - 0.5| first.
    kUncertainty,
};

std::string_view to_string(StrategyKind kind);
StrategyKind parse_strategy(std::string_view s);

struct SamplingStrategy {
    StrategyKind kind = StrategyKind::kRelevance;
    std::size_t batch_size = 200;

    bool operator==(const SamplingStrategy&) const = default;
};

/// Uniformly random relevant document for `category`. Throws
/// CategoryEmptyError when the category has no relevant documents.
std::size_t select_seed(const Corpus& corpus, std::string_view category, std::uint64_t rng_seed);

struct BatchSelection {
    /// Corpus positions in selection-priority order.
    std::vector<std::size_t> docs;
    /// No unlabeled documents remain once this batch is reviewed.
    bool exhausted = false;
};

/// min(batch_size, #unlabeled) unlabeled documents by strategy priority.
/// Ties are broken by ascending doc id.
BatchSelection select_batch(std::span<const double> scores, std::span<const std::string> doc_ids,
                            const LabeledSet& labeled, const SamplingStrategy& strategy);

} // namespace tarsim
