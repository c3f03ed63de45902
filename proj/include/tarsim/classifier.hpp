// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The tarsim Authors

#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace tarsim {

/// Per-document relevance probability in corpus order.
using ScoreVector = std::vector<double>;

struct LabeledEntry {
    std::size_t doc;
    bool relevant;
    int iteration_acquired;

    bool operator==(const LabeledEntry&) const = default;
};

/// Reviewed documents, in acquisition order. Documents are corpus positions.
class LabeledSet {
public:
    LabeledSet() = default;
    explicit LabeledSet(std::size_t corpus_size) : member_(corpus_size, 0) {}

    /// Throws ArgumentError if `doc` is out of range or already labeled.
    void add(std::size_t doc, bool relevant, int iteration);

    bool contains(std::size_t doc) const { return doc < member_.size() && member_[doc] != 0; }

    const std::vector<LabeledEntry>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    std::size_t positives() const noexcept { return positives_; }
    std::size_t negatives() const noexcept { return entries_.size() - positives_; }
    std::size_t corpus_size() const noexcept { return member_.size(); }

private:
    std::vector<LabeledEntry> entries_;
    std::vector<char> member_;
    std::size_t positives_ = 0;
};

/// A relevance model over a fixed corpus. `fit` always receives every
/// labeled document; whether state carries over between calls is up to the
/// implementation.
class Scorer {
public:
    virtual ~Scorer() = default;

    virtual std::string name() const = 0;
    virtual void fit(const LabeledSet& labeled) = 0;
    virtual ScoreVector score() = 0;
};

} // namespace tarsim
