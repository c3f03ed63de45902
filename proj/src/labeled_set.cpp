// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The tarsim Authors

#include "tarsim/classifier.hpp"
#include "tarsim/error.hpp"

namespace tarsim {

void LabeledSet::add(std::size_t doc, bool relevant, int iteration) {
    if (doc >= member_.size()) {
        throw ArgumentError("labeled document " + std::to_string(doc) + " is outside the corpus");
    }
    if (member_[doc]) {
        throw ArgumentError("document " + std::to_string(doc) + " is already labeled");
    }
    member_[doc] = 1;
    entries_.push_back({doc, relevant, iteration});
    if (relevant) {
        ++positives_;
    }
}

} // namespace tarsim
