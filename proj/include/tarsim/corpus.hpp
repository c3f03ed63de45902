// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The tarsim Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tarsim {

struct Document {
    std::string doc_id;
    std::string text;
    /// Sorted, unique category labels. May be empty.
    std::vector<std::string> categories;

    bool operator==(const Document&) const = default;
};

/// Immutable labeled collection. Document order is ingestion order; the
/// category index is kept exactly equal to the inversion of the per-document
/// category sets.
class Corpus {
public:
    Corpus() = default;

    /// Throws ValidationError on empty or duplicate doc ids.
    explicit Corpus(std::vector<Document> documents);

    std::size_t size() const noexcept { return documents_.size(); }
    bool empty() const noexcept { return documents_.empty(); }

    const std::vector<Document>& documents() const noexcept { return documents_; }
    const Document& operator[](std::size_t i) const { return documents_[i]; }

    /// Doc ids in corpus order, for tie-breaking in rankings.
    std::span<const std::string> doc_ids() const noexcept { return ids_; }

    std::optional<std::size_t> find(std::string_view doc_id) const;

    /// Positions of documents relevant to `category`, ascending. Empty for unknown categories.
    const std::vector<std::size_t>& relevant(std::string_view category) const;

    /// Relevance mask over corpus positions (1 = relevant).
    std::vector<std::uint8_t> judgments(std::string_view category) const;

    /// All categories with at least one relevant document, sorted.
    std::vector<std::string> categories() const;

    const std::map<std::string, std::vector<std::size_t>, std::less<>>& category_index() const noexcept {
        return index_;
    }

    bool operator==(const Corpus& other) const { return documents_ == other.documents_; }

private:
    std::vector<Document> documents_;
    std::vector<std::string> ids_;
    std::unordered_map<std::string, std::size_t> positions_;
    std::map<std::string, std::vector<std::size_t>, std::less<>> index_;
};

enum class CorpusFormat { kJsonl };

/// Parses a corpus-format identifier ("jsonl"). Throws ArgumentError otherwise.
CorpusFormat parse_corpus_format(std::string_view id);

/// Reads newline-delimited JSON records {"doc_id","text","categories"}.
/// Blank lines are skipped. Malformed lines raise ParseError with the line
/// number; duplicate ids raise ValidationError.
Corpus read_corpus(std::istream& in, CorpusFormat format = CorpusFormat::kJsonl);
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format = CorpusFormat::kJsonl);

void write_corpus(const Corpus& corpus, std::ostream& out);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

/// Merges `category<TAB>doc_id<TAB>{0|1}` judgments into the corpus: 1 adds
/// the category to the document, 0 removes it.
Corpus merge_qrels(const Corpus& corpus, std::istream& qrels);
Corpus merge_qrels(const Corpus& corpus, const std::filesystem::path& path);

/// Uniform sample of round(fraction * N) documents without replacement,
/// in original relative order. fraction must lie in (0, 1].
Corpus downsample(const Corpus& corpus, double fraction, std::uint64_t rng_seed);

/// |relevant(category)| / N; 0 for unknown categories or an empty corpus.
double category_prevalence(const Corpus& corpus, std::string_view category);

enum class PrevalenceBin { kRare, kMedium, kCommon };
enum class DifficultyBin { kHard, kMedium, kEasy };

std::string_view to_string(PrevalenceBin bin);
std::string_view to_string(DifficultyBin bin);
PrevalenceBin parse_prevalence_bin(std::string_view s);
DifficultyBin parse_difficulty_bin(std::string_view s);

/// Cutoffs for the 3x3 grid. Intervals are closed on the left: a value equal
/// to a cutoff belongs to the bin that the cutoff opens.
///   prevalence:  [0, rare_below) rare, [rare_below, common_from) medium, [common_from, 1] common
///   difficulty:  [0, hard_below) hard, [hard_below, easy_from) medium, [easy_from, 1] easy
/// Difficulty scores are effectiveness values (higher = easier), e.g. baseline R-Precision.
struct BinThresholds {
    double rare_below = 0.002;
    double common_from = 0.01;
    double hard_below = 0.0;
    double easy_from = 0.0;
};

/// Difficulty cutoffs at the lower and upper terciles of `scores`: with the
/// scores sorted ascending, hard_below = s[n/3] and easy_from = s[2n/3].
std::pair<double, double> difficulty_terciles(std::vector<double> scores);

struct CategoryBin {
    std::string category;
    PrevalenceBin prevalence_bin;
    DifficultyBin difficulty_bin;

    bool operator==(const CategoryBin&) const = default;
};

PrevalenceBin prevalence_bin(double prevalence, const BinThresholds& thresholds);
DifficultyBin difficulty_bin(double score, const BinThresholds& thresholds);

/// Throws ArgumentError when a category lacks a prevalence or difficulty score.
std::vector<CategoryBin> assign_bins(std::span<const std::string> categories,
                                     const std::map<std::string, double>& prevalences,
                                     const std::map<std::string, double>& difficulty_scores,
                                     const BinThresholds& thresholds);

} // namespace tarsim
