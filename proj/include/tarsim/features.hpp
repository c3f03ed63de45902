// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The tarsim Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tarsim/corpus.hpp"

namespace tarsim {

enum class TokenizerKind {
    /// Maximal runs of word characters (letters, digits, underscore, and
    /// non-ASCII letters), lowercased.
    kUnicodeWord,
    /// ASCII whitespace splitting, lowercased.
    kWhitespace,
};

std::string_view to_string(TokenizerKind kind);
TokenizerKind parse_tokenizer(std::string_view s);

std::vector<std::string> tokenize(std::string_view text, TokenizerKind kind);

struct VectorizerConfig {
    double k1 = 1.2;
    double b = 0.75;
    std::size_t min_df = 1;
    TokenizerKind tokenizer = TokenizerKind::kUnicodeWord;
    /// Multiply saturated tf by ln(1 + (N - df + 0.5) / (df + 0.5)). Off by
    /// default; when on, values are no longer bounded by 1.
    bool idf = false;

    /// Throws ArgumentError on k1 <= 0, b outside [0,1] or min_df == 0.
    void validate() const;

    bool operator==(const VectorizerConfig&) const = default;
};

/// BM25 within-document saturation: tf / (tf + k1 * ((1 - b) + b * dl / avgdl)).
inline double saturated_tf(double tf, double doc_length, double avg_doc_length, double k1, double b) {
    if (tf <= 0.0) {
        return 0.0;
    }
    const double norm = avg_doc_length > 0.0 ? doc_length / avg_doc_length : 1.0;
    return tf / (tf + k1 * ((1.0 - b) + b * norm));
}

class Vocabulary {
public:
    Vocabulary() = default;
    Vocabulary(std::vector<std::string> terms, std::vector<std::size_t> document_frequencies,
               std::vector<std::size_t> document_lengths);

    std::size_t size() const noexcept { return terms_.size(); }
    const std::vector<std::string>& terms() const noexcept { return terms_; }
    std::optional<std::size_t> index(std::string_view term) const;

    std::size_t document_frequency(std::size_t column) const { return df_[column]; }
    const std::vector<std::size_t>& document_lengths() const noexcept { return doc_lengths_; }
    double avg_doc_length() const noexcept { return avg_doc_length_; }
    std::size_t num_documents() const noexcept { return doc_lengths_.size(); }

private:
    std::vector<std::string> terms_;
    std::vector<std::size_t> df_;
    std::unordered_map<std::string, std::size_t> lookup_;
    std::vector<std::size_t> doc_lengths_;
    double avg_doc_length_ = 0.0;
};

/// Terms with document frequency >= min_df, columns in lexicographic term
/// order. Document lengths count every token, in or out of vocabulary.
Vocabulary build_vocabulary(const Corpus& corpus, const VectorizerConfig& config);

struct FeatureEntry {
    std::uint32_t column;
    double value;

    bool operator==(const FeatureEntry&) const = default;
};

/// Row-compressed sparse matrix; row i is document i. Entries within a row
/// are sorted by column.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    explicit FeatureMatrix(std::size_t cols) : cols_(cols) {}

    void append_row(std::span<const FeatureEntry> entries);

    std::size_t rows() const noexcept { return row_ptr_.size() - 1; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t nnz() const noexcept { return entries_.size(); }

    std::span<const FeatureEntry> row(std::size_t i) const {
        return {entries_.data() + row_ptr_[i], entries_.data() + row_ptr_[i + 1]};
    }

    double dot(std::size_t i, std::span<const double> weights) const {
        double s = 0.0;
        for (const auto& e : row(i)) {
            s += e.value * weights[e.column];
        }
        return s;
    }

    bool operator==(const FeatureMatrix&) const = default;

private:
    std::size_t cols_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<FeatureEntry> entries_;
};

/// BM25-saturated term frequencies; out-of-vocabulary terms are ignored.
FeatureMatrix vectorize(const Corpus& corpus, const Vocabulary& vocab, const VectorizerConfig& config);

/// Digest of the corpus content and vectorizer settings; the feature cache
/// key.
std::uint64_t feature_fingerprint(const Corpus& corpus, const VectorizerConfig& config);

/// Text cache format:
///   tarsim-features 1
///   <rows> <cols> <nnz> <fingerprint as 16 hex digits>
///   <row> <col> <value>        (nnz lines, row-major, %.17g values)
void save_feature_cache(const FeatureMatrix& matrix, std::uint64_t fingerprint,
                        const std::filesystem::path& path);

/// nullopt when the file is absent or its fingerprint differs; ParseError on
/// a corrupt file.
std::optional<FeatureMatrix> load_feature_cache(const std::filesystem::path& path,
                                                std::uint64_t fingerprint);

} // namespace tarsim
