// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The tarsim Authors

#include "tarsim/features.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "tarsim/error.hpp"
#include "tarsim/rng.hpp"

namespace tarsim {

void VectorizerConfig::validate() const {
    if (!(k1 > 0.0) || !std::isfinite(k1)) {
        throw ArgumentError("k1 must be > 0");
    }
    if (!(b >= 0.0 && b <= 1.0)) {
        throw ArgumentError("b must lie in [0, 1]");
    }
    if (min_df < 1) {
        throw ArgumentError("min_df must be >= 1");
    }
}

Vocabulary::Vocabulary(std::vector<std::string> terms, std::vector<std::size_t> document_frequencies,
                       std::vector<std::size_t> document_lengths)
    : terms_(std::move(terms)), df_(std::move(document_frequencies)), doc_lengths_(std::move(document_lengths)) {
    lookup_.reserve(terms_.size());
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        lookup_.emplace(terms_[i], i);
    }
    double total = 0.0;
    for (auto len : doc_lengths_) {
        total += static_cast<double>(len);
    }
    avg_doc_length_ = doc_lengths_.empty() ? 0.0 : total / static_cast<double>(doc_lengths_.size());
}

std::optional<std::size_t> Vocabulary::index(std::string_view term) const {
    auto it = lookup_.find(std::string(term));
    if (it == lookup_.end()) {
        return std::nullopt;
    }
    return it->second;
}

Vocabulary build_vocabulary(const Corpus& corpus, const VectorizerConfig& config) {
    config.validate();
    if (corpus.empty()) {
        throw ArgumentError("cannot build a vocabulary from an empty corpus");
    }
    std::map<std::string, std::size_t> df;
    std::vector<std::size_t> lengths;
    lengths.reserve(corpus.size());
    for (const auto& doc : corpus.documents()) {
        auto tokens = tokenize(doc.text, config.tokenizer);
        lengths.push_back(tokens.size());
        std::sort(tokens.begin(), tokens.end());
        tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
        for (auto& t : tokens) {
            ++df[std::move(t)];
        }
    }
    std::vector<std::string> terms;
    std::vector<std::size_t> freqs;
    for (auto& [term, count] : df) {
        if (count >= config.min_df) {
            terms.push_back(term);
            freqs.push_back(count);
        }
    }
    return Vocabulary(std::move(terms), std::move(freqs), std::move(lengths));
}

void FeatureMatrix::append_row(std::span<const FeatureEntry> entries) {
    entries_.insert(entries_.end(), entries.begin(), entries.end());
    row_ptr_.push_back(entries_.size());
}

FeatureMatrix vectorize(const Corpus& corpus, const Vocabulary& vocab, const VectorizerConfig& config) {
    config.validate();
    FeatureMatrix matrix(vocab.size());
    const double n_docs = static_cast<double>(vocab.num_documents());
    std::vector<FeatureEntry> row;
    std::map<std::uint32_t, std::size_t> counts;
    for (const auto& doc : corpus.documents()) {
        const auto tokens = tokenize(doc.text, config.tokenizer);
        counts.clear();
        for (const auto& t : tokens) {
            if (auto col = vocab.index(t)) {
                ++counts[static_cast<std::uint32_t>(*col)];
            }
        }
        const auto dl = static_cast<double>(tokens.size());
        row.clear();
        for (const auto& [col, tf] : counts) {
            double v = saturated_tf(static_cast<double>(tf), dl, vocab.avg_doc_length(), config.k1, config.b);
            if (config.idf) {
                const auto df = static_cast<double>(vocab.document_frequency(col));
                v *= std::log(1.0 + (n_docs - df + 0.5) / (df + 0.5));
            }
            row.push_back({col, v});
        }
        matrix.append_row(row);
    }
    return matrix;
}

std::uint64_t feature_fingerprint(const Corpus& corpus, const VectorizerConfig& config) {
    std::ostringstream key;
    key.precision(17);
    key << "k1=" << config.k1 << ";b=" << config.b << ";min_df=" << config.min_df
        << ";tokenizer=" << to_string(config.tokenizer) << ";idf=" << config.idf << ';';
    const std::string k = key.str();
    std::uint64_t h = fnv1a64(k.data(), k.size());
    for (const auto& doc : corpus.documents()) {
        h = fnv1a64(doc.doc_id.data(), doc.doc_id.size(), h);
        h = fnv1a64("\x1f", 1, h);
        h = fnv1a64(doc.text.data(), doc.text.size(), h);
        h = fnv1a64("\x1e", 1, h);
    }
    return h;
}

void save_feature_cache(const FeatureMatrix& matrix, std::uint64_t fingerprint, const std::filesystem::path& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) {
        throw IoError("cannot write feature cache " + path.string());
    }
    std::fprintf(f, "tarsim-features 1\n%zu %zu %zu %016" PRIx64 "\n", matrix.rows(), matrix.cols(), matrix.nnz(),
                 fingerprint);
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        for (const auto& e : matrix.row(i)) {
            std::fprintf(f, "%zu %" PRIu32 " %.17g\n", i, e.column, e.value);
        }
    }
    if (std::fclose(f) != 0) {
        throw IoError("write failure on " + path.string());
    }
}

std::optional<FeatureMatrix> load_feature_cache(const std::filesystem::path& path, std::uint64_t fingerprint) {
    std::ifstream in(path);
    if (!in) {
        return std::nullopt;
    }
    std::string magic;
    int version = 0;
    std::size_t rows = 0, cols = 0, nnz = 0;
    std::string hash;
    if (!(in >> magic >> version >> rows >> cols >> nnz >> hash) || magic != "tarsim-features" || version != 1) {
        throw ParseError(path.string() + ": not a feature cache");
    }
    if (hash.size() != 16 || std::strtoull(hash.c_str(), nullptr, 16) != fingerprint) {
        return std::nullopt;
    }
    FeatureMatrix matrix(cols);
    std::vector<FeatureEntry> row;
    std::size_t current = 0;
    for (std::size_t k = 0; k < nnz; ++k) {
        std::size_t r = 0;
        std::uint32_t c = 0;
        double v = 0.0;
        if (!(in >> r >> c >> v) || r >= rows || c >= cols || r < current) {
            throw ParseError(path.string() + ": corrupt entry " + std::to_string(k));
        }
        while (current < r) {
            matrix.append_row(row);
            row.clear();
            ++current;
        }
        row.push_back({c, v});
    }
    while (current < rows) {
        matrix.append_row(row);
        row.clear();
        ++current;
    }
    return matrix;
}

} // namespace tarsim
