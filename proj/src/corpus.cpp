// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The tarsim Authors

#include "tarsim/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "tarsim/error.hpp"
#include "tarsim/rng.hpp"

namespace tarsim {

namespace {

void normalize_categories(std::vector<std::string>& cats) {
    std::sort(cats.begin(), cats.end());
    cats.erase(std::unique(cats.begin(), cats.end()), cats.end());
}

const std::vector<std::size_t> kNoDocuments;

} // namespace

Corpus::Corpus(std::vector<Document> documents) : documents_(std::move(documents)) {
    ids_.reserve(documents_.size());
    positions_.reserve(documents_.size());
    for (std::size_t i = 0; i < documents_.size(); ++i) {
        auto& doc = documents_[i];
        if (doc.doc_id.empty()) {
            throw ValidationError("document at position " + std::to_string(i) + " has an empty doc_id");
        }
        if (!positions_.emplace(doc.doc_id, i).second) {
            throw ValidationError("duplicate doc_id \"" + doc.doc_id + "\"");
        }
        ids_.push_back(doc.doc_id);
        normalize_categories(doc.categories);
        for (const auto& c : doc.categories) {
            index_[c].push_back(i);
        }
    }
}

std::optional<std::size_t> Corpus::find(std::string_view doc_id) const {
    auto it = positions_.find(std::string(doc_id));
    if (it == positions_.end()) {
        return std::nullopt;
    }
    return it->second;
}

const std::vector<std::size_t>& Corpus::relevant(std::string_view category) const {
    auto it = index_.find(category);
    return it == index_.end() ? kNoDocuments : it->second;
}

std::vector<std::uint8_t> Corpus::judgments(std::string_view category) const {
    std::vector<std::uint8_t> mask(documents_.size(), 0);
    for (std::size_t i : relevant(category)) {
        mask[i] = 1;
    }
    return mask;
}

std::vector<std::string> Corpus::categories() const {
    std::vector<std::string> out;
    out.reserve(index_.size());
    for (const auto& [name, docs] : index_) {
        out.push_back(name);
    }
    return out;
}

CorpusFormat parse_corpus_format(std::string_view id) {
    if (id == "jsonl") {
        return CorpusFormat::kJsonl;
    }
    throw ArgumentError("unknown corpus format \"" + std::string(id) + "\"");
}

Corpus read_corpus(std::istream& in, CorpusFormat /*format*/) {
    std::vector<Document> docs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(std::string("invalid JSON: ") + e.what(), lineno);
        }
        if (!j.is_object()) {
            throw ParseError("record is not a JSON object", lineno);
        }
        Document doc;
        for (const char* field : {"doc_id", "text"}) {
            auto it = j.find(field);
            if (it == j.end() || !it->is_string()) {
                throw ParseError(std::string("missing or non-string field \"") + field + "\"", lineno);
            }
        }
        doc.doc_id = j["doc_id"].get<std::string>();
        doc.text = j["text"].get<std::string>();
        auto cats = j.find("categories");
        if (cats == j.end() || !cats->is_array()) {
            throw ParseError("missing or non-array field \"categories\"", lineno);
        }
        for (const auto& c : *cats) {
            if (!c.is_string()) {
                throw ParseError("non-string category", lineno);
            }
            doc.categories.push_back(c.get<std::string>());
        }
        docs.push_back(std::move(doc));
    }
    if (in.bad()) {
        throw IoError("read failure");
    }
    return Corpus(std::move(docs));
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open corpus file " + path.string());
    }
    try {
        return read_corpus(in, format);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
    for (const auto& doc : corpus.documents()) {
        nlohmann::ordered_json j;
        j["doc_id"] = doc.doc_id;
        j["text"] = doc.text;
        j["categories"] = doc.categories;
        out << j.dump() << '\n';
    }
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write corpus file " + path.string());
    }
    write_corpus(corpus, out);
    if (!out.flush()) {
        throw IoError("write failure on " + path.string());
    }
}

Corpus merge_qrels(const Corpus& corpus, std::istream& qrels) {
    std::vector<Document> docs = corpus.documents();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(qrels, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, '\t')) {
            fields.push_back(field);
        }
        if (fields.size() != 3 || (fields[2] != "0" && fields[2] != "1") || fields[0].empty()) {
            throw ParseError("expected category<TAB>doc_id<TAB>{0|1}", lineno);
        }
        auto pos = corpus.find(fields[1]);
        if (!pos) {
            throw ValidationError("qrels line " + std::to_string(lineno) + ": unknown doc_id \"" + fields[1] + "\"");
        }
        auto& cats = docs[*pos].categories;
        auto it = std::lower_bound(cats.begin(), cats.end(), fields[0]);
        const bool present = it != cats.end() && *it == fields[0];
        if (fields[2] == "1" && !present) {
            cats.insert(it, fields[0]);
        } else if (fields[2] == "0" && present) {
            cats.erase(it);
        }
    }
    return Corpus(std::move(docs));
}

Corpus merge_qrels(const Corpus& corpus, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open qrels file " + path.string());
    }
    return merge_qrels(corpus, in);
}

Corpus downsample(const Corpus& corpus, double fraction, std::uint64_t rng_seed) {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw ArgumentError("downsample fraction must lie in (0, 1], got " + std::to_string(fraction));
    }
    const std::size_t n = corpus.size();
    const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    if (k == n) {
        return corpus;
    }
    Rng rng(rng_seed);
    auto picked = rng.sample_without_replacement(n, k);
    std::sort(picked.begin(), picked.end());
    std::vector<Document> docs;
    docs.reserve(k);
    for (std::size_t i : picked) {
        docs.push_back(corpus[i]);
    }
    return Corpus(std::move(docs));
}

double category_prevalence(const Corpus& corpus, std::string_view category) {
    if (corpus.empty()) {
        return 0.0;
    }
    return static_cast<double>(corpus.relevant(category).size()) / static_cast<double>(corpus.size());
}

std::string_view to_string(PrevalenceBin bin) {
    switch (bin) {
    case PrevalenceBin::kRare: return "rare";
    case PrevalenceBin::kMedium: return "medium";
    case PrevalenceBin::kCommon: return "common";
    }
    return "?";
}

std::string_view to_string(DifficultyBin bin) {
    switch (bin) {
    case DifficultyBin::kHard: return "hard";
    case DifficultyBin::kMedium: return "medium";
    case DifficultyBin::kEasy: return "easy";
    }
    return "?";
}

PrevalenceBin parse_prevalence_bin(std::string_view s) {
    if (s == "rare") return PrevalenceBin::kRare;
    if (s == "medium") return PrevalenceBin::kMedium;
    if (s == "common") return PrevalenceBin::kCommon;
    throw ArgumentError("unknown prevalence bin \"" + std::string(s) + "\"");
}

DifficultyBin parse_difficulty_bin(std::string_view s) {
    if (s == "hard") return DifficultyBin::kHard;
    if (s == "medium") return DifficultyBin::kMedium;
    if (s == "easy") return DifficultyBin::kEasy;
    throw ArgumentError("unknown difficulty bin \"" + std::string(s) + "\"");
}

std::pair<double, double> difficulty_terciles(std::vector<double> scores) {
    if (scores.empty()) {
        throw ArgumentError("difficulty terciles need at least one score");
    }
    std::sort(scores.begin(), scores.end());
    const std::size_t n = scores.size();
    return {scores[n / 3], scores[(2 * n) / 3]};
}

PrevalenceBin prevalence_bin(double prevalence, const BinThresholds& t) {
    if (prevalence < t.rare_below) return PrevalenceBin::kRare;
    if (prevalence < t.common_from) return PrevalenceBin::kMedium;
    return PrevalenceBin::kCommon;
}

DifficultyBin difficulty_bin(double score, const BinThresholds& t) {
    if (score < t.hard_below) return DifficultyBin::kHard;
    if (score < t.easy_from) return DifficultyBin::kMedium;
    return DifficultyBin::kEasy;
}

std::vector<CategoryBin> assign_bins(std::span<const std::string> categories,
                                     const std::map<std::string, double>& prevalences,
                                     const std::map<std::string, double>& difficulty_scores,
                                     const BinThresholds& thresholds) {
    std::vector<CategoryBin> bins;
    bins.reserve(categories.size());
    for (const auto& c : categories) {
        auto p = prevalences.find(c);
        if (p == prevalences.end()) {
            throw ArgumentError("no prevalence for category \"" + c + "\"");
        }
        auto d = difficulty_scores.find(c);
        if (d == difficulty_scores.end()) {
            throw ArgumentError("no difficulty score for category \"" + c + "\"");
        }
        bins.push_back({c, prevalence_bin(p->second, thresholds), difficulty_bin(d->second, thresholds)});
    }
    return bins;
}

} // namespace tarsim
