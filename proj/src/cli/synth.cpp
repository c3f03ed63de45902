// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The tarsim Authors

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "tarsim/cli.hpp"
#include "tarsim/rng.hpp"

namespace tarsim::cli {

namespace {

std::string background_token(std::size_t rank) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "w%zu", rank);
    return buf;
}

} // namespace

std::string marker_token(std::size_t category_index, std::size_t j) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "zz%zum%zu", category_index, j);
    return buf;
}

SynthSpec parse_synth_spec(const nlohmann::json& j) {
    SynthSpec s;
    try {
        s.n_docs = j.value("n_docs", s.n_docs);
        s.doc_length = j.value("doc_length", s.doc_length);
        s.vocab_size = j.value("vocab_size", s.vocab_size);
        s.zipf_exponent = j.value("zipf_exponent", s.zipf_exponent);
        s.markers_per_category = j.value("markers_per_category", s.markers_per_category);
        s.marker_occurrences = j.value("marker_occurrences", s.marker_occurrences);
        for (const auto& c : j.at("categories")) {
            s.categories.push_back(
                {c.at("name").get<std::string>(), c.at("prevalence").get<double>(), c.value("noise", 0.0)});
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("synthetic corpus spec: ") + e.what());
    }
    return s;
}

Corpus synthesize_corpus(const SynthSpec& spec, std::uint64_t seed) {
    if (spec.n_docs == 0 || spec.vocab_size == 0) {
        throw ArgumentError("synthetic corpus needs n_docs > 0 and vocab_size > 0");
    }
    if (spec.categories.empty()) {
        throw ArgumentError("synthetic corpus needs at least one category");
    }
    if (spec.markers_per_category == 0 || spec.marker_occurrences == 0) {
        throw ArgumentError("markers_per_category and marker_occurrences must be >= 1");
    }
    const auto n = static_cast<double>(spec.n_docs);
    for (const auto& c : spec.categories) {
        if (!(c.prevalence > 0.0 && c.prevalence <= 1.0) || c.prevalence * n < 1.0) {
            throw ArgumentError("category \"" + c.name + "\": prevalence " + std::to_string(c.prevalence) +
                                " yields fewer than one positive in " + std::to_string(spec.n_docs) + " documents");
        }
        if (!(c.noise >= 0.0 && c.noise <= 1.0)) {
            throw ArgumentError("category \"" + c.name + "\": noise must lie in [0, 1]");
        }
    }

    Rng rng(seed);

    // Zipfian background vocabulary.
    std::vector<double> cdf(spec.vocab_size);
    double total = 0.0;
    for (std::size_t r = 0; r < spec.vocab_size; ++r) {
        total += 1.0 / std::pow(static_cast<double>(r + 1), spec.zipf_exponent);
        cdf[r] = total;
    }
    auto draw_background = [&] {
        const double u = rng.uniform01() * total;
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        return background_token(std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), spec.vocab_size - 1));
    };

    std::vector<std::vector<std::string>> tokens(spec.n_docs);
    for (auto& doc : tokens) {
        doc.reserve(spec.doc_length);
        for (std::size_t t = 0; t < spec.doc_length; ++t) {
            doc.push_back(draw_background());
        }
    }

    std::vector<std::vector<std::string>> labels(spec.n_docs);
    auto insert_markers = [&](std::vector<std::string>& doc, std::size_t category_index) {
        for (std::size_t o = 0; o < spec.marker_occurrences; ++o) {
            auto token = marker_token(category_index, rng.uniform_index(spec.markers_per_category));
            const std::size_t pos = rng.uniform_index(doc.size() + 1);
            doc.insert(doc.begin() + static_cast<std::ptrdiff_t>(pos), std::move(token));
        }
    };
    for (std::size_t ci = 0; ci < spec.categories.size(); ++ci) {
        const auto& c = spec.categories[ci];
        const auto r = static_cast<std::size_t>(std::llround(c.prevalence * n));
        std::vector<char> positive(spec.n_docs, 0);
        for (std::size_t d : rng.sample_without_replacement(spec.n_docs, r)) {
            positive[d] = 1;
            labels[d].push_back(c.name);
        }
        const double decoy_rate =
            r < spec.n_docs ? c.noise * static_cast<double>(r) / static_cast<double>(spec.n_docs - r) : 0.0;
        for (std::size_t d = 0; d < spec.n_docs; ++d) {
            const bool carries = positive[d] ? !rng.bernoulli(c.noise) : rng.bernoulli(decoy_rate);
            if (carries) {
                insert_markers(tokens[d], ci);
            }
        }
    }

    std::vector<Document> docs;
    docs.reserve(spec.n_docs);
    for (std::size_t d = 0; d < spec.n_docs; ++d) {
        char id[32];
        std::snprintf(id, sizeof id, "d%06zu", d);
        std::string text;
        for (const auto& t : tokens[d]) {
            if (!text.empty()) {
                text.push_back(' ');
            }
            text += t;
        }
        docs.push_back({id, std::move(text), std::move(labels[d])});
    }
    return Corpus(std::move(docs));
}

int cmd_synth(const std::filesystem::path& spec_path, const std::filesystem::path& out_path, std::uint64_t seed,
              std::ostream& log) {
    try {
        std::ifstream in(spec_path);
        if (!in) {
            throw IoError("cannot open synthetic corpus spec " + spec_path.string());
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(spec_path.string() + ": " + e.what());
        }
        const auto corpus = synthesize_corpus(parse_synth_spec(j), seed);
        save_corpus(corpus, out_path);
        log << "wrote " << corpus.size() << " documents to " << out_path.string() << '\n';
        return 0;
    } catch (const Error& e) {
        log << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace tarsim::cli
