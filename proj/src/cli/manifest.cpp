// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The tarsim Authors

#include <fstream>
#include <set>
#include <tuple>

#include "tarsim/cli.hpp"

namespace tarsim::cli {

namespace {

nlohmann::json merged(const nlohmann::json& defaults, const nlohmann::json& overrides) {
    nlohmann::json out = defaults.is_object() ? defaults : nlohmann::json::object();
    for (const auto& [k, v] : overrides.items()) {
        out[k] = v;
    }
    return out;
}

} // namespace

std::filesystem::path ExperimentManifest::resolve(const std::string& p) const {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
}

ExperimentManifest parse_manifest(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) {
        throw ParseError("manifest is not a JSON object");
    }
    static const std::set<std::string> known{"corpus",      "qrels",   "output_dir", "parallelism", "feature_cache",
                                             "downsample", "features", "defaults",   "runs",        "grid"};
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) {
            throw ParseError("unknown manifest key \"" + key + "\"");
        }
    }
    ExperimentManifest m;
    m.base_dir = base_dir;
    auto corpus = j.find("corpus");
    if (corpus == j.end() || !corpus->is_string()) {
        throw ParseError("manifest needs a string \"corpus\"");
    }
    m.corpus = corpus->get<std::string>();
    try {
        if (j.contains("qrels")) m.qrels = j.at("qrels").get<std::string>();
        if (j.contains("output_dir")) m.output_dir = j.at("output_dir").get<std::string>();
        m.parallelism = j.value("parallelism", std::size_t{1});
        m.feature_cache = j.value("feature_cache", true);
        if (j.contains("downsample")) {
            const auto& d = j.at("downsample");
            m.downsample = DownsampleSpec{d.at("fraction").get<double>(), d.value("seed", std::uint64_t{0})};
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("manifest: ") + e.what());
    }
    if (m.parallelism == 0) {
        m.parallelism = 1;
    }

    const nlohmann::json defaults = j.value("defaults", nlohmann::json::object());
    std::vector<nlohmann::json> specs;
    if (auto runs = j.find("runs"); runs != j.end()) {
        if (!runs->is_array()) {
            throw ParseError("manifest \"runs\" must be an array");
        }
        for (const auto& r : *runs) {
            specs.push_back(merged(defaults, r));
        }
    }
    if (auto grid = j.find("grid"); grid != j.end()) {
        try {
            const auto categories = grid->at("categories").get<std::vector<std::string>>();
            const auto strategies =
                grid->value("strategies", std::vector<std::string>{std::string(to_string(StrategyKind::kRelevance))});
            const auto classifiers =
                grid->value("classifiers", nlohmann::json::array({nlohmann::json{{"type", "logreg"}}}));
            for (const auto& c : categories) {
                for (const auto& s : strategies) {
                    for (const auto& cl : classifiers) {
                        specs.push_back(merged(defaults, {{"category", c}, {"strategy", s}, {"classifier", cl}}));
                    }
                }
            }
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("manifest grid: ") + e.what());
        }
    }
    if (specs.empty()) {
        throw ParseError("manifest declares no runs");
    }

    std::set<std::tuple<std::string, std::string, std::string>> seen;
    for (auto& spec : specs) {
        spec.erase("corpus");
        spec.erase("downsample");
        spec.erase("features");
        RunConfig config = config_from_json(spec);
        config.corpus_ref = m.corpus;
        config.downsample = m.downsample;
        if (auto f = j.find("features"); f != j.end()) {
            config.features = config_from_json({{"category", "_"}, {"features", *f}}).features;
        }
        config.validate();
        const auto key = std::make_tuple(config.category, std::string(to_string(config.strategy.kind)),
                                         config.classifier.label());
        if (!seen.insert(key).second) {
            throw ValidationError("duplicate run (" + std::get<0>(key) + ", " + std::get<1>(key) + ", " +
                                  std::get<2>(key) + ") in manifest");
        }
        m.runs.push_back(std::move(config));
    }
    m.features = m.runs.front().features;
    return m;
}

ExperimentManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open manifest " + path.string());
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return parse_manifest(j, path.parent_path());
}

} // namespace tarsim::cli
