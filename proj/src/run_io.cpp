// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The tarsim Authors

#include <fstream>
#include <set>
#include <sstream>

#include "tarsim/engine.hpp"

namespace tarsim {

namespace {

using ordered = nlohmann::ordered_json;

template <typename T>
T field(const nlohmann::json& j, const char* key, const T& fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        return fallback;
    }
    try {
        return it->get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ParseError(std::string("field \"") + key + "\" has the wrong type");
    }
}

template <typename T>
T required(const nlohmann::json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        throw ParseError(std::string("missing field \"") + key + "\"");
    }
    try {
        return it->get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ParseError(std::string("field \"") + key + "\" has the wrong type");
    }
}

nlohmann::json cost_structure_to_json(const CostStructure& cs) {
    return {{"name", cs.name},
            {"train_pos", cs.train_pos},
            {"train_neg", cs.train_neg},
            {"review_pos", cs.review_pos},
            {"review_neg", cs.review_neg}};
}

CostStructure cost_structure_from_json(const nlohmann::json& j) {
    if (j.is_string()) {
        const auto name = j.get<std::string>();
        if (name == "uniform") return CostStructure::uniform();
        if (name == "expensive") return CostStructure::expensive_training();
        throw ArgumentError("unknown cost structure \"" + name + "\"");
    }
    CostStructure cs;
    cs.name = required<std::string>(j, "name");
    cs.train_pos = required<double>(j, "train_pos");
    cs.train_neg = required<double>(j, "train_neg");
    cs.review_pos = required<double>(j, "review_pos");
    cs.review_neg = required<double>(j, "review_neg");
    return cs;
}

nlohmann::json parse_line(const std::string& line, std::size_t lineno) {
    try {
        auto j = nlohmann::json::parse(line);
        if (!j.is_object()) {
            throw ParseError("record is not an object", lineno);
        }
        return j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what(), lineno);
    }
}

void write_atomically(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot write " + tmp.string());
        }
        out << content;
        if (!out.flush()) {
            throw IoError("write failure on " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

} // namespace

nlohmann::json config_to_json(const RunConfig& config) {
    nlohmann::json j;
    j["corpus"] = config.corpus_ref;
    if (config.downsample) {
        j["downsample"] = {{"fraction", config.downsample->fraction}, {"seed", config.downsample->seed}};
    }
    j["category"] = config.category;
    j["strategy"] = std::string(to_string(config.strategy.kind));
    j["batch_size"] = config.strategy.batch_size;
    j["iterations"] = config.iterations;
    j["recall_target"] = config.recall_target;
    j["cost_structures"] = nlohmann::json::array();
    for (const auto& cs : config.cost_structures) {
        j["cost_structures"].push_back(cost_structure_to_json(cs));
    }
    if (config.classifier.kind == ClassifierSpec::Kind::kLogReg) {
        j["classifier"] = {{"type", "logreg"}, {"penalty", config.classifier.penalty}};
    } else {
        const auto& p = config.classifier.plugin;
        j["classifier"] = {{"type", "plugin"},
                           {"name", p.name},
                           {"command", p.command},
                           {"config", p.config},
                           {"handshake_timeout_seconds", p.handshake_timeout_seconds},
                           {"request_timeout_seconds", p.request_timeout_seconds}};
    }
    j["features"] = {{"k1", config.features.k1},
                     {"b", config.features.b},
                     {"min_df", config.features.min_df},
                     {"tokenizer", std::string(to_string(config.features.tokenizer))},
                     {"idf", config.features.idf}};
    j["seed"] = config.rng_seed;
    return j;
}

RunConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw ParseError("run config is not an object");
    }
    static const std::set<std::string> known{"corpus",         "downsample", "category",   "strategy",
                                             "batch_size",     "iterations", "recall_target", "cost_structures",
                                             "classifier",     "features",   "seed"};
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) {
            throw ParseError("unknown run config key \"" + key + "\"");
        }
    }
    RunConfig c;
    c.corpus_ref = field<std::string>(j, "corpus", "");
    if (auto it = j.find("downsample"); it != j.end() && !it->is_null()) {
        c.downsample = DownsampleSpec{required<double>(*it, "fraction"), field<std::uint64_t>(*it, "seed", 0)};
    }
    c.category = required<std::string>(j, "category");
    c.strategy.kind = parse_strategy(field<std::string>(j, "strategy", "relevance"));
    c.strategy.batch_size = field<std::size_t>(j, "batch_size", c.strategy.batch_size);
    c.iterations = field<int>(j, "iterations", c.iterations);
    c.recall_target = field<double>(j, "recall_target", c.recall_target);
    if (auto it = j.find("cost_structures"); it != j.end() && !it->is_null()) {
        if (!it->is_array()) {
            throw ParseError("\"cost_structures\" must be an array");
        }
        c.cost_structures.clear();
        for (const auto& cs : *it) {
            c.cost_structures.push_back(cost_structure_from_json(cs));
        }
    }
    if (auto it = j.find("classifier"); it != j.end() && !it->is_null()) {
        const auto type = field<std::string>(*it, "type", "logreg");
        if (type == "logreg") {
            c.classifier.kind = ClassifierSpec::Kind::kLogReg;
            c.classifier.penalty = field<double>(*it, "penalty", 1.0);
        } else if (type == "plugin") {
            c.classifier.kind = ClassifierSpec::Kind::kPlugin;
            auto& p = c.classifier.plugin;
            p.name = required<std::string>(*it, "name");
            p.command = required<std::vector<std::string>>(*it, "command");
            if (auto cfg = it->find("config"); cfg != it->end()) {
                p.config = *cfg;
            }
            p.handshake_timeout_seconds = field<double>(*it, "handshake_timeout_seconds", p.handshake_timeout_seconds);
            p.request_timeout_seconds = field<double>(*it, "request_timeout_seconds", p.request_timeout_seconds);
        } else {
            throw ArgumentError("unknown classifier type \"" + type + "\"");
        }
    }
    if (auto it = j.find("features"); it != j.end() && !it->is_null()) {
        auto& f = c.features;
        f.k1 = field<double>(*it, "k1", f.k1);
        f.b = field<double>(*it, "b", f.b);
        f.min_df = field<std::size_t>(*it, "min_df", f.min_df);
        f.tokenizer = parse_tokenizer(field<std::string>(*it, "tokenizer", std::string(to_string(f.tokenizer))));
        f.idf = field<bool>(*it, "idf", f.idf);
    }
    c.rng_seed = field<std::uint64_t>(j, "seed", 0);
    return c;
}

void write_run(const RunResult& result, std::ostream& out) {
    ordered head;
    head["type"] = "config";
    head["config"] = config_to_json(result.config);
    out << head.dump() << '\n';

    for (const auto& r : result.records) {
        ordered line;
        line["type"] = "iteration";
        line["iteration"] = r.iteration;
        line["n_labeled"] = r.n_labeled();
        line["n_labeled_pos"] = r.counts.train_pos;
        line["n_labeled_neg"] = r.counts.train_neg;
        line["d_star"] = r.d_star();
        line["d_star_pos"] = r.counts.review_pos;
        line["d_star_neg"] = r.counts.review_neg;
        ordered costs = ordered::object();
        for (std::size_t s = 0; s < result.config.cost_structures.size(); ++s) {
            costs[result.config.cost_structures[s].name] = r.costs.at(s);
        }
        line["costs"] = std::move(costs);
        line["r_precision"] = r.r_precision;
        line["dfr"] = r.dfr;
        line["wss"] = r.wss;
        line["scores_digest"] = r.scores_digest;
        line["batch"] = r.batch_selected;
        out << line.dump() << '\n';
    }

    ordered tail;
    tail["type"] = "summary";
    tail["complete"] = result.complete;
    tail["exhausted"] = result.exhausted;
    tail["seed_doc"] = result.seed_doc;
    ordered mins = ordered::array();
    for (std::size_t s = 0; s < result.min_cost.size(); ++s) {
        mins.push_back({{"structure", result.config.cost_structures.at(s).name},
                        {"iteration", result.min_cost[s].iteration},
                        {"cost", result.min_cost[s].cost}});
    }
    tail["min_cost"] = std::move(mins);
    if (!result.complete) {
        tail["error"] = result.error;
    }
    out << tail.dump() << '\n';
}

void write_timings(const RunResult& result, std::ostream& out) {
    for (const auto& r : result.records) {
        ordered line;
        line["iteration"] = r.iteration;
        if (r.timing.fit_seconds) line["fit_seconds"] = *r.timing.fit_seconds;
        if (r.timing.score_seconds) line["score_seconds"] = *r.timing.score_seconds;
        out << line.dump() << '\n';
    }
}

RunResult read_run(std::istream& in) {
    RunResult result;
    std::string line;
    std::size_t lineno = 0;
    bool have_config = false;
    bool have_summary = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        if (have_summary) {
            throw ParseError("content after the summary line", lineno);
        }
        const auto j = parse_line(line, lineno);
        const auto type = field<std::string>(j, "type", "");
        try {
            if (!have_config) {
                if (type != "config") {
                    throw ParseError("first line must be the run config");
                }
                result.config = config_from_json(required<nlohmann::json>(j, "config"));
                have_config = true;
            } else if (type == "iteration") {
                IterationRecord r;
                r.iteration = required<int>(j, "iteration");
                r.counts.train_pos = required<std::size_t>(j, "n_labeled_pos");
                r.counts.train_neg = required<std::size_t>(j, "n_labeled_neg");
                r.counts.review_pos = required<std::size_t>(j, "d_star_pos");
                r.counts.review_neg = required<std::size_t>(j, "d_star_neg");
                const auto costs = required<nlohmann::json>(j, "costs");
                for (const auto& cs : result.config.cost_structures) {
                    r.costs.push_back(required<double>(costs, cs.name.c_str()));
                }
                r.r_precision = required<double>(j, "r_precision");
                r.dfr = required<double>(j, "dfr");
                r.wss = required<double>(j, "wss");
                r.scores_digest = required<std::string>(j, "scores_digest");
                r.batch_selected = required<std::vector<std::string>>(j, "batch");
                result.records.push_back(std::move(r));
            } else if (type == "summary") {
                result.complete = required<bool>(j, "complete");
                result.exhausted = field<bool>(j, "exhausted", false);
                result.seed_doc = required<std::string>(j, "seed_doc");
                result.error = field<std::string>(j, "error", "");
                for (const auto& m : required<nlohmann::json>(j, "min_cost")) {
                    result.min_cost.push_back({required<int>(m, "iteration"), required<double>(m, "cost")});
                }
                have_summary = true;
            } else {
                throw ParseError("unexpected record type \"" + type + "\"");
            }
        } catch (const ParseError& e) {
            if (e.line() != 0) {
                throw;
            }
            throw ParseError(e.what(), lineno);
        }
    }
    if (!have_config) {
        throw ParseError("empty run file");
    }
    if (!have_summary) {
        throw ParseError("run file is truncated (no summary line)");
    }
    return result;
}

void read_timings(std::istream& in, RunResult& result) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        const auto j = parse_line(line, lineno);
        const int iteration = required<int>(j, "iteration");
        for (auto& r : result.records) {
            if (r.iteration == iteration) {
                if (j.contains("fit_seconds")) r.timing.fit_seconds = required<double>(j, "fit_seconds");
                if (j.contains("score_seconds")) r.timing.score_seconds = required<double>(j, "score_seconds");
            }
        }
    }
}

std::filesystem::path timings_path(const std::filesystem::path& run_path) {
    auto p = run_path;
    p += ".timings";
    return p;
}

void persist_run(const RunResult& result, const std::filesystem::path& path) {
    std::ostringstream run, timings;
    write_run(result, run);
    write_timings(result, timings);
    write_atomically(timings_path(path), timings.str());
    write_atomically(path, run.str());
}

RunResult load_run(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open run file " + path.string());
    }
    RunResult result;
    try {
        result = read_run(in);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    std::ifstream t(timings_path(path));
    if (t) {
        try {
            read_timings(t, result);
        } catch (const ParseError& e) {
            throw ParseError(timings_path(path).string() + ": " + e.what());
        }
    }
    return result;
}

void write_metrics_report(const RunResult& result, std::ostream& out) {
    const auto uniform = CostStructure::uniform();
    const auto expensive = CostStructure::expensive_training();
    for (const auto& r : result.records) {
        ordered line;
        line["category"] = result.config.category;
        line["iteration"] = r.iteration;
        line["n_labeled"] = r.n_labeled();
        line["n_labeled_pos"] = r.counts.train_pos;
        line["r_precision"] = r.r_precision;
        line["d_star"] = r.d_star();
        line["cost_uniform"] = r.counts.cost(uniform);
        line["cost_expensive"] = r.counts.cost(expensive);
        line["dfr"] = r.dfr;
        line["wss"] = r.wss;
        line["strategy"] = std::string(to_string(result.config.strategy.kind));
        line["classifier"] = result.config.classifier.label();
        out << line.dump() << '\n';
    }
}

} // namespace tarsim
