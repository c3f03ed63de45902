// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The tarsim Authors

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <tuple>

#include "tarsim/cli.hpp"

namespace tarsim::cli {

namespace {

using Key = std::tuple<std::string, std::string, std::string>; // category, strategy, classifier

struct Accumulator {
    RunMetrics metrics;
    int last_iteration = -1;
};

std::string bin_label(const CategoryBin& b) {
    return std::string(to_string(b.difficulty_bin)) + "-" + std::string(to_string(b.prevalence_bin));
}

} // namespace

std::vector<RunMetrics> read_metrics_report(std::istream& in) {
    std::map<Key, Accumulator> runs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
            const Key key{j.at("category").get<std::string>(), j.value("strategy", std::string()),
                          j.value("classifier", std::string())};
            const int iteration = j.at("iteration").get<int>();
            const double uniform = j.at("cost_uniform").get<double>();
            const double expensive = j.at("cost_expensive").get<double>();
            const double rp = j.at("r_precision").get<double>();
            auto [it, inserted] = runs.try_emplace(key);
            auto& acc = it->second;
            if (inserted) {
                acc.metrics = {std::get<0>(key), std::get<1>(key), std::get<2>(key), uniform, expensive, rp, 0};
            }
            acc.metrics.min_cost_uniform = std::min(acc.metrics.min_cost_uniform, uniform);
            acc.metrics.min_cost_expensive = std::min(acc.metrics.min_cost_expensive, expensive);
            if (iteration > acc.last_iteration) {
                acc.last_iteration = iteration;
                acc.metrics.final_r_precision = rp;
            }
            ++acc.metrics.iterations;
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("metrics report: ") + e.what(), lineno);
        }
    }
    std::vector<RunMetrics> out;
    for (auto& [key, acc] : runs) {
        out.push_back(std::move(acc.metrics));
    }
    return out;
}

std::vector<RunMetrics> load_metrics_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw IoError("not a directory: " + dir.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (entry.is_regular_file() && name.ends_with(".metrics.jsonl")) {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<RunMetrics> out;
    for (const auto& f : files) {
        std::ifstream in(f);
        try {
            auto runs = read_metrics_report(in);
            out.insert(out.end(), runs.begin(), runs.end());
        } catch (const ParseError& e) {
            throw ParseError(f.string() + ": " + e.what());
        }
    }
    return out;
}

BinMap load_bins(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open bins file " + path.string());
    }
    BinMap bins;
    try {
        const auto j = nlohmann::json::parse(in);
        for (const auto& [category, v] : j.at("categories").items()) {
            bins[category] = {category, parse_prevalence_bin(v.at("prevalence").get<std::string>()),
                              parse_difficulty_bin(v.at("difficulty").get<std::string>())};
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return bins;
}

void save_bins(const std::vector<CategoryBin>& bins, const BinThresholds& t, const std::filesystem::path& path) {
    nlohmann::ordered_json j;
    j["thresholds"] = {{"rare_below", t.rare_below},
                       {"common_from", t.common_from},
                       {"hard_below", t.hard_below},
                       {"easy_from", t.easy_from}};
    nlohmann::ordered_json cats = nlohmann::ordered_json::object();
    for (const auto& b : bins) {
        cats[b.category] = {{"prevalence", std::string(to_string(b.prevalence_bin))},
                            {"difficulty", std::string(to_string(b.difficulty_bin))}};
    }
    j["categories"] = std::move(cats);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write bins file " + path.string());
    }
    out << j.dump(2) << '\n';
}

AggregateReport aggregate(const std::vector<RunMetrics>& results, const std::vector<RunMetrics>& baseline,
                          const std::optional<BinMap>& bins) {
    std::map<std::pair<std::string, std::string>, const RunMetrics*> base;
    for (const auto& b : baseline) {
        if (!base.emplace(std::make_pair(b.category, b.strategy), &b).second) {
            throw ArgumentError("baseline holds more than one run for category \"" + b.category + "\", strategy \"" +
                                b.strategy + "\"");
        }
    }

    // (classifier, strategy) -> runs paired with their baseline.
    std::map<std::pair<std::string, std::string>, std::vector<std::pair<const RunMetrics*, const RunMetrics*>>> groups;
    std::set<std::string> excluded;
    for (const auto& r : results) {
        auto it = base.find({r.category, r.strategy});
        if (it == base.end()) {
            excluded.insert(r.category);
            continue;
        }
        groups[{r.classifier, r.strategy}].emplace_back(&r, it->second);
    }

    AggregateReport report;
    report.excluded.assign(excluded.begin(), excluded.end());
    for (const auto& [key, pairs] : groups) {
        for (const std::string structure : {"uniform", "expensive"}) {
            auto cost = [&](const RunMetrics* m) {
                return structure == "uniform" ? m->min_cost_uniform : m->min_cost_expensive;
            };
            // "all" first, then bins in a fixed difficulty x prevalence order.
            std::vector<std::pair<std::string, std::vector<std::pair<const RunMetrics*, const RunMetrics*>>>> cells;
            cells.emplace_back("all", pairs);
            if (bins) {
                for (auto d : {DifficultyBin::kHard, DifficultyBin::kMedium, DifficultyBin::kEasy}) {
                    for (auto p : {PrevalenceBin::kRare, PrevalenceBin::kMedium, PrevalenceBin::kCommon}) {
                        std::vector<std::pair<const RunMetrics*, const RunMetrics*>> members;
                        for (const auto& pr : pairs) {
                            auto b = bins->find(pr.first->category);
                            if (b != bins->end() && b->second.difficulty_bin == d && b->second.prevalence_bin == p) {
                                members.push_back(pr);
                            }
                        }
                        if (!members.empty()) {
                            cells.emplace_back(bin_label({"", p, d}), std::move(members));
                        }
                    }
                }
            }
            for (const auto& [label, members] : cells) {
                AggregateCell cell;
                cell.classifier = key.first;
                cell.strategy = key.second;
                cell.cost_structure = structure;
                cell.bin = label;
                cell.n = members.size();
                std::vector<double> ratios, run_costs, base_costs;
                double rp = 0.0, base_rp = 0.0;
                for (const auto& [run, ref] : members) {
                    ratios.push_back(relative_cost(cost(run), cost(ref)));
                    run_costs.push_back(cost(run));
                    base_costs.push_back(cost(ref));
                    rp += run->final_r_precision;
                    base_rp += ref->final_r_precision;
                }
                cell.mean_relative_cost = aggregate_relative_costs(ratios);
                cell.mean_r_precision = rp / static_cast<double>(cell.n);
                cell.baseline_mean_r_precision = base_rp / static_cast<double>(cell.n);
                if (label == "all" && cell.n >= 2) {
                    try {
                        cell.t_test = paired_t_test(run_costs, base_costs);
                    } catch (const DegenerateTestError&) {
                        cell.t_test_degenerate = true;
                    }
                }
                report.cells.push_back(std::move(cell));
            }
        }
    }
    return report;
}

void print_aggregate(const AggregateReport& report, std::ostream& out) {
    out << "classifier\tstrategy\tcost\tbin\tn\trel_cost\tr_prec\tbase_r_prec\tt\tp\n";
    for (const auto& c : report.cells) {
        out << c.classifier << '\t' << c.strategy << '\t' << c.cost_structure << '\t' << c.bin << '\t' << c.n << '\t'
            << std::fixed << std::setprecision(4) << c.mean_relative_cost << '\t' << c.mean_r_precision << '\t'
            << c.baseline_mean_r_precision << '\t';
        if (c.t_test) {
            out << c.t_test->t << '\t' << c.t_test->p;
        } else if (c.t_test_degenerate) {
            out << "degenerate\tdegenerate";
        } else {
            out << "-\t-";
        }
        out << std::defaultfloat << '\n';
    }
    for (const auto& e : report.excluded) {
        out << "# excluded (no baseline): " << e << '\n';
    }
}

nlohmann::json aggregate_to_json(const AggregateReport& report) {
    nlohmann::ordered_json cells = nlohmann::ordered_json::array();
    for (const auto& c : report.cells) {
        nlohmann::ordered_json j;
        j["classifier"] = c.classifier;
        j["strategy"] = c.strategy;
        j["cost_structure"] = c.cost_structure;
        j["bin"] = c.bin;
        j["n"] = c.n;
        j["mean_relative_cost"] = c.mean_relative_cost;
        j["mean_r_precision"] = c.mean_r_precision;
        j["baseline_mean_r_precision"] = c.baseline_mean_r_precision;
        if (c.t_test) {
            j["t_test"] = {{"t", c.t_test->t}, {"p", c.t_test->p}, {"df", c.t_test->df}};
        } else if (c.t_test_degenerate) {
            j["t_test"] = "degenerate";
        } else {
            j["t_test"] = nullptr;
        }
        cells.push_back(std::move(j));
    }
    nlohmann::ordered_json out;
    out["cells"] = std::move(cells);
    out["excluded"] = report.excluded;
    return nlohmann::json::parse(out.dump());
}

int cmd_aggregate(const std::filesystem::path& results_dir, const std::filesystem::path& baseline_dir,
                  const std::optional<std::filesystem::path>& bins_path,
                  const std::optional<std::filesystem::path>& json_out, std::ostream& out, std::ostream& log) {
    try {
        const auto results = load_metrics_dir(results_dir);
        const auto baseline = load_metrics_dir(baseline_dir);
        std::optional<BinMap> bins;
        if (bins_path) {
            bins = load_bins(*bins_path);
        }
        const auto report = aggregate(results, baseline, bins);
        for (const auto& e : report.excluded) {
            log << "warning: category \"" << e << "\" has no baseline run; excluded\n";
        }
        print_aggregate(report, out);
        if (json_out) {
            std::ofstream f(*json_out, std::ios::binary | std::ios::trunc);
            if (!f) {
                throw IoError("cannot write " + json_out->string());
            }
            f << aggregate_to_json(report).dump(2) << '\n';
        }
        return 0;
    } catch (const Error& e) {
        log << "error: " << e.what() << '\n';
        return 1;
    }
}

std::vector<CategoryBin> compute_bins(const Corpus& corpus, const std::vector<RunMetrics>& baseline,
                                      BinThresholds& thresholds, bool difficulty_from_terciles) {
    std::map<std::string, std::pair<double, std::size_t>> rp;
    for (const auto& b : baseline) {
        auto& [sum, n] = rp[b.category];
        sum += b.final_r_precision;
        ++n;
    }
    std::vector<std::string> categories;
    std::map<std::string, double> prevalence, difficulty;
    std::vector<double> scores;
    for (const auto& [c, acc] : rp) {
        categories.push_back(c);
        prevalence[c] = category_prevalence(corpus, c);
        difficulty[c] = acc.first / static_cast<double>(acc.second);
        scores.push_back(difficulty[c]);
    }
    if (categories.empty()) {
        throw ArgumentError("baseline has no runs to bin");
    }
    if (difficulty_from_terciles) {
        std::tie(thresholds.hard_below, thresholds.easy_from) = difficulty_terciles(scores);
    }
    return assign_bins(categories, prevalence, difficulty, thresholds);
}

int cmd_bins(const std::filesystem::path& corpus_path, const std::filesystem::path& baseline_dir,
             const std::filesystem::path& out_path, double rare_below, double common_from, std::ostream& log) {
    try {
        const auto corpus = load_corpus(corpus_path);
        BinThresholds t;
        t.rare_below = rare_below;
        t.common_from = common_from;
        const auto bins = compute_bins(corpus, load_metrics_dir(baseline_dir), t, true);
        save_bins(bins, t, out_path);
        log << "binned " << bins.size() << " categories into " << out_path.string() << '\n';
        return 0;
    } catch (const Error& e) {
        log << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace tarsim::cli
