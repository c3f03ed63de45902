// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The tarsim Authors
//
// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "oracles.hpp"
#include "tarsim/cli.hpp"
#include "tarsim/engine.hpp"
#include "tarsim/error.hpp"
#include "tarsim/logreg.hpp"
#include "tarsim/metrics.hpp"
#include "tarsim/plugin.hpp"
#include "tarsim/rng.hpp"

namespace {

using namespace tarsim;
using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass;
    std::string detail;
};

double seconds_since(Clock::time_point t) {
    return std::chrono::duration<double>(Clock::now() - t).count();
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("tarsim-acceptance-" + std::to_string(::getpid())) / name;
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

// ---------------------------------------------------------------------------
// Random metric instances

struct Instance {
    std::vector<double> scores;
    std::vector<std::string> ids;
    std::vector<std::uint8_t> relevant;
    std::vector<std::uint8_t> labeled_mask;
    LabeledSet labeled;
    oracle::Rational target;
};

Instance random_instance(Rng& rng) {
    static const oracle::Rational targets[] = {{4, 5}, {1, 2}, {7, 10}, {9, 10}, {1, 1}, {2, 3}, {3, 4}};
    Instance in;
    const std::size_t n = 1 + rng.uniform_index(200);
    const std::size_t r = 1 + rng.uniform_index(std::min<std::size_t>(n, 40));
    in.relevant.assign(n, 0);
    for (auto i : rng.sample_without_replacement(n, r)) {
        in.relevant[i] = 1;
    }
    in.labeled = LabeledSet(n);
    in.labeled_mask.assign(n, 0);
    const double label_rate = rng.uniform01() * 0.5;
    const bool coarse = rng.bernoulli(0.3);
    for (std::size_t i = 0; i < n; ++i) {
        in.scores.push_back(coarse ? static_cast<double>(rng.uniform_index(8)) / 7.0 : rng.uniform01());
        in.ids.push_back("doc-" + std::to_string(rng.uniform_index(1u << 20)) + "-" + std::to_string(i));
        if (rng.bernoulli(label_rate)) {
            in.labeled.add(i, in.relevant[i] != 0, 0);
            in.labeled_mask[i] = 1;
        }
    }
    in.target = targets[rng.uniform_index(std::size(targets))];
    return in;
}

Outcome metric_oracle_suite() {
    const auto start = Clock::now();
    Rng rng(20260101);
    const int kInstances = 1200;
    int mismatches = 0;
    for (int t = 0; t < kInstances; ++t) {
        const auto in = random_instance(rng);
        const double target = in.target.value();
        const auto ranking = rank_documents(in.scores, in.ids);
        const RunState state{in.labeled, in.scores, in.ids, in.relevant, target};
        const auto ref = oracle::two_phase(in.scores, in.ids, in.relevant, in.labeled_mask, in.target);
        const auto depth = oracle::depth_for_recall(in.scores, in.ids, in.relevant, in.target);
        const CostStructure cs{"random", 10 * rng.uniform01(), 10 * rng.uniform01(), rng.uniform01(), rng.uniform01()};
        const double ref_cost = cs.train_pos * static_cast<double>(ref.train_pos) +
                                cs.train_neg * static_cast<double>(ref.train_neg) +
                                cs.review_pos * static_cast<double>(ref.review_pos) +
                                cs.review_neg * static_cast<double>(ref.review_neg);
        const bool ok = r_precision(in.scores, in.ids, in.relevant) ==
                            oracle::r_precision(in.scores, in.ids, in.relevant) &&
                        dfr(ranking, in.relevant, target) ==
                            static_cast<double>(depth) / static_cast<double>(in.scores.size()) &&
                        optimal_second_phase_depth(state) == ref.depth &&
                        total_cost(state, CostStructure::uniform()) ==
                            static_cast<double>(in.labeled.size() + ref.depth) &&
                        total_cost(state, cs) == ref_cost;
        mismatches += ok ? 0 : 1;
    }
    const double elapsed = seconds_since(start);
    return {mismatches == 0 && elapsed < 60.0, std::to_string(kInstances) + " instances, " +
                                                   std::to_string(mismatches) + " mismatches, " +
                                                   fmt("%.2f s (limit 60 s)", elapsed)};
}

Outcome wss_and_linearity() {
    Rng rng(777);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const auto in = random_instance(rng);
        const double target = in.target.value();
        const double d = dfr(rank_documents(in.scores, in.ids), in.relevant, target);
        worst = std::max(worst, std::fabs(wss(d, target) - (target - d)));

        const RunState state{in.labeled, in.scores, in.ids, in.relevant, target};
        const auto counts = optimal_review(state);
        const CostStructure a{"a", rng.uniform01(), rng.uniform01(), rng.uniform01(), rng.uniform01()};
        const CostStructure b{"b", rng.uniform01(), rng.uniform01(), rng.uniform01(), rng.uniform01()};
        const double alpha = 3 * rng.uniform01(), beta = 3 * rng.uniform01();
        const CostStructure mix{"mix", alpha * a.train_pos + beta * b.train_pos, alpha * a.train_neg + beta * b.train_neg,
                                alpha * a.review_pos + beta * b.review_pos, alpha * a.review_neg + beta * b.review_neg};
        const double lhs = total_cost(state, mix);
        const double rhs = alpha * total_cost(state, a) + beta * total_cost(state, b);
        worst = std::max(worst, std::fabs(lhs - rhs) / std::max(1.0, std::fabs(rhs)));
        // Each component's coefficient is its counted multiplicity.
        const CostStructure unit_tp{"tp", 1, 0, 0, 0}, unit_rn{"rn", 0, 0, 0, 1};
        worst = std::max(worst, std::fabs(total_cost(state, unit_tp) - static_cast<double>(counts.train_pos)));
        worst = std::max(worst, std::fabs(total_cost(state, unit_rn) - static_cast<double>(counts.review_neg)));
    }
    return {worst <= 1e-12, fmt("max deviation %.3g (limit 1e-12)", worst)};
}

FeatureMatrix dense_matrix(const std::vector<std::vector<double>>& x, std::size_t cols) {
    FeatureMatrix m(cols);
    for (const auto& row : x) {
        std::vector<FeatureEntry> e;
        for (std::size_t j = 0; j < cols; ++j) {
            if (row[j] != 0.0) {
                e.push_back({static_cast<std::uint32_t>(j), row[j]});
            }
        }
        m.append_row(e);
    }
    return m;
}

Outcome logistic_regression() {
    Rng rng(4242);
    double worst_param = 0.0, worst_grad = 0.0;
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = 1 + rng.uniform_index(40);
        const std::size_t d = 1 + rng.uniform_index(10);
        std::vector<std::vector<double>> x(n, std::vector<double>(d, 0.0));
        std::vector<int> y(n);
        LabeledSet labeled(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (auto& v : x[i]) {
                v = rng.bernoulli(0.6) ? rng.uniform01() : 0.0;
            }
            y[i] = i == 0 || rng.bernoulli(0.35) ? 1 : 0;
            labeled.add(i, y[i] == 1, 0);
        }
        const auto m = dense_matrix(x, d);
        const auto model = fit_logreg(m, labeled, 1.0);
        const auto ref = oracle::logreg(x, y, 1.0, model.intercept_regularized);
        for (std::size_t j = 0; j < d; ++j) {
            worst_param = std::max(worst_param, std::fabs(model.weights[j] - ref.weights[j]));
        }
        worst_param = std::max(worst_param, std::fabs(model.intercept - ref.intercept));
        for (double g : logreg_gradient(model, m, labeled)) {
            worst_grad = std::max(worst_grad, std::fabs(g));
        }
    }
    return {worst_param <= 1e-4 && worst_grad <= 1e-6,
            fmt("50 datasets, max |param - oracle| %.3g (limit 1e-4), ", worst_param) +
                fmt("max |grad| %.3g (limit 1e-6)", worst_grad)};
}

Outcome end_to_end_determinism() {
    const auto dir = scratch("determinism");
    cli::SynthSpec spec;
    spec.n_docs = 1500;
    spec.categories = {{"easy", 0.04, 0.0}, {"noisy", 0.03, 0.5}};
    save_corpus(cli::synthesize_corpus(spec, 11), dir / "corpus.jsonl");
    std::ofstream(dir / "manifest.json") << R"({
        "corpus": "corpus.jsonl",
        "parallelism": 2,
        "defaults": {"iterations": 6, "batch_size": 40, "seed": 5},
        "grid": {"categories": ["easy", "noisy"], "strategies": ["relevance", "uncertainty"]}
    })";
    std::ostringstream log;
    for (const char* out : {"first", "second"}) {
        cli::RunOptions opts;
        opts.output_dir = dir / out;
        if (cli::cmd_run(dir / "manifest.json", opts, log) != 0) {
            return {false, "run failed: " + log.str()};
        }
    }
    int files = 0, differing = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir / "first")) {
        const auto name = e.path().filename().string();
        if (!name.ends_with(".run.jsonl")) {
            continue;
        }
        ++files;
        std::ifstream a(e.path(), std::ios::binary), b(dir / "second" / name, std::ios::binary);
        const std::string sa{std::istreambuf_iterator<char>(a), {}}, sb{std::istreambuf_iterator<char>(b), {}};
        differing += sa == sb ? 0 : 1;
    }
    return {files == 4 && differing == 0,
            std::to_string(files) + " run files compared, " + std::to_string(differing) + " differ"};
}

Outcome desk_scale_behavior() {
    const auto start = Clock::now();
    cli::SynthSpec spec;
    spec.n_docs = 2000;
    spec.categories = {{"target", 0.05, 0.0}};
    const auto corpus = cli::synthesize_corpus(spec, 2026);
    const std::size_t r = corpus.relevant("target").size();
    const double floor = oracle::expected_random_depth(corpus.size(), r, {4, 5});

    RunConfig cfg;
    cfg.category = "target";
    cfg.strategy = {StrategyKind::kRelevance, 50};
    cfg.iterations = 10;
    const auto matrix = vectorize(corpus, build_vocabulary(corpus, cfg.features), cfg.features);
    LogRegScorer scorer(matrix, cfg.classifier.penalty);
    const auto result = run_tar(cfg, corpus, scorer);
    const double best = result.min_cost[0].cost;
    const double elapsed = seconds_since(start);
    return {result.records.size() == 10 && best <= 0.5 * floor && elapsed < 120.0,
            fmt("min uniform cost %.0f", best) + fmt(" at iteration %.0f", result.min_cost[0].iteration) +
                fmt(", random-order floor %.2f", floor) + fmt(" (limit %.2f)", 0.5 * floor) +
                fmt(", %.2f s (limit 120 s)", elapsed)};
}

Outcome t_test() {
    Rng rng(99);
    double worst_t = 0.0, worst_p = 0.0;
    for (int s = 0; s < 20; ++s) {
        const std::size_t n = 2 + rng.uniform_index(89);
        std::vector<double> a, b;
        const double effect = 300 * (rng.uniform01() - 0.5);
        for (std::size_t i = 0; i < n; ++i) {
            a.push_back(500 + 1500 * rng.uniform01());
            b.push_back(a.back() + effect + 200 * (rng.uniform01() - 0.5));
        }
        const auto got = paired_t_test(a, b);
        const auto ref = oracle::paired_t(a, b);
        worst_t = std::max(worst_t, std::fabs(got.t - ref.t));
        worst_p = std::max(worst_p, std::fabs(got.p - ref.p));
    }
    return {worst_t <= 1e-6 && worst_p <= 1e-6,
            fmt("20 samples, max |dt| %.3g", worst_t) + fmt(", max |dp| %.3g (limit 1e-6)", worst_p)};
}

Outcome plugin_conformance() {
    const auto dir = scratch("plugin");
    const Corpus corpus({{"a", "apple banana", {"fruit"}},
                         {"b", "car truck", {}},
                         {"c", "banana cherry", {"fruit"}},
                         {"d", "truck bus", {}},
                         {"e", "cherry pie", {}}});
    save_corpus(corpus, dir / "c.jsonl");
    auto spec = [](nlohmann::json config) {
        PluginLaunchSpec s;
        s.name = "mock";
        s.command = {TARSIM_MOCK_PLUGIN};
        s.config = std::move(config);
        s.handshake_timeout_seconds = 10;
        s.request_timeout_seconds = 10;
        return s;
    };
    auto error_of = [](const std::function<void()>& f) -> std::string {
        try {
            f();
        } catch (const ProtocolError& e) {
            return e.what();
        } catch (const std::exception& e) {
            return std::string("wrong exception: ") + e.what();
        }
        return "";
    };
    std::vector<std::string> failures;

    // Full transcript.
    {
        const auto transcript = dir / "transcript.jsonl";
        auto h = PluginHandle::open(spec({{"transcript", transcript.string()}}));
        const auto n = h.load_corpus(dir / "c.jsonl", "fruit");
        LabeledSet labeled(5);
        labeled.add(0, true, 0);
        h.fit(labeled, corpus.doc_ids());
        const auto scores = h.score(5, corpus.doc_ids());
        h.close();
        std::ifstream in(transcript);
        std::vector<std::string> cmds;
        for (std::string l; std::getline(in, l);) {
            cmds.push_back(nlohmann::json::parse(l).at("cmd").get<std::string>());
        }
        if (n != 5 || scores != ScoreVector(5, 0.5) ||
            cmds != std::vector<std::string>{"init", "load_corpus", "fit", "score", "shutdown"}) {
            failures.push_back("transcript");
        }
    }
    // Malformed response.
    {
        auto h = PluginHandle::open(spec({{"malformed", "score"}}));
        h.load_corpus(dir / "c.jsonl", "fruit");
        const auto msg = error_of([&] { h.score(5, corpus.doc_ids()); });
        if (msg.find("malformed plugin response") == std::string::npos) {
            failures.push_back("malformed: " + msg);
        }
    }
    // Out-of-range score names the document.
    {
        auto h = PluginHandle::open(spec({{"bad_score", {{"index", 3}, {"value", 1.5}}}}));
        h.load_corpus(dir / "c.jsonl", "fruit");
        const auto msg = error_of([&] { h.score(5, corpus.doc_ids()); });
        if (msg.find("\"d\"") == std::string::npos || msg.find("not a probability") == std::string::npos) {
            failures.push_back("range: " + msg);
        }
    }
    // Process death mid-run aborts with a persisted partial trace.
    {
        RunConfig cfg;
        cfg.category = "fruit";
        cfg.iterations = 4;
        cfg.strategy.batch_size = 1;
        cfg.classifier.kind = ClassifierSpec::Kind::kPlugin;
        cfg.classifier.plugin = spec({{"mode", "tokens"}, {"die_on_fit", 3}});
        cfg.classifier.plugin.name = "mock";
        PluginScorer scorer(cfg.classifier.plugin, corpus, dir / "c.jsonl", "fruit");
        std::string what;
        try {
            run_tar(cfg, corpus, scorer);
        } catch (const RunAborted& e) {
            persist_run(e.partial(), dir / "partial.run.jsonl");
            what = e.what();
        }
        bool ok = what.find("plugin process died") != std::string::npos;
        if (ok) {
            const auto loaded = load_run(dir / "partial.run.jsonl");
            ok = !loaded.complete && loaded.records.size() == 2;
        }
        if (!ok) {
            failures.push_back("death: " + what);
        }
    }
    std::string detail = "transcript, malformed, out-of-range, process death";
    for (const auto& f : failures) {
        detail += "; failed " + f;
    }
    return {failures.empty(), detail};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"metric-oracle-suite", metric_oracle_suite},
        {"wss-identity-cost-linearity", wss_and_linearity},
        {"logistic-regression-oracle", logistic_regression},
        {"end-to-end-determinism", end_to_end_determinism},
        {"desk-scale-tar-behavior", desk_scale_behavior},
        {"paired-t-test-oracle", t_test},
        {"plugin-protocol-conformance", plugin_conformance},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
        failed += o.pass ? 0 : 1;
    }
    std::error_code ec;
    std::filesystem::remove_all(std::filesystem::temp_directory_path() /
                                    ("tarsim-acceptance-" + std::to_string(::getpid())),
                                ec);
    return failed == 0 ? 0 : 1;
}
