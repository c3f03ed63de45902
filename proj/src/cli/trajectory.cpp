// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The tarsim Authors

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <tuple>

#include "tarsim/cli.hpp"

namespace tarsim::cli {

std::vector<RunResult> load_runs(const std::filesystem::path& results_dir) {
    if (!std::filesystem::is_directory(results_dir)) {
        throw IoError("not a directory: " + results_dir.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(results_dir)) {
        if (entry.is_regular_file() && entry.path().filename().string().ends_with(".run.jsonl")) {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<RunResult> runs;
    for (const auto& f : files) {
        runs.push_back(load_run(f));
    }
    return runs;
}

std::vector<TrajectoryPoint> trajectory(const std::filesystem::path& results_dir, const std::string& category) {
    std::vector<TrajectoryPoint> points;
    for (const auto& run : load_runs(results_dir)) {
        if (run.config.category != category) {
            continue;
        }
        const auto classifier = run.config.classifier.label();
        const auto strategy = std::string(to_string(run.config.strategy.kind));
        for (std::size_t s = 0; s < run.config.cost_structures.size(); ++s) {
            for (const auto& r : run.records) {
                points.push_back({classifier, strategy, run.config.cost_structures[s].name, r.iteration, r.costs.at(s)});
            }
        }
    }
    if (points.empty()) {
        throw ArgumentError("no runs for category \"" + category + "\" in " + results_dir.string());
    }
    std::stable_sort(points.begin(), points.end(), [](const TrajectoryPoint& a, const TrajectoryPoint& b) {
        return std::tie(a.classifier, a.strategy, a.cost_structure, a.iteration) <
               std::tie(b.classifier, b.strategy, b.cost_structure, b.iteration);
    });
    return points;
}

void write_trajectory(const std::vector<TrajectoryPoint>& points, std::ostream& out) {
    out << "series\tclassifier\tstrategy\tcost_structure\titeration\tcost\n";
    out << std::setprecision(17);
    for (const auto& p : points) {
        out << p.classifier << '/' << p.strategy << '\t' << p.classifier << '\t' << p.strategy << '\t'
            << p.cost_structure << '\t' << p.iteration << '\t' << p.cost << '\n';
    }
}

int cmd_trajectory(const std::filesystem::path& results_dir, const std::string& category,
                   const std::filesystem::path& out_path, std::ostream& log) {
    try {
        const auto points = trajectory(results_dir, category);
        std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot write " + out_path.string());
        }
        write_trajectory(points, out);
        log << "wrote " << points.size() << " points to " << out_path.string() << '\n';
        return 0;
    } catch (const Error& e) {
        log << "error: " << e.what() << '\n';
        return 1;
    }
}

int cmd_timing(const std::filesystem::path& results_dir, std::ostream& out, std::ostream& log) {
    try {
        const auto runs = load_runs(results_dir);
        const auto summary = timing_report(runs);
        auto fmt = [](const std::optional<double>& v) {
            if (!v) {
                return std::string("-");
            }
            std::ostringstream s;
            s << std::fixed << std::setprecision(4) << *v;
            return s.str();
        };
        out << "run\titerations\tmean_fit_s\tmean_score_s\ttotal_fit_s\ttotal_score_s\n";
        for (std::size_t i = 0; i < runs.size(); ++i) {
            const auto& s = summary.per_run[i];
            out << runs[i].config.run_name() << '\t' << s.iterations << '\t' << fmt(s.mean_fit_seconds) << '\t'
                << fmt(s.mean_score_seconds) << '\t' << fmt(s.total_fit_seconds) << '\t'
                << fmt(s.total_score_seconds) << '\n';
        }
        out << "ALL\t" << summary.overall.iterations << '\t' << fmt(summary.overall.mean_fit_seconds) << '\t'
            << fmt(summary.overall.mean_score_seconds) << '\t' << fmt(summary.mean_run_fit_seconds) << '\t'
            << fmt(summary.mean_run_score_seconds) << '\n';
        return 0;
    } catch (const Error& e) {
        log << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace tarsim::cli
