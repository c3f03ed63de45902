// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The tarsim Authors

#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

#include "tarsim/cli.hpp"
#include "tarsim/features.hpp"

namespace tarsim::cli {

namespace {

bool completed_run_exists(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        return false;
    }
    try {
        return load_run(path).complete;
    } catch (const Error&) {
        return false;
    }
}

void write_metrics(const RunResult& result, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    write_metrics_report(result, out);
}

std::string hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
    return buf;
}

} // namespace

std::filesystem::path run_file(const std::filesystem::path& output_dir, const RunConfig& config) {
    return output_dir / (config.run_name() + ".run.jsonl");
}

std::filesystem::path metrics_file(const std::filesystem::path& output_dir, const RunConfig& config) {
    return output_dir / (config.run_name() + ".metrics.jsonl");
}

RunSummary run_manifest(const ExperimentManifest& manifest, const RunOptions& options, std::ostream& log) {
    std::filesystem::path out_dir;
    if (options.output_dir) {
        out_dir = *options.output_dir;
    } else if (manifest.output_dir) {
        out_dir = manifest.resolve(manifest.output_dir->string());
    } else if (const char* env = std::getenv(kOutputDirEnv); env && *env) {
        out_dir = env;
    } else {
        throw ArgumentError(std::string("no output directory: set \"output_dir\", pass --output or set ") +
                            kOutputDirEnv);
    }
    std::filesystem::create_directories(out_dir);

    const auto corpus_path = manifest.resolve(manifest.corpus);
    Corpus corpus = load_corpus(corpus_path);
    bool modified = false;
    if (manifest.qrels) {
        corpus = merge_qrels(corpus, manifest.resolve(*manifest.qrels));
        modified = true;
    }
    if (manifest.downsample) {
        corpus = downsample(corpus, manifest.downsample->fraction, manifest.downsample->seed);
        modified = true;
    }
    // Plugins read the corpus from disk, so they need the effective one.
    std::filesystem::path effective_path = corpus_path;
    if (modified) {
        effective_path = out_dir / "corpus.jsonl";
        save_corpus(corpus, effective_path);
    }

    RunSummary summary;
    std::vector<const RunConfig*> pending;
    for (const auto& config : manifest.runs) {
        if (!options.force && completed_run_exists(run_file(out_dir, config))) {
            ++summary.skipped;
            log << "skip " << config.run_name() << " (already complete)\n";
        } else {
            pending.push_back(&config);
        }
    }

    // Feature matrices are shared read-only across runs with equal settings.
    std::map<std::uint64_t, FeatureMatrix> matrices;
    for (const auto* config : pending) {
        if (config->classifier.kind != ClassifierSpec::Kind::kLogReg) {
            continue;
        }
        const auto fp = feature_fingerprint(corpus, config->features);
        if (matrices.contains(fp)) {
            continue;
        }
        const auto cache = out_dir / ("features-" + hex(fp) + ".cache");
        std::optional<FeatureMatrix> matrix;
        if (manifest.feature_cache) {
            matrix = load_feature_cache(cache, fp);
        }
        if (!matrix) {
            const auto vocab = build_vocabulary(corpus, config->features);
            matrix = vectorize(corpus, vocab, config->features);
            if (manifest.feature_cache) {
                save_feature_cache(*matrix, fp, cache);
            }
        }
        matrices.emplace(fp, std::move(*matrix));
    }

    std::mutex mu;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < pending.size(); i = next++) {
            const RunConfig& config = *pending[i];
            const auto name = config.run_name();
            try {
                const FeatureMatrix* features = nullptr;
                if (config.classifier.kind == ClassifierSpec::Kind::kLogReg) {
                    features = &matrices.at(feature_fingerprint(corpus, config.features));
                }
                RunResult result;
                try {
                    auto scorer = make_scorer(config, corpus, features, effective_path);
                    result = run_tar(config, corpus, *scorer);
                } catch (const RunAborted& e) {
                    persist_run(e.partial(), run_file(out_dir, config));
                    write_metrics(e.partial(), metrics_file(out_dir, config));
                    throw;
                }
                persist_run(result, run_file(out_dir, config));
                write_metrics(result, metrics_file(out_dir, config));
                std::lock_guard lock(mu);
                ++summary.executed;
                log << "done " << name << " (" << result.records.size() << " iterations)\n";
            } catch (const Error& e) {
                std::lock_guard lock(mu);
                summary.failures.push_back(name + ": " + e.what());
                log << "FAILED " << name << ": " << e.what() << '\n';
            }
        }
    };
    const std::size_t width = std::min(manifest.parallelism, std::max<std::size_t>(pending.size(), 1));
    std::vector<std::thread> threads;
    for (std::size_t t = 1; t < width; ++t) {
        threads.emplace_back(worker);
    }
    worker();
    for (auto& t : threads) {
        t.join();
    }
    return summary;
}

int cmd_run(const std::filesystem::path& manifest_path, const RunOptions& options, std::ostream& log) {
    try {
        const auto manifest = load_manifest(manifest_path);
        const auto summary = run_manifest(manifest, options, log);
        log << summary.executed << " executed, " << summary.skipped << " skipped, " << summary.failures.size()
            << " failed\n";
        return summary.exit_code();
    } catch (const Error& e) {
        log << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::filesystem::filesystem_error& e) {
        log << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace tarsim::cli
