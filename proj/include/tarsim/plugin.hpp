// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The tarsim Authors

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <sys/types.h>

#include "json.hpp"

#include "tarsim/classifier.hpp"
#include "tarsim/corpus.hpp"

namespace tarsim {

inline constexpr int kPluginProtocolVersion = 1;

/// How to launch an external scorer process.
struct PluginLaunchSpec {
    /// Label used in run names and reports.
    std::string name;
    /// argv; command[0] is resolved through PATH.
    std::vector<std::string> command;
    /// Passed through verbatim in the init message.
    nlohmann::json config = nlohmann::json::object();
    /// Deadline for the init response.
    double handshake_timeout_seconds = 30.0;
    /// Deadline for every later response; <= 0 waits indefinitely.
    double request_timeout_seconds = 0.0;

    bool operator==(const PluginLaunchSpec&) const = default;
};

/// Client side of the newline-delimited JSON plugin protocol, spoken over
/// the child's stdin/stdout. Calls are strictly sequential. Any transport
/// failure, timeout, malformed or {"ok":false} response raises ProtocolError.
///
/// SIGPIPE is ignored process-wide once a handle is opened so that a dead
/// plugin surfaces as a write error.
class PluginHandle {
public:
    /// Spawns the process and completes the init handshake.
    static PluginHandle open(const PluginLaunchSpec& spec);

    PluginHandle(PluginHandle&& other) noexcept;
    PluginHandle& operator=(PluginHandle&& other) noexcept;
    PluginHandle(const PluginHandle&) = delete;
    PluginHandle& operator=(const PluginHandle&) = delete;
    ~PluginHandle();

    const std::string& plugin_name() const noexcept { return plugin_name_; }

    /// Returns the plugin-reported document count.
    std::size_t load_corpus(const std::filesystem::path& path, std::string_view category);

    /// Sends every labeled document; returns the plugin-reported train_seconds.
    double fit(const LabeledSet& labeled, std::span<const std::string> doc_ids);

    /// Validates length == expected_size and that each score is a finite
    /// probability in [0, 1].
    ScoreVector score(std::size_t expected_size, std::span<const std::string> doc_ids);

    /// Sends shutdown and reaps the process. Idempotent.
    void close();

    bool running() const noexcept { return pid_ > 0; }

    /// One raw request/response round trip.
    nlohmann::json request(const nlohmann::json& message, double timeout_seconds);

private:
    PluginHandle() = default;

    void send_line(const std::string& line);
    std::string read_line(double timeout_seconds);
    void terminate() noexcept;

    pid_t pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffer_;
    std::string plugin_name_;
    double request_timeout_ = 0.0;
};

/// Scorer backed by a plugin process. The process lives as long as the
/// scorer, so the plugin may warm-start across fit calls.
class PluginScorer : public Scorer {
public:
    PluginScorer(const PluginLaunchSpec& spec, const Corpus& corpus,
                 const std::filesystem::path& corpus_path, std::string_view category);
    ~PluginScorer() override;

    std::string name() const override { return name_; }
    void fit(const LabeledSet& labeled) override;
    ScoreVector score() override;

    double last_train_seconds() const noexcept { return last_train_seconds_; }
    PluginHandle& handle() noexcept { return handle_; }

private:
    std::string name_;
    const Corpus& corpus_;
    PluginHandle handle_;
    double last_train_seconds_ = 0.0;
};

} // namespace tarsim
