// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The tarsim Authors

#include "tarsim/plugin.hpp"

#include <cerrno>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstring>
#include <utility>
#include <algorithm>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "tarsim/error.hpp"

namespace tarsim {

namespace {

using Clock = std::chrono::steady_clock;

void ignore_sigpipe() {
    struct sigaction sa {};
    sa.sa_handler = SIG_IGN;
    sigemptyset(&sa.sa_mask);
    sigaction(SIGPIPE, &sa, nullptr);
}

void close_fd(int& fd) noexcept {
    if (fd >= 0) {
        ::close(fd);
        fd = -1;
    }
}

std::string describe_exit(int status) {
    if (WIFEXITED(status)) {
        return "exited with status " + std::to_string(WEXITSTATUS(status));
    }
    if (WIFSIGNALED(status)) {
        return "killed by signal " + std::to_string(WTERMSIG(status));
    }
    return "stopped";
}

} // namespace

PluginHandle PluginHandle::open(const PluginLaunchSpec& spec) {
    if (spec.command.empty()) {
        throw ArgumentError("plugin launch spec has an empty command");
    }
    ignore_sigpipe();

    int in_pipe[2];  // parent -> child
    int out_pipe[2]; // child -> parent
    if (::pipe2(in_pipe, O_CLOEXEC) != 0) {
        throw ProtocolError(std::string("pipe: ") + std::strerror(errno));
    }
    if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
        ::close(in_pipe[0]);
        ::close(in_pipe[1]);
        throw ProtocolError(std::string("pipe: ") + std::strerror(errno));
    }

    std::vector<char*> argv;
    for (const auto& a : spec.command) {
        argv.push_back(const_cast<char*>(a.c_str()));
    }
    argv.push_back(nullptr);

    const pid_t pid = ::fork();
    if (pid < 0) {
        for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) {
            ::close(fd);
        }
        throw ProtocolError(std::string("fork: ") + std::strerror(errno));
    }
    if (pid == 0) {
        ::dup2(in_pipe[0], STDIN_FILENO);
        ::dup2(out_pipe[1], STDOUT_FILENO);
        ::signal(SIGPIPE, SIG_DFL);
        ::execvp(argv[0], argv.data());
        ::_exit(127);
    }
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);

    PluginHandle handle;
    handle.pid_ = pid;
    handle.to_child_ = in_pipe[1];
    handle.from_child_ = out_pipe[0];
    handle.request_timeout_ = spec.request_timeout_seconds;

    nlohmann::json init = {{"cmd", "init"}, {"protocol", kPluginProtocolVersion}, {"config", spec.config}};
    auto response = handle.request(init, spec.handshake_timeout_seconds);
    auto name = response.find("name");
    if (name == response.end() || !name->is_string()) {
        handle.terminate();
        throw ProtocolError("plugin init response lacks a string \"name\"");
    }
    handle.plugin_name_ = name->get<std::string>();
    return handle;
}

PluginHandle::PluginHandle(PluginHandle&& other) noexcept
    : pid_(std::exchange(other.pid_, -1)),
      to_child_(std::exchange(other.to_child_, -1)),
      from_child_(std::exchange(other.from_child_, -1)),
      buffer_(std::move(other.buffer_)),
      plugin_name_(std::move(other.plugin_name_)),
      request_timeout_(other.request_timeout_) {}

PluginHandle& PluginHandle::operator=(PluginHandle&& other) noexcept {
    if (this != &other) {
        terminate();
        pid_ = std::exchange(other.pid_, -1);
        to_child_ = std::exchange(other.to_child_, -1);
        from_child_ = std::exchange(other.from_child_, -1);
        buffer_ = std::move(other.buffer_);
        plugin_name_ = std::move(other.plugin_name_);
        request_timeout_ = other.request_timeout_;
    }
    return *this;
}

PluginHandle::~PluginHandle() { terminate(); }

void PluginHandle::terminate() noexcept {
    close_fd(to_child_);
    close_fd(from_child_);
    if (pid_ > 0) {
        ::kill(pid_, SIGKILL);
        int status = 0;
        while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
        }
        pid_ = -1;
    }
}

void PluginHandle::send_line(const std::string& line) {
    if (to_child_ < 0) {
        throw ProtocolError("plugin is not running");
    }
    std::string data = line;
    data.push_back('\n');
    std::size_t off = 0;
    while (off < data.size()) {
        const ssize_t n = ::write(to_child_, data.data() + off, data.size() - off);
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            const std::string reason = std::strerror(errno);
            terminate();
            throw ProtocolError("plugin process is gone (write failed: " + reason + ")");
        }
        off += static_cast<std::size_t>(n);
    }
}

std::string PluginHandle::read_line(double timeout_seconds) {
    const auto deadline = Clock::now() + std::chrono::duration<double>(timeout_seconds);
    char chunk[65536];
    for (;;) {
        auto nl = buffer_.find('\n');
        if (nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            return line;
        }
        int wait_ms = -1;
        if (timeout_seconds > 0.0) {
            const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
            if (left <= 0) {
                terminate();
                throw ProtocolError("plugin response timed out after " + std::to_string(timeout_seconds) + " s");
            }
            wait_ms = static_cast<int>(std::min<long long>(left, 1 << 30));
        }
        pollfd pfd{from_child_, POLLIN, 0};
        const int rc = ::poll(&pfd, 1, wait_ms);
        if (rc < 0) {
            if (errno == EINTR) {
                continue;
            }
            throw ProtocolError(std::string("poll: ") + std::strerror(errno));
        }
        if (rc == 0) {
            continue;
        }
        const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            throw ProtocolError(std::string("read: ") + std::strerror(errno));
        }
        if (n == 0) {
            std::string how = "closed its output";
            close_fd(to_child_);
            close_fd(from_child_);
            if (pid_ > 0) {
                int status = 0;
                if (::waitpid(pid_, &status, 0) == pid_) {
                    how = describe_exit(status);
                }
                pid_ = -1;
            }
            throw ProtocolError("plugin process died (" + how + ")");
        }
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

nlohmann::json PluginHandle::request(const nlohmann::json& message, double timeout_seconds) {
    const std::string cmd = message.value("cmd", std::string("?"));
    send_line(message.dump());
    const std::string line = read_line(timeout_seconds);
    nlohmann::json response;
    try {
        response = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
        throw ProtocolError("malformed plugin response to \"" + cmd + "\": " + line.substr(0, 200));
    }
    if (!response.is_object() || !response.contains("ok") || !response["ok"].is_boolean()) {
        throw ProtocolError("plugin response to \"" + cmd + "\" lacks a boolean \"ok\"");
    }
    if (!response["ok"].get<bool>()) {
        std::string err = "unspecified error";
        if (auto it = response.find("error"); it != response.end() && it->is_string()) {
            err = it->get<std::string>();
        }
        throw ProtocolError("plugin rejected \"" + cmd + "\": " + err);
    }
    return response;
}

std::size_t PluginHandle::load_corpus(const std::filesystem::path& path, std::string_view category) {
    auto response = request({{"cmd", "load_corpus"}, {"path", path.string()}, {"category", std::string(category)}},
                            request_timeout_);
    auto n = response.find("n_docs");
    if (n == response.end() || !n->is_number_integer() || n->get<long long>() < 0) {
        throw ProtocolError("load_corpus response lacks a non-negative integer \"n_docs\"");
    }
    return n->get<std::size_t>();
}

double PluginHandle::fit(const LabeledSet& labeled, std::span<const std::string> doc_ids) {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& e : labeled.entries()) {
        items.push_back({{"doc_id", doc_ids[e.doc]}, {"label", e.relevant ? 1 : 0}});
    }
    auto response = request({{"cmd", "fit"}, {"labeled", std::move(items)}}, request_timeout_);
    auto t = response.find("train_seconds");
    if (t == response.end() || !t->is_number()) {
        throw ProtocolError("fit response lacks a numeric \"train_seconds\"");
    }
    return t->get<double>();
}

ScoreVector PluginHandle::score(std::size_t expected_size, std::span<const std::string> doc_ids) {
    auto response = request({{"cmd", "score"}}, request_timeout_);
    auto s = response.find("scores");
    if (s == response.end() || !s->is_array()) {
        throw ProtocolError("score response lacks a \"scores\" array");
    }
    if (s->size() != expected_size) {
        throw ProtocolError("plugin returned " + std::to_string(s->size()) + " scores for " +
                            std::to_string(expected_size) + " documents");
    }
    ScoreVector scores;
    scores.reserve(expected_size);
    for (std::size_t i = 0; i < expected_size; ++i) {
        const auto& v = (*s)[i];
        const std::string who = i < doc_ids.size() ? "document \"" + doc_ids[i] + "\"" : "position " + std::to_string(i);
        if (!v.is_number()) {
            throw ProtocolError("non-numeric score for " + who);
        }
        const double x = v.get<double>();
        if (!std::isfinite(x) || x < 0.0 || x > 1.0) {
            throw ProtocolError("score " + v.dump() + " for " + who + " is not a probability");
        }
        scores.push_back(x);
    }
    return scores;
}

void PluginHandle::close() {
    if (pid_ <= 0) {
        return;
    }
    try {
        request({{"cmd", "shutdown"}}, 10.0);
    } catch (const ProtocolError&) {
        terminate();
        throw;
    }
    close_fd(to_child_);
    close_fd(from_child_);
    // Give the process a moment to exit on its own before terminate() kills it.
    const auto deadline = Clock::now() + std::chrono::seconds(5);
    while (Clock::now() < deadline) {
        int status = 0;
        const pid_t rc = ::waitpid(pid_, &status, WNOHANG);
        if (rc == pid_ || (rc < 0 && errno != EINTR)) {
            pid_ = -1;
            return;
        }
        ::usleep(1000);
    }
    terminate();
}

PluginScorer::PluginScorer(const PluginLaunchSpec& spec, const Corpus& corpus,
                           const std::filesystem::path& corpus_path, std::string_view category)
    : name_(spec.name), corpus_(corpus), handle_(PluginHandle::open(spec)) {
    const std::size_t n = handle_.load_corpus(corpus_path, category);
    if (n != corpus.size()) {
        throw ProtocolError("plugin loaded " + std::to_string(n) + " documents, corpus has " +
                            std::to_string(corpus.size()));
    }
}

PluginScorer::~PluginScorer() {
    try {
        handle_.close();
    } catch (const Error&) {
        // The handle has already killed and reaped the process.
    }
}

void PluginScorer::fit(const LabeledSet& labeled) { last_train_seconds_ = handle_.fit(labeled, corpus_.doc_ids()); }

ScoreVector PluginScorer::score() { return handle_.score(corpus_.size(), corpus_.doc_ids()); }

} // namespace tarsim
