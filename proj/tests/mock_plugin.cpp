// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The tarsim Authors
//
// Scriptable stand-in for an external scorer. Behavior is chosen through
// the init config:
//   mode        "constant" (0.5 everywhere) or "tokens" (deterministic
//               overlap with the vocabulary of positive documents)
//   transcript  file to append every received request line to
//   bad_score   {"index": i, "value": v} to corrupt one score
//   malformed   command whose response is not JSON
//   reject      command answered with {"ok":false}
//   hang        command never answered
//   die_on_fit  exit without answering the n-th fit (1-based)
//   wrong_count answer score with one fewer value

#include <unistd.h>

#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

using nlohmann::json;

namespace {

std::vector<std::string> split(const std::string& text) {
    std::istringstream in(text);
    std::vector<std::string> out;
    for (std::string t; in >> t;) {
        out.push_back(t);
    }
    return out;
}

} // namespace

int main() {
    json config = json::object();
    std::vector<std::string> ids, texts;
    std::set<std::string> positive_terms;
    int fits = 0;
    std::ofstream transcript;

    std::string line;
    while (std::getline(std::cin, line)) {
        if (transcript.is_open()) {
            transcript << line << '\n' << std::flush;
        }
        json req = json::parse(line, nullptr, false);
        const std::string cmd = req.is_object() ? req.value("cmd", std::string()) : std::string();
        if (cmd == "init") {
            config = req.value("config", json::object());
            if (config.contains("transcript")) {
                transcript.open(config["transcript"].get<std::string>(), std::ios::app);
                transcript << line << '\n' << std::flush;
            }
        }
        if (config.value("hang", std::string()) == cmd) {
            std::this_thread::sleep_for(std::chrono::hours(1));
        }
        if (config.value("malformed", std::string()) == cmd) {
            std::cout << "this is {not json\n" << std::flush;
            continue;
        }
        if (config.value("reject", std::string()) == cmd) {
            std::cout << json{{"ok", false}, {"error", "mock rejects " + cmd}}.dump() << '\n' << std::flush;
            continue;
        }

        json resp = {{"ok", true}};
        if (cmd == "init") {
            resp["name"] = config.value("name", std::string("mock"));
        } else if (cmd == "load_corpus") {
            std::ifstream in(req.at("path").get<std::string>());
            if (!in) {
                resp = {{"ok", false}, {"error", "cannot open corpus"}};
            } else {
                ids.clear();
                texts.clear();
                for (std::string l; std::getline(in, l);) {
                    if (l.empty()) {
                        continue;
                    }
                    const auto doc = json::parse(l);
                    ids.push_back(doc.at("doc_id").get<std::string>());
                    texts.push_back(doc.at("text").get<std::string>());
                }
                resp["n_docs"] = ids.size();
            }
        } else if (cmd == "fit") {
            ++fits;
            if (config.value("die_on_fit", 0) == fits) {
                _exit(3);
            }
            positive_terms.clear();
            for (const auto& item : req.at("labeled")) {
                if (item.at("label").get<int>() != 1) {
                    continue;
                }
                const auto id = item.at("doc_id").get<std::string>();
                for (std::size_t i = 0; i < ids.size(); ++i) {
                    if (ids[i] == id) {
                        for (auto& t : split(texts[i])) {
                            positive_terms.insert(t);
                        }
                    }
                }
            }
            resp["train_seconds"] = 0.001;
        } else if (cmd == "score") {
            std::vector<double> scores(ids.size(), 0.5);
            if (config.value("mode", std::string("constant")) == "tokens") {
                for (std::size_t i = 0; i < ids.size(); ++i) {
                    const auto toks = split(texts[i]);
                    std::size_t hits = 0;
                    for (const auto& t : toks) {
                        hits += positive_terms.count(t);
                    }
                    scores[i] = (1.0 + static_cast<double>(hits)) / (2.0 + static_cast<double>(toks.size()));
                }
            }
            if (config.contains("bad_score")) {
                const auto& b = config["bad_score"];
                scores.at(b.at("index").get<std::size_t>()) = b.at("value").get<double>();
            }
            if (config.value("wrong_count", false) && !scores.empty()) {
                scores.pop_back();
            }
            resp["scores"] = scores;
        } else if (cmd == "shutdown") {
            std::cout << resp.dump() << '\n' << std::flush;
            return 0;
        } else {
            resp = {{"ok", false}, {"error", "unknown command"}};
        }
        std::cout << resp.dump() << '\n' << std::flush;
    }
    return 0;
}
