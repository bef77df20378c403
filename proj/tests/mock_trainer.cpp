/*
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    https://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/
// Test double for the external-trainer protocol. Learns per-token label votes
// and keeps a transcript of the phases each model went through.
//
// Flags: --no-pretrain, --wrong-count, --crash-on OP, --sleep-ms N,
// --fail-train, --bad-id, --garbage, --log FILE.

#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

using nlohmann::json;

namespace {

struct Model {
    std::string task;
    std::map<std::string, std::map<std::string, int>> votes;// token -> label -> count
    std::map<std::string, int> prior;
    std::vector<std::string> transcript;
};

std::string argmax(const std::map<std::string, int>& counts, const std::string& fallback) {
    std::string best = fallback;
    int best_count = -1;
    for (const auto& [label, c] : counts) {
        if (c > best_count) {
            best = label;
            best_count = c;
        }
    }
    return best;
}

}// namespace

int main(int argc, char** argv) {
    bool pretrain = true, wrong_count = false, fail_train = false, bad_id = false, garbage = false;
    std::string crash_on, log_path;
    int sleep_ms = 0;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--no-pretrain") {
            pretrain = false;
        } else if (a == "--wrong-count") {
            wrong_count = true;
        } else if (a == "--fail-train") {
            fail_train = true;
        } else if (a == "--bad-id") {
            bad_id = true;
        } else if (a == "--garbage") {
            garbage = true;
        } else if (a == "--crash-on" && i + 1 < argc) {
            crash_on = argv[++i];
        } else if (a == "--sleep-ms" && i + 1 < argc) {
            sleep_ms = std::atoi(argv[++i]);
        } else if (a == "--log" && i + 1 < argc) {
            log_path = argv[++i];
        }
    }

    std::map<std::string, Model> models;
    int next_model = 1;
    std::string line;
    while (std::getline(std::cin, line)) {
        json req = json::parse(line, nullptr, false);
        if (!log_path.empty()) {
            std::ofstream(log_path, std::ios::app) << line << "\n";
        }
        json resp = {{"ok", true}};
        if (req.is_discarded()) {
            resp = {{"ok", false}, {"error", "malformed request"}};
            std::cout << resp.dump() << "\n" << std::flush;
            continue;
        }
        const std::string op = req.value("op", "");
        resp["id"] = bad_id ? json(-1) : req["id"];
        if (op == crash_on) {
            std::cerr << "mock trainer: simulated crash on " << op << "\n";
            return 3;
        }
        if (sleep_ms > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(sleep_ms));
        }
        if (garbage) {
            std::cout << "this is not json\n" << std::flush;
            continue;
        }

        auto find_model = [&](const json& id) -> Model* {
            if (!id.is_string()) {
                return nullptr;
            }
            auto it = models.find(id.get<std::string>());
            return it == models.end() ? nullptr : &it->second;
        };

        if (op == "hello") {
            resp["capabilities"] = {{"supports_pretrain_phase", pretrain}};
        } else if (op == "train") {
            if (fail_train) {
                resp = {{"ok", false}, {"id", req["id"]}, {"error", "training diverged"}};
            } else {
                Model m;
                if (req.contains("init_model_id")) {
                    Model* base = find_model(req["init_model_id"]);
                    if (base == nullptr) {
                        resp = {{"ok", false}, {"id", req["id"]}, {"error", "unknown model_id " + req["init_model_id"].dump()}};
                        std::cout << resp.dump() << "\n" << std::flush;
                        continue;
                    }
                    m = *base;
                }
                m.task = req.value("task", "classification");
                for (const auto& rec : req["train"]) {
                    const auto& tokens = rec["tokens"];
                    if (m.task == "classification") {
                        const auto label = rec["label"].get<std::string>();
                        ++m.prior[label];
                        for (const auto& t : tokens) {
                            ++m.votes[t.get<std::string>()][label];
                        }
                    } else {
                        const auto& tags = rec["tags"];
                        for (std::size_t k = 0; k < tokens.size(); ++k) {
                            ++m.votes[tokens[k].get<std::string>()][tags[k].get<std::string>()];
                        }
                    }
                }
                m.transcript.push_back("train");
                const auto id = "m" + std::to_string(next_model++);
                models[id] = m;
                resp["model_id"] = id;
                resp["dev_score"] = 0.5;
                resp["transcript"] = m.transcript;
            }
        } else if (op == "pretrain") {
            if (!pretrain) {
                resp = {{"ok", false}, {"id", req["id"]}, {"error", "pretraining not supported"}};
            } else if (!req.contains("texts") || req["texts"].empty()) {
                resp = {{"ok", false}, {"id", req["id"]}, {"error", "empty text list"}};
            } else {
                Model m;
                if (!req["model_id"].is_null()) {
                    Model* base = find_model(req["model_id"]);
                    if (base == nullptr) {
                        resp = {{"ok", false}, {"id", req["id"]}, {"error", "unknown model_id " + req["model_id"].dump()}};
                        std::cout << resp.dump() << "\n" << std::flush;
                        continue;
                    }
                    m = *base;
                }
                m.transcript.push_back("pretrain");
                const auto id = "m" + std::to_string(next_model++);
                models[id] = m;
                resp["model_id"] = id;
                resp["transcript"] = m.transcript;
            }
        } else if (op == "predict") {
            Model* m = find_model(req["model_id"]);
            if (m == nullptr) {
                resp = {{"ok", false}, {"id", req["id"]}, {"error", "unknown model_id " + req["model_id"].dump()}};
            } else {
                json labels = json::array();
                const auto fallback = argmax(m->prior, "O");
                for (const auto& rec : req["records"]) {
                    if (m->task == "classification") {
                        std::map<std::string, int> tally;
                        for (const auto& t : rec["tokens"]) {
                            auto it = m->votes.find(t.get<std::string>());
                            if (it != m->votes.end()) {
                                for (const auto& [l, c] : it->second) {
                                    tally[l] += c;
                                }
                            }
                        }
                        labels.push_back(argmax(tally, fallback));
                    } else {
                        json tags = json::array();
                        for (const auto& t : rec["tokens"]) {
                            auto it = m->votes.find(t.get<std::string>());
                            tags.push_back(it == m->votes.end() ? std::string("O") : argmax(it->second, "O"));
                        }
                        labels.push_back(tags);
                    }
                }
                if (wrong_count && !labels.empty()) {
                    labels.erase(labels.size() - 1);
                }
                resp["labels"] = labels;
            }
        } else {
            resp = {{"ok", false}, {"id", req["id"]}, {"error", "unknown op '" + op + "'"}};
        }
        std::cout << resp.dump() << "\n" << std::flush;
    }
    return 0;
}
