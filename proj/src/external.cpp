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
#include "tempdrift/external.hpp"

#include "tempdrift/errors.hpp"
#include "tempdrift/learners.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

namespace tempdrift {

namespace {

constexpr std::size_t kStderrKeep = 4096;

void set_cloexec(int fd) {
    ::fcntl(fd, F_SETFD, ::fcntl(fd, F_GETFD) | FD_CLOEXEC);
}

}// namespace

ExternalProcess::ExternalProcess(std::string command, std::chrono::milliseconds timeout)
    : command_(std::move(command)), timeout_(timeout) {
    // A child that dies mid-request must surface as an error, not kill us.
    std::signal(SIGPIPE, SIG_IGN);

    int in_pipe[2], out_pipe[2], err_pipe[2];
    if (::pipe(in_pipe) != 0 || ::pipe(out_pipe) != 0 || ::pipe(err_pipe) != 0) {
        throw TrainerError(std::string("pipe: ") + std::strerror(errno));
    }
    for (int fd : {in_pipe[1], out_pipe[0], err_pipe[0]}) {
        set_cloexec(fd);
    }
    pid_ = ::fork();
    if (pid_ < 0) {
        throw TrainerError(std::string("fork: ") + std::strerror(errno));
    }
    if (pid_ == 0) {
        ::dup2(in_pipe[0], STDIN_FILENO);
        ::dup2(out_pipe[1], STDOUT_FILENO);
        ::dup2(err_pipe[1], STDERR_FILENO);
        ::close(in_pipe[0]);
        ::close(out_pipe[1]);
        ::close(err_pipe[1]);
        ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    ::close(err_pipe[1]);
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
    err_child_ = err_pipe[0];
    ::fcntl(err_child_, F_SETFL, ::fcntl(err_child_, F_GETFL) | O_NONBLOCK);
}

ExternalProcess::~ExternalProcess() {
    terminate();
}

void ExternalProcess::terminate() {
    if (to_child_ >= 0) {
        ::close(to_child_);
        to_child_ = -1;
    }
    if (pid_ > 0) {
        // Closing stdin asks a well-behaved trainer to exit; give it a moment.
        for (int i = 0; i < 50; ++i) {
            if (::waitpid(pid_, nullptr, WNOHANG) == pid_) {
                pid_ = -1;
                break;
            }
            ::usleep(10000);
        }
        if (pid_ > 0) {
            ::kill(pid_, SIGKILL);
            ::waitpid(pid_, nullptr, 0);
            pid_ = -1;
        }
    }
    for (int* fd : {&from_child_, &err_child_}) {
        if (*fd >= 0) {
            ::close(*fd);
            *fd = -1;
        }
    }
}

void ExternalProcess::drain_stderr() {
    if (err_child_ < 0) {
        return;
    }
    char buf[4096];
    for (;;) {
        auto n = ::read(err_child_, buf, sizeof(buf));
        if (n <= 0) {
            break;
        }
        stderr_tail_.append(buf, static_cast<std::size_t>(n));
    }
    if (stderr_tail_.size() > kStderrKeep) {
        stderr_tail_.erase(0, stderr_tail_.size() - kStderrKeep);
    }
}

void ExternalProcess::fail(const std::string& what) {
    drain_stderr();
    std::string msg = "external trainer '" + command_ + "': " + what;
    if (!stderr_tail_.empty()) {
        msg += "\n--- trainer stderr ---\n" + stderr_tail_;
    }
    terminate();
    throw TrainerError(msg);
}

void ExternalProcess::write_line(const std::string& line, std::int64_t id) {
    if (to_child_ < 0) {
        fail("process is no longer running");
    }
    std::string data = line + "\n";
    std::size_t off = 0;
    while (off < data.size()) {
        auto n = ::write(to_child_, data.data() + off, data.size() - off);
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            fail("request " + std::to_string(id) + ": write failed (" + std::strerror(errno) + "), trainer exited?");
        }
        off += static_cast<std::size_t>(n);
    }
}

std::string ExternalProcess::read_line(std::int64_t id, const std::string& op) {
    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    for (;;) {
        if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            return line;
        }
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) {
            fail("request " + std::to_string(id) + " (" + op + ") timed out after " + std::to_string(timeout_.count())
                 + " ms");
        }
        pollfd fds[2] = {{from_child_, POLLIN, 0}, {err_child_, POLLIN, 0}};
        int rc = ::poll(fds, 2, static_cast<int>(std::min<long long>(left.count(), 1000)));
        if (rc < 0) {
            if (errno == EINTR) {
                continue;
            }
            fail(std::string("poll: ") + std::strerror(errno));
        }
        if (fds[1].revents) {
            drain_stderr();
        }
        if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
            char buf[65536];
            auto n = ::read(from_child_, buf, sizeof(buf));
            if (n < 0 && errno == EINTR) {
                continue;
            }
            if (n <= 0) {
                int status = 0;
                std::string how = "closed its output";
                if (pid_ > 0 && ::waitpid(pid_, &status, 0) == pid_) {
                    pid_ = -1;
                    how = WIFEXITED(status) ? "exited with status " + std::to_string(WEXITSTATUS(status))
                                            : "was killed by signal " + std::to_string(WTERMSIG(status));
                }
                fail("request " + std::to_string(id) + " (" + op + "): trainer " + how + " before responding");
            }
            buffer_.append(buf, static_cast<std::size_t>(n));
        }
    }
}

nlohmann::json ExternalProcess::request(nlohmann::json message) {
    const auto id = next_id_++;
    const std::string op = message.value("op", "");
    message["id"] = id;
    sent_ops_.push_back(op);
    write_line(message.dump(), id);
    const auto line = read_line(id, op);

    nlohmann::json response;
    try {
        response = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
        throw ProtocolError("request " + std::to_string(id) + " (" + op + "): response is not JSON: " + line.substr(0, 200));
    }
    if (!response.is_object() || !response.contains("ok") || !response["ok"].is_boolean()) {
        throw ProtocolError("request " + std::to_string(id) + " (" + op + "): response lacks boolean 'ok'");
    }
    if (response.contains("id") && response["id"] != id) {
        throw ProtocolError("request " + std::to_string(id) + " (" + op + "): response carries id " + response["id"].dump());
    }
    if (!response["ok"].get<bool>()) {
        drain_stderr();
        throw TrainerError("request " + std::to_string(id) + " (" + op + ") failed: " + response.value("error", std::string("unspecified error")));
    }
    return response;
}

namespace detail {

namespace {

nlohmann::json records_json(std::span<const Record> records, Task task, bool with_label) {
    auto arr = nlohmann::json::array();
    for (const auto& r : records) {
        arr.push_back(nlohmann::json::parse(record_to_json(r, task, with_label)));
    }
    return arr;
}

nlohmann::json unlabeled_json(std::span<const UnlabeledRecord> records) {
    auto arr = nlohmann::json::array();
    for (const auto& r : records) {
        arr.push_back({{"id", r.id}, {"timestamp", r.timestamp}, {"tokens", r.tokens}});
    }
    return arr;
}

std::string wire_task(Task task) {
    return task == Task::Classification ? "classification" : "sequence-labeling";
}

class ExternalLearner : public Learner {
  public:
    explicit ExternalLearner(TrainerSpec spec)
        : spec_(std::move(spec)), process_(std::make_shared<ExternalProcess>(spec_.command, spec_.timeout)) {
        auto hello = process_->request({{"op", "hello"}});
        if (hello.contains("capabilities") && hello["capabilities"].is_object()) {
            caps_.supports_pretrain_phase = hello["capabilities"].value("supports_pretrain_phase", false);
        }
    }

    Capabilities capabilities() const override { return caps_; }

    ModelArtifact train(const TrainRequest& req) override {
        if (req.train.empty() || req.dev.empty()) {
            throw UsageError("train: training and development sets must be non-empty");
        }
        nlohmann::json msg = {{"op", "train"},
                              {"task", wire_task(req.task)},
                              {"seed", req.seed},
                              {"metric", req.metric.to_string()},
                              {"labels", req.inventory},
                              {"train", records_json(req.train, req.task, true)},
                              {"dev", records_json(req.dev, req.task, true)},
                              {"hparams", spec_.hyperparameters}};
        if (req.init != nullptr) {
            msg["init_model_id"] = req.init->parameters;
        }
        auto resp = process_->request(std::move(msg));
        if (!resp.contains("model_id") || !resp["model_id"].is_string()) {
            throw ProtocolError("train response lacks a string model_id");
        }
        ModelArtifact a;
        a.trainer = spec_;
        a.task = req.task;
        a.labels = req.task == Task::Classification ? req.inventory : bio_tag_set(req.inventory);
        a.parameters = resp["model_id"].get<std::string>();
        a.training_split = req.training_split;
        a.seed = req.seed;
        a.dev_score = resp.value("dev_score", 0.0);
        if (req.init != nullptr) {
            a.transcript = req.init->transcript;
        }
        a.transcript.push_back("train(d_" + std::to_string(req.training_split) + ")");
        a.process = process_;
        return a;
    }

    ModelArtifact pretrain(const ModelArtifact* base, std::span<const UnlabeledRecord> texts, std::int64_t seed) override {
        if (!caps_.supports_pretrain_phase) {
            throw UnsupportedCapability("external trainer '" + spec_.command + "' does not advertise supports_pretrain_phase");
        }
        auto text_list = nlohmann::json::array();
        for (const auto& r : texts) {
            std::string joined;
            for (std::size_t i = 0; i < r.tokens.size(); ++i) {
                joined += (i ? " " : "") + r.tokens[i];
            }
            text_list.push_back(joined);
        }
        nlohmann::json msg = {{"op", "pretrain"}, {"seed", seed}, {"texts", std::move(text_list)}};
        msg["model_id"] = base ? nlohmann::json(base->parameters) : nlohmann::json(nullptr);
        auto resp = process_->request(std::move(msg));
        if (!resp.contains("model_id") || !resp["model_id"].is_string()) {
            throw ProtocolError("pretrain response lacks a string model_id");
        }
        ModelArtifact a = base ? *base : ModelArtifact{};
        a.trainer = spec_;
        a.parameters = resp["model_id"].get<std::string>();
        a.seed = seed;
        a.process = process_;
        return a;
    }

  private:
    TrainerSpec spec_;
    std::shared_ptr<ExternalProcess> process_;
    Capabilities caps_;
};

}// namespace

std::unique_ptr<Learner> make_external_learner(const TrainerSpec& spec) {
    if (spec.command.empty()) {
        throw UsageError("external trainer needs a command");
    }
    return std::make_unique<ExternalLearner>(spec);
}

std::vector<Label> predict_external(const ModelArtifact& model, std::span<const UnlabeledRecord> records) {
    if (!model.process) {
        throw TrainerError("external artifact has no live trainer process");
    }
    nlohmann::json msg = {{"op", "predict"}, {"model_id", model.parameters}, {"records", unlabeled_json(records)}};
    const auto id_hint = std::to_string(model.process->sent_ops().size() + 1);
    auto resp = model.process->request(std::move(msg));
    if (!resp.contains("labels") || !resp["labels"].is_array()) {
        throw ProtocolError("request " + id_hint + " (predict): response lacks a 'labels' array");
    }
    const auto& labels = resp["labels"];
    if (labels.size() != records.size()) {
        throw ProtocolError("request " + id_hint + " (predict): got " + std::to_string(labels.size()) + " labels for "
                            + std::to_string(records.size()) + " records");
    }
    std::vector<Label> out;
    out.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& l = labels[i];
        if (model.task == Task::Classification) {
            if (!l.is_string()) {
                throw ProtocolError("request " + id_hint + " (predict): label for record '" + records[i].id
                                    + "' is not a string");
            }
            out.emplace_back(l.get<std::string>());
        } else {
            if (!l.is_array() || l.size() != records[i].tokens.size()) {
                throw ProtocolError("request " + id_hint + " (predict): tag sequence for record '" + records[i].id
                                    + "' does not match its token count");
            }
            auto tags = l.get<TagSequence>();
            for (const auto& t : tags) {
                try {
                    bio_type(t);
                } catch (const DataError& e) {
                    throw ProtocolError("request " + id_hint + " (predict): " + e.what());
                }
            }
            out.emplace_back(std::move(tags));
        }
    }
    return out;
}

}// namespace detail

}// namespace tempdrift
