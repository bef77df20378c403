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
#pragma once

#include <chrono>
#include <string>
#include <sys/types.h>
#include <vector>

#include <json.hpp>

namespace tempdrift {

/// A trainer child process speaking newline-delimited JSON over stdin/stdout.
/// Every request carries an integer "id" that the response must echo; one
/// request is in flight at a time. stderr is captured for diagnostics.
class ExternalProcess {
  public:
    ExternalProcess(std::string command, std::chrono::milliseconds timeout);
    ~ExternalProcess();

    ExternalProcess(const ExternalProcess&) = delete;
    ExternalProcess& operator=(const ExternalProcess&) = delete;

    /// Sends `message` (an "id" is added) and returns the response object.
    /// Throws TrainerError on {"ok": false}, crash or timeout, ProtocolError on
    /// malformed or mismatched responses.
    nlohmann::json request(nlohmann::json message);

    /// "op" of every request sent so far, in order.
    const std::vector<std::string>& sent_ops() const { return sent_ops_; }

    /// Last few KiB of the child's stderr.
    const std::string& stderr_tail() const { return stderr_tail_; }

    const std::string& command() const { return command_; }

  private:
    void write_line(const std::string& line, std::int64_t id);
    std::string read_line(std::int64_t id, const std::string& op);
    void drain_stderr();
    [[noreturn]] void fail(const std::string& what);
    void terminate();

    std::string command_;
    std::chrono::milliseconds timeout_;
    pid_t pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    int err_child_ = -1;
    std::string buffer_;
    std::string stderr_tail_;
    std::int64_t next_id_ = 1;
    std::vector<std::string> sent_ops_;
};

}// namespace tempdrift
