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

#include "tempdrift/metrics.hpp"
#include "tempdrift/record.hpp"

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace tempdrift {

class ExternalProcess;

enum class TrainerKind { BuiltinClassifier, BuiltinTagger, External };

struct Capabilities {
    bool supports_pretrain_phase = false;
};

struct TrainerSpec {
    TrainerKind kind = TrainerKind::BuiltinClassifier;
    /// Shell command line for External trainers.
    std::string command;
    /// Passed to the trainer verbatim. Built-ins read: learning_rate, epochs,
    /// patience, hash_bits.
    std::map<std::string, std::string> hyperparameters;
    /// Per-request timeout for External trainers.
    std::chrono::milliseconds timeout{std::chrono::minutes(30)};

    /// "builtin-classifier", "builtin-tagger" or "external:<command>".
    static TrainerSpec parse(const std::string& text);
    std::string to_string() const;

    bool operator==(const TrainerSpec&) const = default;
};

/// A trained model. Built-in parameters are a self-contained byte payload;
/// external models are a handle into a live trainer process.
struct ModelArtifact {
    TrainerSpec trainer;
    Task task = Task::Classification;
    /// Output vocabulary: classes, or the tag set for taggers.
    std::vector<std::string> labels;
    std::string parameters;
    int training_split = 0;
    std::int64_t seed = 0;
    /// Dev metric of the stored checkpoint.
    double dev_score = 0.0;
    int best_epoch = 0;
    /// Phases that produced this artifact, oldest first.
    std::vector<std::string> transcript;
    std::shared_ptr<ExternalProcess> process;

    /// Canonical serialization; two artifacts are identical iff these bytes are.
    std::string bytes() const;
};

struct TrainRequest {
    Task task = Task::Classification;
    TaskMetric metric;
    std::vector<std::string> inventory;
    std::span<const Record> train;
    std::span<const Record> dev;
    std::int64_t seed = 0;
    int training_split = 0;
    /// Continue from this model (external trainers only).
    const ModelArtifact* init = nullptr;
};

/// A trainer instance. External learners own one child process; all
/// artifacts they produce share it.
class Learner {
  public:
    virtual ~Learner() = default;
    virtual Capabilities capabilities() const = 0;

    /// Trains with per-epoch dev evaluation, keeps the best-on-dev checkpoint,
    /// stops after `patience` epochs without improvement.
    virtual ModelArtifact train(const TrainRequest& request) = 0;

    /// Runs the unsupervised objective on `texts`, starting from `base` or from
    /// the trainer's own initial model when `base` is null. Built-ins throw
    /// UnsupportedCapability.
    virtual ModelArtifact pretrain(const ModelArtifact* base, std::span<const UnlabeledRecord> texts,
                                   std::int64_t seed) = 0;
};

std::unique_ptr<Learner> make_learner(const TrainerSpec& spec);

/// One-shot helpers over make_learner.
ModelArtifact train(const TrainerSpec& spec, const TrainRequest& request);
std::vector<Label> predict(const ModelArtifact& model, std::span<const UnlabeledRecord> records);
std::vector<Label> predict(const ModelArtifact& model, const std::vector<Record>& records);

/// Predicts on label-stripped copies of `test` and scores them with `metric`.
MetricValue score_model(const ModelArtifact& model, const TaskMetric& metric, const std::vector<Record>& test,
                        const std::vector<std::string>& inventory);

/// Tag set used by the built-in tagger: "O", then B-X, I-X per type.
std::vector<std::string> bio_tag_set(const std::vector<std::string>& types);

namespace detail {

/// Signed feature hashing: 64-bit FNV-1a of the feature string; the low bits
/// pick the bucket and the top bit the sign.
struct HashedFeature {
    std::uint32_t index = 0;
    float value = 0.0f;
};

std::uint64_t fnv1a(std::string_view text);

ModelArtifact train_classifier(const TrainerSpec& spec, const TrainRequest& request);
std::vector<Label> predict_classifier(const ModelArtifact& model, std::span<const UnlabeledRecord> records);
ModelArtifact train_tagger(const TrainerSpec& spec, const TrainRequest& request);
std::vector<Label> predict_tagger(const ModelArtifact& model, std::span<const UnlabeledRecord> records);

std::unique_ptr<Learner> make_external_learner(const TrainerSpec& spec);
std::vector<Label> predict_external(const ModelArtifact& model, std::span<const UnlabeledRecord> records);

int hparam_int(const TrainerSpec& spec, const std::string& key, int fallback);
double hparam_double(const TrainerSpec& spec, const std::string& key, double fallback);

}// namespace detail

}// namespace tempdrift
