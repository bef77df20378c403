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
#include "tempdrift/learners.hpp"

#include "tempdrift/errors.hpp"
#include "tempdrift/grid.hpp"

#include <charconv>

namespace tempdrift {

TrainerSpec TrainerSpec::parse(const std::string& text) {
    TrainerSpec spec;
    if (text == "builtin-classifier") {
        spec.kind = TrainerKind::BuiltinClassifier;
    } else if (text == "builtin-tagger") {
        spec.kind = TrainerKind::BuiltinTagger;
    } else if (text.rfind("external:", 0) == 0) {
        spec.kind = TrainerKind::External;
        spec.command = text.substr(9);
        if (spec.command.find_first_not_of(" \t") == std::string::npos) {
            throw UsageError("external trainer needs a non-empty command");
        }
    } else {
        throw UsageError("unknown trainer '" + text + "' (expected builtin-classifier, builtin-tagger or external:CMD)");
    }
    return spec;
}

std::string TrainerSpec::to_string() const {
    switch (kind) {
        case TrainerKind::BuiltinClassifier: return "builtin-classifier";
        case TrainerKind::BuiltinTagger: return "builtin-tagger";
        case TrainerKind::External: return "external:" + command;
    }
    return {};
}

std::string ModelArtifact::bytes() const {
    std::string out = "tempdrift-artifact\n";
    out += trainer.to_string() + "\n";
    for (const auto& [k, v] : trainer.hyperparameters) {
        out += k + "=" + v + "\n";
    }
    out += to_string(task) + "\n";
    for (const auto& l : labels) {
        out += l + "\t";
    }
    out += "\nsplit=" + std::to_string(training_split) + " seed=" + std::to_string(seed) + " dev="
           + format_roundtrip(dev_score) + " epoch=" + std::to_string(best_epoch) + "\n";
    out += std::to_string(parameters.size()) + "\n";
    out += parameters;
    return out;
}

std::vector<std::string> bio_tag_set(const std::vector<std::string>& types) {
    std::vector<std::string> tags = {"O"};
    for (const auto& t : types) {
        tags.push_back("B-" + t);
        tags.push_back("I-" + t);
    }
    return tags;
}

namespace detail {

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

int hparam_int(const TrainerSpec& spec, const std::string& key, int fallback) {
    auto it = spec.hyperparameters.find(key);
    if (it == spec.hyperparameters.end()) {
        return fallback;
    }
    int v = 0;
    const auto& s = it->second;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw UsageError("hyperparameter " + key + " must be an integer, got '" + s + "'");
    }
    return v;
}

double hparam_double(const TrainerSpec& spec, const std::string& key, double fallback) {
    auto it = spec.hyperparameters.find(key);
    if (it == spec.hyperparameters.end()) {
        return fallback;
    }
    try {
        std::size_t used = 0;
        double v = std::stod(it->second, &used);
        if (used != it->second.size()) {
            throw std::invalid_argument("trailing");
        }
        return v;
    } catch (const std::exception&) {
        throw UsageError("hyperparameter " + key + " must be a number, got '" + it->second + "'");
    }
}

}// namespace detail

namespace {

void check_request(const TrainRequest& req) {
    if (req.train.empty()) {
        throw UsageError("train: empty training set");
    }
    if (req.dev.empty()) {
        throw UsageError("train: empty development set");
    }
    auto kind_ok = [&](const Record& r) {
        return req.task == Task::Classification ? std::holds_alternative<std::string>(r.label)
                                                : std::holds_alternative<TagSequence>(r.label);
    };
    for (const auto& r : req.train) {
        if (!kind_ok(r)) {
            throw UsageError("train: record '" + r.id + "' does not match task kind " + to_string(req.task));
        }
    }
    for (const auto& r : req.dev) {
        if (!kind_ok(r)) {
            throw UsageError("train: dev record '" + r.id + "' does not match task kind " + to_string(req.task));
        }
    }
    check_metric(req.metric, req.task, req.inventory);
}

class BuiltinLearner : public Learner {
  public:
    explicit BuiltinLearner(TrainerSpec spec) : spec_(std::move(spec)) {}

    Capabilities capabilities() const override { return {}; }

    ModelArtifact train(const TrainRequest& request) override {
        check_request(request);
        if (request.init != nullptr) {
            throw UnsupportedCapability(spec_.to_string() + " cannot continue training from another artifact");
        }
        if (spec_.kind == TrainerKind::BuiltinClassifier) {
            if (request.task != Task::Classification) {
                throw UsageError("builtin-classifier needs a classification task");
            }
            return detail::train_classifier(spec_, request);
        }
        if (request.task != Task::SequenceLabeling) {
            throw UsageError("builtin-tagger needs a sequence-labeling task");
        }
        return detail::train_tagger(spec_, request);
    }

    ModelArtifact pretrain(const ModelArtifact*, std::span<const UnlabeledRecord>, std::int64_t) override {
        throw UnsupportedCapability(spec_.to_string() + " does not support a pre-training phase");
    }

  private:
    TrainerSpec spec_;
};

}// namespace

std::unique_ptr<Learner> make_learner(const TrainerSpec& spec) {
    if (spec.kind == TrainerKind::External) {
        return detail::make_external_learner(spec);
    }
    return std::make_unique<BuiltinLearner>(spec);
}

ModelArtifact train(const TrainerSpec& spec, const TrainRequest& request) {
    return make_learner(spec)->train(request);
}

std::vector<Label> predict(const ModelArtifact& model, std::span<const UnlabeledRecord> records) {
    switch (model.trainer.kind) {
        case TrainerKind::BuiltinClassifier: return detail::predict_classifier(model, records);
        case TrainerKind::BuiltinTagger: return detail::predict_tagger(model, records);
        case TrainerKind::External: return detail::predict_external(model, records);
    }
    return {};
}

std::vector<Label> predict(const ModelArtifact& model, const std::vector<Record>& records) {
    const auto stripped = strip_labels(records);
    return predict(model, std::span<const UnlabeledRecord>(stripped));
}

MetricValue score_model(const ModelArtifact& model, const TaskMetric& metric, const std::vector<Record>& test,
                        const std::vector<std::string>& inventory) {
    return evaluate(metric, test, predict(model, test), inventory);
}

}// namespace tempdrift
