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
// Multinomial logistic regression over hashed unigram and bigram features,
// trained by seeded SGD with per-epoch dev selection.

#include "tempdrift/errors.hpp"
#include "tempdrift/learners.hpp"
#include "tempdrift/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include <json.hpp>

namespace tempdrift::detail {

namespace {

constexpr char kMagic[] = "tempdrift-classifier-v1";

std::vector<HashedFeature> featurize(const std::vector<std::string>& tokens, std::uint32_t mask) {
    std::vector<std::string> names;
    names.reserve(tokens.size() * 2 + 1);
    names.emplace_back("bias");
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        names.push_back("u\x1f" + tokens[i]);
        if (i + 1 < tokens.size()) {
            names.push_back("b\x1f" + tokens[i] + "\x1f" + tokens[i + 1]);
        }
    }
    const float norm = 1.0f / std::sqrt(static_cast<float>(names.size()));
    std::vector<HashedFeature> out;
    out.reserve(names.size());
    for (const auto& name : names) {
        const auto h = fnv1a(name);
        out.push_back({static_cast<std::uint32_t>(h & mask), (h >> 63) ? -norm : norm});
    }
    return out;
}

struct Weights {
    std::size_t dims = 0;
    std::size_t classes = 0;
    std::vector<double> w;// [feature * classes + class]

    void scores(const std::vector<HashedFeature>& x, std::vector<double>& out) const {
        out.assign(classes, 0.0);
        for (const auto& f : x) {
            const double* row = &w[static_cast<std::size_t>(f.index) * classes];
            for (std::size_t c = 0; c < classes; ++c) {
                out[c] += f.value * row[c];
            }
        }
    }
};

std::size_t argmax(const std::vector<double>& v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

std::string serialize(const Weights& weights, const std::vector<std::string>& classes, int hash_bits) {
    nlohmann::ordered_json header;
    header["format"] = kMagic;
    header["hash_bits"] = hash_bits;
    header["classes"] = classes;
    std::string out = header.dump() + "\n";
    const auto offset = out.size();
    out.resize(offset + weights.w.size() * sizeof(double));
    std::memcpy(out.data() + offset, weights.w.data(), weights.w.size() * sizeof(double));
    return out;
}

struct ParsedModel {
    std::vector<std::string> classes;
    std::uint32_t mask = 0;
    Weights weights;
};

ParsedModel parse(const std::string& payload) {
    const auto nl = payload.find('\n');
    if (nl == std::string::npos) {
        throw DataError("corrupt classifier payload");
    }
    auto header = nlohmann::json::parse(payload.substr(0, nl));
    if (header.at("format") != kMagic) {
        throw DataError("not a classifier payload");
    }
    ParsedModel m;
    m.classes = header.at("classes").get<std::vector<std::string>>();
    const int bits = header.at("hash_bits").get<int>();
    m.mask = static_cast<std::uint32_t>((1ULL << bits) - 1);
    m.weights.dims = std::size_t{1} << bits;
    m.weights.classes = m.classes.size();
    m.weights.w.resize(m.weights.dims * m.weights.classes);
    if (payload.size() - nl - 1 != m.weights.w.size() * sizeof(double)) {
        throw DataError("classifier payload has the wrong size");
    }
    std::memcpy(m.weights.w.data(), payload.data() + nl + 1, m.weights.w.size() * sizeof(double));
    return m;
}

}// namespace

ModelArtifact train_classifier(const TrainerSpec& spec, const TrainRequest& req) {
    const int hash_bits = hparam_int(spec, "hash_bits", 18);
    const int epochs = hparam_int(spec, "epochs", 10);
    const int patience = hparam_int(spec, "patience", 3);
    const double lr = hparam_double(spec, "learning_rate", 0.5);
    if (hash_bits < 4 || hash_bits > 26) {
        throw UsageError("hash_bits must lie in [4, 26]");
    }
    if (epochs < 1 || patience < 1 || !(lr > 0)) {
        throw UsageError("epochs and patience must be >= 1 and learning_rate > 0");
    }

    const auto& classes = req.inventory;
    if (classes.empty()) {
        throw UsageError("classifier needs a non-empty label inventory");
    }
    const std::uint32_t mask = static_cast<std::uint32_t>((1ULL << hash_bits) - 1);

    std::vector<std::vector<HashedFeature>> x;
    std::vector<std::size_t> y;
    x.reserve(req.train.size());
    for (const auto& r : req.train) {
        x.push_back(featurize(r.tokens, mask));
        const auto& label = std::get<std::string>(r.label);
        auto it = std::find(classes.begin(), classes.end(), label);
        if (it == classes.end()) {
            throw UsageError("training label '" + label + "' is not in the inventory");
        }
        y.push_back(static_cast<std::size_t>(it - classes.begin()));
    }
    std::vector<std::vector<HashedFeature>> dev_x;
    std::vector<Record> dev_gold(req.dev.begin(), req.dev.end());
    for (const auto& r : req.dev) {
        dev_x.push_back(featurize(r.tokens, mask));
    }

    Weights w;
    w.dims = std::size_t{1} << hash_bits;
    w.classes = classes.size();
    w.w.assign(w.dims * w.classes, 0.0);

    Weights best = w;
    double best_score = -1.0;
    int best_epoch = 0;
    int stale = 0;

    std::vector<std::size_t> order(x.size());
    std::vector<double> s;
    std::vector<Label> dev_pred(dev_x.size());
    for (int epoch = 1; epoch <= epochs; ++epoch) {
        for (std::size_t i = 0; i < order.size(); ++i) {
            order[i] = i;
        }
        Rng rng(derive_seed(static_cast<std::uint64_t>(req.seed), "classifier-epoch", static_cast<std::uint64_t>(epoch)));
        rng.shuffle(order);

        for (auto idx : order) {
            w.scores(x[idx], s);
            const double top = *std::max_element(s.begin(), s.end());
            double z = 0.0;
            for (auto& v : s) {
                v = std::exp(v - top);
                z += v;
            }
            for (std::size_t c = 0; c < w.classes; ++c) {
                const double grad = s[c] / z - (c == y[idx] ? 1.0 : 0.0);
                if (grad == 0.0) {
                    continue;
                }
                for (const auto& f : x[idx]) {
                    w.w[static_cast<std::size_t>(f.index) * w.classes + c] -= lr * grad * f.value;
                }
            }
        }

        for (std::size_t i = 0; i < dev_x.size(); ++i) {
            w.scores(dev_x[i], s);
            dev_pred[i] = classes[argmax(s)];
        }
        const double score = evaluate(req.metric, dev_gold, dev_pred, classes).value;
        if (score > best_score) {
            best_score = score;
            best = w;
            best_epoch = epoch;
            stale = 0;
        } else if (++stale >= patience) {
            break;
        }
    }

    ModelArtifact a;
    a.trainer = spec;
    a.task = Task::Classification;
    a.labels = classes;
    a.parameters = serialize(best, classes, hash_bits);
    a.training_split = req.training_split;
    a.seed = req.seed;
    a.dev_score = best_score;
    a.best_epoch = best_epoch;
    a.transcript.push_back("train(d_" + std::to_string(req.training_split) + ")");
    return a;
}

std::vector<Label> predict_classifier(const ModelArtifact& model, std::span<const UnlabeledRecord> records) {
    if (model.task != Task::Classification) {
        throw UsageError("classifier artifact used for a non-classification task");
    }
    const auto m = parse(model.parameters);
    std::vector<Label> out;
    out.reserve(records.size());
    std::vector<double> s;
    for (const auto& r : records) {
        m.weights.scores(featurize(r.tokens, m.mask), s);
        out.emplace_back(m.classes[argmax(s)]);
    }
    return out;
}

}// namespace tempdrift::detail
