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
// Averaged structured perceptron for BIO tagging. Decoding is Viterbi over
// the tag lattice with transitions into I-X allowed only from B-X or I-X, so
// the tagger never emits an orphan I- tag.

#include "tempdrift/errors.hpp"
#include "tempdrift/learners.hpp"
#include "tempdrift/rng.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <limits>

#include <json.hpp>

namespace tempdrift::detail {

namespace {

constexpr char kMagic[] = "tempdrift-tagger-v1";
constexpr double kForbidden = -std::numeric_limits<double>::infinity();

std::string word_shape(const std::string& token) {
    std::string shape;
    for (unsigned char c : token) {
        char k = std::isupper(c) ? 'X' : std::islower(c) ? 'x' : std::isdigit(c) ? 'd' : static_cast<char>(c);
        if (shape.empty() || shape.back() != k) {
            shape.push_back(k);
        }
    }
    return shape;
}

using TokenFeatures = std::vector<std::uint32_t>;

std::vector<TokenFeatures> featurize(const std::vector<std::string>& tokens, std::uint32_t mask) {
    std::vector<TokenFeatures> out(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto& tok = tokens[i];
        std::string lower = tok;
        std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
        std::vector<std::string> names = {"bias", "w=" + tok, "l=" + lower, "s=" + word_shape(tok)};
        for (std::size_t k = 1; k <= 3 && k <= tok.size(); ++k) {
            names.push_back("p" + std::to_string(k) + "=" + tok.substr(0, k));
            names.push_back("x" + std::to_string(k) + "=" + tok.substr(tok.size() - k));
        }
        for (const auto& n : names) {
            out[i].push_back(static_cast<std::uint32_t>(fnv1a(n) & mask));
        }
    }
    return out;
}

/// Emission weights [feature * tags + tag] then transitions [(prev + 1) * tags + tag],
/// where prev = -1 is the sentence start.
struct Model {
    std::size_t dims = 0;
    std::size_t tags = 0;
    std::vector<double> w;

    std::size_t emission(std::uint32_t f, std::size_t t) const { return static_cast<std::size_t>(f) * tags + t; }
    std::size_t transition(int prev, std::size_t t) const {
        return dims * tags + static_cast<std::size_t>(prev + 1) * tags + t;
    }
    std::size_t size() const { return dims * tags + (tags + 1) * tags; }
};

/// allowed[(prev + 1) * tags + t]
std::vector<char> transition_mask(const std::vector<std::string>& tag_set) {
    const auto T = tag_set.size();
    std::vector<char> allowed((T + 1) * T, 1);
    for (std::size_t t = 0; t < T; ++t) {
        if (tag_set[t][0] != 'I') {
            continue;
        }
        const auto type = tag_set[t].substr(2);
        for (int prev = -1; prev < static_cast<int>(T); ++prev) {
            bool ok = prev >= 0 && tag_set[static_cast<std::size_t>(prev)] != "O"
                      && tag_set[static_cast<std::size_t>(prev)].substr(2) == type;
            allowed[static_cast<std::size_t>(prev + 1) * T + t] = ok;
        }
    }
    return allowed;
}

std::vector<std::size_t> viterbi(const Model& m, const std::vector<char>& allowed, const std::vector<TokenFeatures>& x) {
    const auto T = m.tags;
    const auto L = x.size();
    std::vector<double> score(L * T, kForbidden);
    std::vector<int> back(L * T, -1);
    std::vector<double> emit(T);
    for (std::size_t i = 0; i < L; ++i) {
        std::fill(emit.begin(), emit.end(), 0.0);
        for (auto f : x[i]) {
            for (std::size_t t = 0; t < T; ++t) {
                emit[t] += m.w[m.emission(f, t)];
            }
        }
        for (std::size_t t = 0; t < T; ++t) {
            if (i == 0) {
                if (allowed[t]) {
                    score[t] = emit[t] + m.w[m.transition(-1, t)];
                }
                continue;
            }
            double best = kForbidden;
            int arg = -1;
            for (std::size_t p = 0; p < T; ++p) {
                const double prev = score[(i - 1) * T + p];
                if (prev == kForbidden || !allowed[(p + 1) * T + t]) {
                    continue;
                }
                const double v = prev + m.w[m.transition(static_cast<int>(p), t)];
                if (v > best) {
                    best = v;
                    arg = static_cast<int>(p);
                }
            }
            if (arg >= 0) {
                score[i * T + t] = best + emit[t];
                back[i * T + t] = arg;
            }
        }
    }
    std::vector<std::size_t> path(L);
    std::size_t last = 0;
    double best = kForbidden;
    for (std::size_t t = 0; t < T; ++t) {
        if (score[(L - 1) * T + t] > best) {
            best = score[(L - 1) * T + t];
            last = t;
        }
    }
    for (std::size_t i = L; i-- > 0;) {
        path[i] = last;
        if (i > 0) {
            last = static_cast<std::size_t>(back[i * T + last]);
        }
    }
    return path;
}

std::string serialize(const Model& m, const std::vector<std::string>& tag_set, int hash_bits) {
    nlohmann::ordered_json header;
    header["format"] = kMagic;
    header["hash_bits"] = hash_bits;
    header["tags"] = tag_set;
    std::string out = header.dump() + "\n";
    const auto offset = out.size();
    out.resize(offset + m.w.size() * sizeof(double));
    std::memcpy(out.data() + offset, m.w.data(), m.w.size() * sizeof(double));
    return out;
}

struct Parsed {
    std::vector<std::string> tag_set;
    std::uint32_t mask = 0;
    Model model;
};

Parsed parse(const std::string& payload) {
    const auto nl = payload.find('\n');
    if (nl == std::string::npos) {
        throw DataError("corrupt tagger payload");
    }
    auto header = nlohmann::json::parse(payload.substr(0, nl));
    if (header.at("format") != kMagic) {
        throw DataError("not a tagger payload");
    }
    Parsed p;
    p.tag_set = header.at("tags").get<std::vector<std::string>>();
    const int bits = header.at("hash_bits").get<int>();
    p.mask = static_cast<std::uint32_t>((1ULL << bits) - 1);
    p.model.dims = std::size_t{1} << bits;
    p.model.tags = p.tag_set.size();
    p.model.w.resize(p.model.size());
    if (payload.size() - nl - 1 != p.model.w.size() * sizeof(double)) {
        throw DataError("tagger payload has the wrong size");
    }
    std::memcpy(p.model.w.data(), payload.data() + nl + 1, p.model.w.size() * sizeof(double));
    return p;
}

TagSequence to_tags(const std::vector<std::size_t>& path, const std::vector<std::string>& tag_set) {
    TagSequence out;
    out.reserve(path.size());
    for (auto t : path) {
        out.push_back(tag_set[t]);
    }
    return out;
}

}// namespace

ModelArtifact train_tagger(const TrainerSpec& spec, const TrainRequest& req) {
    const int hash_bits = hparam_int(spec, "hash_bits", 16);
    const int epochs = hparam_int(spec, "epochs", 10);
    const int patience = hparam_int(spec, "patience", 3);
    if (hash_bits < 4 || hash_bits > 24) {
        throw UsageError("hash_bits must lie in [4, 24]");
    }
    if (epochs < 1 || patience < 1) {
        throw UsageError("epochs and patience must be >= 1");
    }
    const std::uint32_t mask = static_cast<std::uint32_t>((1ULL << hash_bits) - 1);
    const auto tag_set = bio_tag_set(req.inventory);
    const auto allowed = transition_mask(tag_set);

    auto tag_index = [&](const std::string& tag) {
        auto it = std::find(tag_set.begin(), tag_set.end(), tag);
        if (it == tag_set.end()) {
            throw UsageError("tag '" + tag + "' is outside the tag set");
        }
        return static_cast<std::size_t>(it - tag_set.begin());
    };

    std::vector<std::vector<TokenFeatures>> x;
    std::vector<std::vector<std::size_t>> y;
    for (const auto& r : req.train) {
        x.push_back(featurize(r.tokens, mask));
        std::vector<std::size_t> gold;
        for (const auto& tag : std::get<TagSequence>(r.label)) {
            gold.push_back(tag_index(tag));
        }
        y.push_back(std::move(gold));
    }
    std::vector<std::vector<TokenFeatures>> dev_x;
    for (const auto& r : req.dev) {
        dev_x.push_back(featurize(r.tokens, mask));
    }
    const std::vector<Record> dev_gold(req.dev.begin(), req.dev.end());

    Model w;
    w.dims = std::size_t{1} << hash_bits;
    w.tags = tag_set.size();
    w.w.assign(w.size(), 0.0);
    // Averaging: avg = w - acc / c, where every update at step c adds c * delta to acc.
    std::vector<double> acc(w.size(), 0.0);
    double c = 1.0;

    Model averaged = w;
    Model best = w;
    double best_score = -1.0;
    int best_epoch = 0;
    int stale = 0;

    auto bump = [&](std::size_t idx, double delta) {
        w.w[idx] += delta;
        acc[idx] += c * delta;
    };

    std::vector<std::size_t> order(x.size());
    std::vector<Label> dev_pred(dev_x.size());
    for (int epoch = 1; epoch <= epochs; ++epoch) {
        for (std::size_t i = 0; i < order.size(); ++i) {
            order[i] = i;
        }
        Rng rng(derive_seed(static_cast<std::uint64_t>(req.seed), "tagger-epoch", static_cast<std::uint64_t>(epoch)));
        rng.shuffle(order);

        for (auto idx : order) {
            const auto pred = viterbi(w, allowed, x[idx]);
            const auto& gold = y[idx];
            if (pred != gold) {
                for (std::size_t i = 0; i < gold.size(); ++i) {
                    const int gp = i == 0 ? -1 : static_cast<int>(gold[i - 1]);
                    const int pp = i == 0 ? -1 : static_cast<int>(pred[i - 1]);
                    if (gold[i] == pred[i] && gp == pp) {
                        continue;
                    }
                    for (auto f : x[idx][i]) {
                        bump(w.emission(f, gold[i]), 1.0);
                        bump(w.emission(f, pred[i]), -1.0);
                    }
                    bump(w.transition(gp, gold[i]), 1.0);
                    bump(w.transition(pp, pred[i]), -1.0);
                }
            }
            c += 1.0;
        }

        for (std::size_t k = 0; k < w.w.size(); ++k) {
            averaged.w[k] = w.w[k] - acc[k] / c;
        }
        for (std::size_t i = 0; i < dev_x.size(); ++i) {
            dev_pred[i] = to_tags(viterbi(averaged, allowed, dev_x[i]), tag_set);
        }
        const double score = evaluate(req.metric, dev_gold, dev_pred, req.inventory).value;
        if (score > best_score) {
            best_score = score;
            best = averaged;
            best_epoch = epoch;
            stale = 0;
        } else if (++stale >= patience) {
            break;
        }
    }

    ModelArtifact a;
    a.trainer = spec;
    a.task = Task::SequenceLabeling;
    a.labels = tag_set;
    a.parameters = serialize(best, tag_set, hash_bits);
    a.training_split = req.training_split;
    a.seed = req.seed;
    a.dev_score = best_score;
    a.best_epoch = best_epoch;
    a.transcript.push_back("train(d_" + std::to_string(req.training_split) + ")");
    return a;
}

std::vector<Label> predict_tagger(const ModelArtifact& model, std::span<const UnlabeledRecord> records) {
    if (model.task != Task::SequenceLabeling) {
        throw UsageError("tagger artifact used for a non-sequence-labeling task");
    }
    const auto p = parse(model.parameters);
    const auto allowed = transition_mask(p.tag_set);
    std::vector<Label> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        out.emplace_back(to_tags(viterbi(p.model, allowed, featurize(r.tokens, p.mask)), p.tag_set));
    }
    return out;
}

}// namespace tempdrift::detail
