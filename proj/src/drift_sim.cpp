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
#include "tempdrift/drift_sim.hpp"

#include "tempdrift/errors.hpp"
#include "tempdrift/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

namespace tempdrift {

namespace {

constexpr const char* kOnsets = "bdfgklmnprstvz";
constexpr const char* kVowels = "aeiou";
constexpr std::size_t kSyllables = 14 * 5;

std::size_t churn_count(const DriftConfig& c) {
    return static_cast<std::size_t>(std::floor(c.churn * static_cast<double>(c.indicative_size) + 0.5));
}

std::vector<double> priors_for(const DriftConfig& c, int t) {
    const std::size_t k = c.classes.size();
    std::vector<double> w(k, 1.0);
    if (k > 1) {
        for (std::size_t i = 0; i < k; ++i) {
            const double pos = 2.0 * static_cast<double>(i) / static_cast<double>(k - 1) - 1.0;
            w[i] = std::exp(c.label_prior_drift * t * pos);
        }
    }
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& x : w) {
        x /= total;
    }
    return w;
}

std::size_t draw(Rng& rng, const std::vector<double>& probs) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) {
            return i;
        }
    }
    return probs.size() - 1;
}

std::string capitalize(std::string w) {
    if (!w.empty()) {
        w[0] = static_cast<char>(w[0] - 'a' + 'A');
    }
    return w;
}

std::string pad(std::size_t k, int width) {
    auto s = std::to_string(k);
    return std::string(s.size() < static_cast<std::size_t>(width) ? width - s.size() : 0, '0') + s;
}

}// namespace

std::string pseudo_word(std::size_t index, std::size_t pool) {
    if (pool == 0 || index >= pool) {
        throw UsageError("pseudo_word: index outside the pool");
    }
    // Affine scramble (a coprime with pool) so consecutive pool indices share no affix.
    std::size_t a = 2654435761u % pool;
    if (a == 0) {
        a = 1;
    }
    while (std::gcd(a, pool) != 1) {
        ++a;
    }
    std::size_t v = static_cast<std::size_t>((static_cast<unsigned __int128>(index) * a + 40503u) % pool);
    std::string word;
    for (int digits = 0; digits < 2 || v > 0; ++digits) {
        const std::size_t s = v % kSyllables;
        v /= kSyllables;
        word += kOnsets[s / 5];
        word += kVowels[s % 5];
    }
    return word;
}

std::size_t DriftConfig::required_vocab_size() const {
    const std::size_t per_class = indicative_size + static_cast<std::size_t>(periods - 1) * churn_count(*this);
    // The background needs at least as many words as one indicative set.
    return classes.size() * per_class + indicative_size;
}

void DriftConfig::validate() const {
    auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
    if (periods < 3) {
        throw UsageError("drift config: periods must be >= 3");
    }
    if (records_per_period < 1) {
        throw UsageError("drift config: records_per_period must be >= 1");
    }
    if (!in_unit(churn) || !in_unit(label_prior_drift) || !in_unit(signal_rate)) {
        throw UsageError("drift config: churn, label_prior_drift and signal_rate must lie in [0, 1]");
    }
    if (task == Task::Classification && classes.size() < 2) {
        throw UsageError("drift config: classification needs at least 2 classes");
    }
    if (classes.empty()) {
        throw UsageError("drift config: at least one span type is required");
    }
    std::set<std::string> uniq(classes.begin(), classes.end());
    if (uniq.size() != classes.size()) {
        throw UsageError("drift config: duplicate class names");
    }
    if (indicative_size < 1) {
        throw UsageError("drift config: indicative_size must be >= 1");
    }
    if (min_tokens < 1 || max_tokens < min_tokens) {
        throw UsageError("drift config: need 1 <= min_tokens <= max_tokens");
    }
    if (vocab_size < required_vocab_size()) {
        throw UsageError("drift config: vocab_size " + std::to_string(vocab_size) + " cannot sustain churn "
                         + std::to_string(churn) + " over " + std::to_string(periods) + " periods; need at least "
                         + std::to_string(required_vocab_size()));
    }
}

DriftConfig DriftConfig::from_config(const KeyValueConfig& kv) {
    kv.reject_unknown({"task", "periods", "first_period", "records_per_period", "vocab_size", "indicative_size", "churn",
                       "label_prior_drift", "signal_rate", "classes", "min_tokens", "max_tokens", "seed"});
    DriftConfig c;
    c.task = parse_task(kv.get_string("task", "classification"));
    if (c.task == Task::SequenceLabeling) {
        c.classes = {"LOC", "ORG", "PER"};
    }
    auto non_negative = [&](const std::string& key, std::int64_t fallback) {
        auto v = kv.get_int(key, fallback);
        if (v < 0) {
            throw UsageError("drift config: " + key + " must be non-negative");
        }
        return static_cast<std::size_t>(v);
    };
    c.periods = static_cast<int>(kv.get_int("periods", c.periods));
    c.first_period = kv.get_int("first_period", c.first_period);
    c.records_per_period = non_negative("records_per_period", static_cast<std::int64_t>(c.records_per_period));
    c.vocab_size = non_negative("vocab_size", static_cast<std::int64_t>(c.vocab_size));
    c.indicative_size = non_negative("indicative_size", static_cast<std::int64_t>(c.indicative_size));
    c.churn = kv.get_double("churn", c.churn);
    c.label_prior_drift = kv.get_double("label_prior_drift", c.label_prior_drift);
    c.signal_rate = kv.get_double("signal_rate", c.signal_rate);
    c.classes = kv.get_list("classes", c.classes);
    c.min_tokens = non_negative("min_tokens", static_cast<std::int64_t>(c.min_tokens));
    c.max_tokens = non_negative("max_tokens", static_cast<std::int64_t>(c.max_tokens));
    c.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<std::int64_t>(c.seed)));
    c.validate();
    return c;
}

DriftCorpus generate_corpus(const DriftConfig& config) {
    config.validate();
    const std::size_t n_classes = config.classes.size();
    const std::size_t k = config.indicative_size;
    const std::size_t r = churn_count(config);
    const std::size_t pool = config.vocab_size;
    const std::size_t n_indicative = n_classes * (k + static_cast<std::size_t>(config.periods - 1) * r);
    const std::size_t n_background = pool - n_indicative;

    // Indices [0, n_background) are background; indicative words are allocated after.
    std::size_t next_fresh = n_background;
    Rng vocab_rng(derive_seed(config.seed, "vocab"));
    std::vector<std::vector<std::vector<std::size_t>>> sets(static_cast<std::size_t>(config.periods));
    sets[0].resize(n_classes);
    for (auto& s : sets[0]) {
        for (std::size_t w = 0; w < k; ++w) {
            s.push_back(next_fresh++);
        }
    }
    for (int t = 1; t < config.periods; ++t) {
        sets[t] = sets[t - 1];
        for (auto& s : sets[t]) {
            for (auto pos : vocab_rng.sample_indices(k, r)) {
                s[pos] = next_fresh++;
            }
        }
    }

    DriftCorpus out;
    out.indicative.resize(sets.size());
    for (std::size_t t = 0; t < sets.size(); ++t) {
        for (const auto& s : sets[t]) {
            std::set<std::string> words;
            for (auto idx : s) {
                words.insert(pseudo_word(idx, pool));
            }
            out.indicative[t].push_back(std::move(words));
        }
        out.priors.push_back(priors_for(config, static_cast<int>(t)));
    }

    const bool tagging = config.task == Task::SequenceLabeling;
    std::vector<Record> records;
    records.reserve(config.records_per_period * sets.size());
    for (int t = 0; t < config.periods; ++t) {
        Rng rng(derive_seed(config.seed, "period", static_cast<std::uint64_t>(t)));
        const auto& priors = out.priors[static_cast<std::size_t>(t)];
        const auto period = config.first_period + t;
        auto indicative_word = [&](std::size_t c) {
            const auto& s = sets[static_cast<std::size_t>(t)][c];
            return pseudo_word(s[rng.below(s.size())], pool);
        };
        auto background_word = [&] { return pseudo_word(rng.below(n_background), pool); };
        for (std::size_t i = 0; i < config.records_per_period; ++i) {
            Record rec;
            rec.id = "p" + std::to_string(period) + "-" + pad(i, 6);
            rec.timestamp = period;
            const std::size_t len = config.min_tokens + rng.below(config.max_tokens - config.min_tokens + 1);
            if (!tagging) {
                const auto c = draw(rng, priors);
                for (std::size_t p = 0; p < len; ++p) {
                    rec.tokens.push_back(rng.uniform() < config.signal_rate ? indicative_word(c) : background_word());
                }
                rec.label = config.classes[c];
            } else {
                TagSequence tags;
                while (rec.tokens.size() < len) {
                    if (rng.uniform() < config.signal_rate) {
                        const auto c = draw(rng, priors);
                        const std::size_t span = std::min<std::size_t>(1 + rng.below(2), len - rec.tokens.size());
                        for (std::size_t p = 0; p < span; ++p) {
                            rec.tokens.push_back(capitalize(indicative_word(c)));
                            tags.push_back((p == 0 ? "B-" : "I-") + config.classes[c]);
                        }
                    } else {
                        rec.tokens.push_back(background_word());
                        tags.push_back("O");
                    }
                }
                rec.label = std::move(tags);
            }
            records.push_back(std::move(rec));
        }
    }
    out.dataset = make_dataset(config.task, std::move(records), config.classes);
    return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) {
        return 1.0;
    }
    std::size_t inter = 0;
    for (const auto& w : a) {
        inter += b.count(w);
    }
    return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

DriftReport describe(const TemporalDataset& dataset) {
    DriftReport rep;
    rep.labels = dataset.label_inventory;
    std::map<std::int64_t, std::set<std::string>> vocab;
    std::map<std::int64_t, std::map<std::string, std::size_t>> label_counts;
    std::map<std::int64_t, std::size_t> counts;
    for (const auto& r : dataset.records) {
        ++counts[r.timestamp];
        auto& v = vocab[r.timestamp];
        v.insert(r.tokens.begin(), r.tokens.end());
        auto& lc = label_counts[r.timestamp];
        if (const auto* s = std::get_if<std::string>(&r.label)) {
            ++lc[*s];
        } else {
            for (const auto& tag : std::get<TagSequence>(r.label)) {
                if (tag.rfind("B-", 0) == 0) {
                    ++lc[tag.substr(2)];
                }
            }
        }
    }
    for (const auto& [period, c] : counts) {
        rep.periods.push_back(period);
        rep.record_counts.push_back(c);
        std::vector<double> prior;
        std::size_t total = 0;
        for (const auto& [l, x] : label_counts[period]) {
            total += x;
        }
        for (const auto& l : rep.labels) {
            auto it = label_counts[period].find(l);
            const double x = it == label_counts[period].end() ? 0.0 : static_cast<double>(it->second);
            prior.push_back(total == 0 ? 0.0 : x / static_cast<double>(total));
        }
        rep.label_prior.push_back(std::move(prior));
    }
    for (auto a : rep.periods) {
        std::vector<double> row;
        for (auto b : rep.periods) {
            row.push_back(jaccard(vocab[a], vocab[b]));
        }
        rep.overlap.push_back(std::move(row));
    }
    return rep;
}

std::string DriftReport::to_text() const {
    std::ostringstream out;
    char buf[64];
    out << "# Drift report\n\n## Records per period\n\n| period | records |\n|---|---|\n";
    for (std::size_t i = 0; i < periods.size(); ++i) {
        out << "| " << periods[i] << " | " << record_counts[i] << " |\n";
    }
    out << "\n## Vocabulary overlap (Jaccard of token types)\n\n| period |";
    for (auto p : periods) {
        out << " " << p << " |";
    }
    out << "\n|---|";
    for (std::size_t i = 0; i < periods.size(); ++i) {
        out << "---|";
    }
    out << "\n";
    for (std::size_t i = 0; i < periods.size(); ++i) {
        out << "| " << periods[i] << " |";
        for (double v : overlap[i]) {
            std::snprintf(buf, sizeof(buf), " %.3f |", v);
            out << buf;
        }
        out << "\n";
    }
    out << "\n## Label prior per period\n\n| period |";
    for (const auto& l : labels) {
        out << " " << l << " |";
    }
    out << "\n|---|";
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out << "---|";
    }
    out << "\n";
    for (std::size_t i = 0; i < periods.size(); ++i) {
        out << "| " << periods[i] << " |";
        for (double v : label_prior[i]) {
            std::snprintf(buf, sizeof(buf), " %.3f |", v);
            out << buf;
        }
        out << "\n";
    }
    return out.str();
}

}// namespace tempdrift
