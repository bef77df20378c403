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

#include "tempdrift/config.hpp"
#include "tempdrift/record.hpp"

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace tempdrift {

/// Synthetic corpus with controllable drift. Every class (or span type) owns an
/// indicative vocabulary of `indicative_size` words; at each period transition
/// round(churn * indicative_size) of them, chosen at random, are replaced by
/// never-used words. Tokens are indicative with probability `signal_rate`,
/// otherwise drawn from a period-invariant background vocabulary.
struct DriftConfig {
    Task task = Task::Classification;
    int periods = 6;
    std::int64_t first_period = 2014;
    std::size_t records_per_period = 2000;
    /// Total word pool: background plus every indicative word ever used.
    std::size_t vocab_size = 5000;
    std::size_t indicative_size = 40;
    double churn = 0.3;
    double label_prior_drift = 0.0;
    double signal_rate = 0.15;
    std::vector<std::string> classes = {"negative", "neutral", "positive"};
    std::size_t min_tokens = 8;
    std::size_t max_tokens = 16;
    std::uint64_t seed = 1;

    /// Smallest vocab_size that sustains the churn over every period.
    std::size_t required_vocab_size() const;
    /// Throws UsageError for out-of-range fields or a vocabulary too small for the churn.
    void validate() const;

    /// Keys: task, periods, first_period, records_per_period, vocab_size,
    /// indicative_size, churn, label_prior_drift, signal_rate, classes,
    /// min_tokens, max_tokens, seed.
    static DriftConfig from_config(const KeyValueConfig& config);
};

struct DriftCorpus {
    TemporalDataset dataset;
    /// indicative[t][c]: the indicative words of class c in period t (0-based).
    std::vector<std::vector<std::set<std::string>>> indicative;
    /// Class priors per period.
    std::vector<std::vector<double>> priors;
};

DriftCorpus generate_corpus(const DriftConfig& config);

inline TemporalDataset generate(const DriftConfig& config) {
    return generate_corpus(config).dataset;
}

struct DriftReport {
    std::vector<std::int64_t> periods;
    std::vector<std::size_t> record_counts;
    /// Jaccard overlap of observed token types between periods.
    std::vector<std::vector<double>> overlap;
    std::vector<std::string> labels;
    /// Share of each label per period (span types count entity mentions).
    std::vector<std::vector<double>> label_prior;

    std::string to_text() const;
};

DriftReport describe(const TemporalDataset& dataset);

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

/// Pronounceable pseudo-word for a pool index; distinct indices below `pool`
/// give distinct words, and neighbouring indices share no obvious affixes.
std::string pseudo_word(std::size_t index, std::size_t pool);

}// namespace tempdrift
