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
#include "test_util.hpp"

#include "tempdrift/drift_sim.hpp"
#include "tempdrift/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace tempdrift;

namespace {

DriftConfig small(double churn, std::uint64_t seed = 1) {
    DriftConfig cfg;
    cfg.periods = 5;
    cfg.records_per_period = 300;
    cfg.churn = churn;
    cfg.seed = seed;
    return cfg;
}

std::string dump(const TemporalDataset& ds) {
    std::ostringstream out;
    emit(out, ds);
    return out.str();
}

}// namespace

TEST(DriftSim, ZeroChurnKeepsIndicativeSets) {
    auto corpus = generate_corpus(small(0.0));
    ASSERT_EQ(corpus.indicative.size(), 5u);
    for (std::size_t t = 1; t < 5; ++t) {
        EXPECT_EQ(corpus.indicative[t], corpus.indicative[0]);
    }
}

TEST(DriftSim, FullChurnGivesDisjointSets) {
    auto cfg = small(1.0);
    cfg.vocab_size = cfg.required_vocab_size();
    auto corpus = generate_corpus(cfg);
    std::set<std::string> seen;
    for (const auto& period : corpus.indicative) {
        for (const auto& words : period) {
            for (const auto& w : words) {
                EXPECT_TRUE(seen.insert(w).second) << w << " reused";
            }
        }
    }
}

TEST(DriftSim, ConsecutiveOverlapFollowsChurn) {
    for (double churn : {0.1, 0.3, 0.5}) {
        auto cfg = small(churn);
        auto corpus = generate_corpus(cfg);
        const double r = std::floor(churn * static_cast<double>(cfg.indicative_size) + 0.5);
        const double k = static_cast<double>(cfg.indicative_size);
        const double expected = (k - r) / (k + r);// ~ (1 - c) / (1 + c)
        for (std::size_t t = 1; t < corpus.indicative.size(); ++t) {
            for (std::size_t c = 0; c < cfg.classes.size(); ++c) {
                EXPECT_EQ(corpus.indicative[t][c].size(), cfg.indicative_size);
                EXPECT_NEAR(jaccard(corpus.indicative[t - 1][c], corpus.indicative[t][c]), expected, 1e-12);
            }
        }
    }
}

TEST(DriftSim, IndicativeWordsSignalTheirClass) {
    auto corpus = generate_corpus(small(0.3));
    const auto& ds = corpus.dataset;
    std::size_t hits = 0, right = 0;
    for (const auto& r : ds.records) {
        const auto t = static_cast<std::size_t>(r.timestamp - 2014);
        const auto& label = std::get<std::string>(r.label);
        for (const auto& tok : r.tokens) {
            for (std::size_t c = 0; c < ds.label_inventory.size(); ++c) {
                if (corpus.indicative[t][c].contains(tok)) {
                    ++hits;
                    right += ds.label_inventory[c] == label ? 1 : 0;
                }
            }
        }
    }
    ASSERT_GT(hits, 0u);
    EXPECT_EQ(right, hits);
}

TEST(DriftSim, ShapeAndValidity) {
    auto cfg = small(0.3);
    auto ds = generate(cfg);
    EXPECT_EQ(ds.records.size(), 1500u);
    EXPECT_TRUE(validate(ds).empty());
    EXPECT_EQ(ds.period_range.first, 2014);
    EXPECT_EQ(ds.period_range.last, 2018);
    for (const auto& r : ds.records) {
        EXPECT_GE(r.tokens.size(), cfg.min_tokens);
        EXPECT_LE(r.tokens.size(), cfg.max_tokens);
    }

    auto tag_cfg = small(0.3);
    tag_cfg.task = Task::SequenceLabeling;
    tag_cfg.classes = {"LOC", "PER"};
    auto tags = generate(tag_cfg);
    EXPECT_TRUE(validate(tags).empty());
    EXPECT_EQ(tags.label_inventory, (std::vector<std::string>{"LOC", "PER"}));
}

TEST(DriftSim, SeedDeterminism) {
    EXPECT_EQ(dump(generate(small(0.3, 5))), dump(generate(small(0.3, 5))));
    EXPECT_NE(dump(generate(small(0.3, 5))), dump(generate(small(0.3, 6))));
}

TEST(DriftSim, PriorDriftShiftsLabelShares) {
    auto cfg = small(0.0);
    cfg.records_per_period = 2000;
    cfg.label_prior_drift = 0.5;
    auto rep = describe(generate(cfg));
    // negative (first class) loses share over time, positive (last) gains.
    EXPECT_GT(rep.label_prior.front()[0], rep.label_prior.back()[0] + 0.1);
    EXPECT_LT(rep.label_prior.front()[2] + 0.1, rep.label_prior.back()[2]);
}

TEST(DriftSim, DescribeReport) {
    auto rep = describe(generate(small(0.3)));
    EXPECT_EQ(rep.periods, (std::vector<std::int64_t>{2014, 2015, 2016, 2017, 2018}));
    EXPECT_EQ(rep.record_counts, std::vector<std::size_t>(5, 300));
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_DOUBLE_EQ(rep.overlap[i][i], 1.0);
        double sum = 0;
        for (double p : rep.label_prior[i]) {
            sum += p;
        }
        EXPECT_NEAR(sum, 1.0, 1e-12);
    }
    // Observed overlap decays with distance.
    EXPECT_GT(rep.overlap[0][1], rep.overlap[0][4]);
    const auto text = rep.to_text();
    EXPECT_NE(text.find("Vocabulary overlap"), std::string::npos);
    EXPECT_NE(text.find("| 2014 | 300 |"), std::string::npos);
}

TEST(DriftSim, ConfigValidation) {
    auto cfg = small(0.3);
    cfg.vocab_size = cfg.required_vocab_size() - 1;
    try {
        cfg.validate();
        FAIL() << "expected UsageError";
    } catch (const UsageError& e) {
        EXPECT_NE(std::string(e.what()).find(std::to_string(cfg.required_vocab_size())), std::string::npos);
    }
    auto bad = small(1.5);
    EXPECT_THROW(bad.validate(), UsageError);
    auto few = small(0.3);
    few.periods = 2;
    EXPECT_THROW(few.validate(), UsageError);

    std::istringstream text("churn = 0.2\nperiods=4\nclasses=a,b\n");
    auto kv = KeyValueConfig::parse(text);
    auto from = DriftConfig::from_config(kv);
    EXPECT_DOUBLE_EQ(from.churn, 0.2);
    EXPECT_EQ(from.periods, 4);
    EXPECT_EQ(from.classes, (std::vector<std::string>{"a", "b"}));
    std::istringstream typo("chrun=0.2\n");
    EXPECT_THROW(DriftConfig::from_config(KeyValueConfig::parse(typo)), UsageError);
}

TEST(DriftSim, PseudoWordsAreDistinct) {
    std::set<std::string> words;
    for (std::size_t i = 0; i < 5000; ++i) {
        words.insert(pseudo_word(i, 5000));
    }
    EXPECT_EQ(words.size(), 5000u);
}
