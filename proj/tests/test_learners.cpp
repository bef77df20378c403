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
#include "tempdrift/external.hpp"
#include "tempdrift/learners.hpp"

#include <gtest/gtest.h>

using namespace tempdrift;

namespace {

TrainRequest request_for(const std::vector<Record>& train, const std::vector<Record>& dev, Task task,
                         const std::vector<std::string>& inventory, const std::string& metric) {
    TrainRequest req;
    req.task = task;
    req.metric = TaskMetric::parse(metric);
    req.inventory = inventory;
    req.train = train;
    req.dev = dev;
    req.seed = 7;
    req.training_split = 1;
    return req;
}

std::vector<Record> tagging_records(std::size_t count, std::uint64_t seed) {
    DriftConfig cfg;
    cfg.task = Task::SequenceLabeling;
    cfg.classes = {"LOC", "ORG", "PER"};
    cfg.periods = 3;
    cfg.records_per_period = (count + 2) / 3;
    cfg.indicative_size = 15;
    cfg.vocab_size = 400;
    cfg.churn = 0.0;
    cfg.signal_rate = 0.2;
    cfg.seed = seed;
    auto records = generate(cfg).records;
    records.resize(count);
    return records;
}

void expect_valid_bio(const std::vector<std::string>& tags, const std::vector<std::string>& types) {
    for (const auto& t : tags) {
        if (t == "O") {
            continue;
        }
        ASSERT_TRUE(t.rfind("B-", 0) == 0 || t.rfind("I-", 0) == 0) << t;
        EXPECT_NE(std::find(types.begin(), types.end(), t.substr(2)), types.end()) << t;
    }
}

TrainerSpec mock_spec(const std::string& flags = "", int timeout_ms = 20000) {
    auto spec = TrainerSpec::parse("external:" + testutil::mock_trainer() + (flags.empty() ? "" : " " + flags));
    spec.timeout = std::chrono::milliseconds(timeout_ms);
    return spec;
}

}// namespace

TEST(TrainerSpecParse, KnownKindsAndErrors) {
    EXPECT_EQ(TrainerSpec::parse("builtin-classifier").kind, TrainerKind::BuiltinClassifier);
    EXPECT_EQ(TrainerSpec::parse("builtin-tagger").kind, TrainerKind::BuiltinTagger);
    auto ext = TrainerSpec::parse("external:python3 t.py --x");
    EXPECT_EQ(ext.kind, TrainerKind::External);
    EXPECT_EQ(ext.command, "python3 t.py --x");
    EXPECT_EQ(ext.to_string(), "external:python3 t.py --x");
    EXPECT_THROW(TrainerSpec::parse("external:  "), UsageError);
    EXPECT_THROW(TrainerSpec::parse("svm"), UsageError);
}

// --- built-in classifier ------------------------------------------------------------

TEST(Classifier, LearnsSeparableData) {
    const auto train = testutil::separable_records(200, 1, 1);
    const auto dev = testutil::separable_records(40, 1, 2, "d");
    const auto test = testutil::separable_records(100, 1, 3, "t");
    const std::vector<std::string> inv = {"neg", "pos"};
    auto model = tempdrift::train(TrainerSpec::parse("builtin-classifier"),
                                  request_for(train, dev, Task::Classification, inv, "macro-f1"));
    EXPECT_DOUBLE_EQ(model.dev_score, 1.0);
    EXPECT_DOUBLE_EQ(score_model(model, TaskMetric::parse("macro-f1"), test, inv).value, 1.0);
    EXPECT_DOUBLE_EQ(score_model(model, TaskMetric::parse("class-f1:pos"), test, inv).value, 1.0);
    EXPECT_EQ(model.transcript, std::vector<std::string>{"train(d_1)"});
}

TEST(Classifier, DeterministicArtifactBytes) {
    const auto train = testutil::separable_records(120, 1, 4);
    const auto dev = testutil::separable_records(30, 1, 5, "d");
    const std::vector<std::string> inv = {"neg", "pos"};
    const auto spec = TrainerSpec::parse("builtin-classifier");
    auto req = request_for(train, dev, Task::Classification, inv, "macro-f1");
    const auto a = tempdrift::train(spec, req);
    const auto b = tempdrift::train(spec, req);
    EXPECT_EQ(a.bytes(), b.bytes());
    req.seed = 8;
    const auto c = tempdrift::train(spec, req);
    EXPECT_EQ(c.seed, 8);
    EXPECT_NE(a.bytes(), c.bytes());
}

TEST(Classifier, ShuffledLabelsStayNearChance) {
    DriftConfig cfg;
    cfg.periods = 3;
    cfg.records_per_period = 500;
    cfg.churn = 0.0;
    cfg.seed = 3;
    auto records = generate(cfg).records;
    std::mt19937 gen(17);
    std::vector<std::string> labels;
    for (const auto& r : records) {
        labels.push_back(std::get<std::string>(r.label));
    }
    std::shuffle(labels.begin(), labels.end(), gen);
    for (std::size_t i = 0; i < records.size(); ++i) {
        records[i].label = labels[i];
    }
    const std::vector<Record> train(records.begin(), records.begin() + 900);
    const std::vector<Record> dev(records.begin() + 900, records.begin() + 1100);
    const std::vector<Record> test(records.begin() + 1100, records.end());
    const auto inv = cfg.classes;
    auto model = tempdrift::train(TrainerSpec::parse("builtin-classifier"),
                                  request_for(train, dev, Task::Classification, inv, "macro-f1"));
    const double f1 = score_model(model, TaskMetric::parse("macro-f1"), test, inv).value;
    EXPECT_LT(f1, 0.45) << "three balanced classes; chance macro-F1 is about 1/3";
}

TEST(Classifier, RequestErrors) {
    const auto train = testutil::separable_records(20, 1, 1);
    const std::vector<std::string> inv = {"neg", "pos"};
    const auto spec = TrainerSpec::parse("builtin-classifier");
    EXPECT_THROW(tempdrift::train(spec, request_for(train, {}, Task::Classification, inv, "macro-f1")), UsageError);
    EXPECT_THROW(tempdrift::train(spec, request_for({}, train, Task::Classification, inv, "macro-f1")), UsageError);
    EXPECT_THROW(tempdrift::train(spec, request_for(train, train, Task::Classification, inv, "span-micro-f1")),
                 UsageError);
    EXPECT_THROW(tempdrift::train(spec, request_for(train, train, Task::Classification, inv, "class-f1:maybe")),
                 UsageError);
    auto bad_hp = spec;
    bad_hp.hyperparameters["epochs"] = "ten";
    EXPECT_THROW(tempdrift::train(bad_hp, request_for(train, train, Task::Classification, inv, "macro-f1")),
                 UsageError);
}

TEST(Classifier, NoPretrainPhase) {
    auto learner = make_learner(TrainerSpec::parse("builtin-classifier"));
    EXPECT_FALSE(learner->capabilities().supports_pretrain_phase);
    std::vector<UnlabeledRecord> texts = {{"x", 1, {"a"}}};
    EXPECT_THROW(learner->pretrain(nullptr, texts, 1), UnsupportedCapability);
}

// --- built-in tagger ------------------------------------------------------------------

TEST(Tagger, LearnsEntitiesAndEmitsValidBio) {
    const auto records = tagging_records(500, 11);
    const std::vector<Record> train(records.begin(), records.begin() + 300);
    const std::vector<Record> dev(records.begin() + 300, records.begin() + 380);
    const std::vector<Record> test(records.begin() + 380, records.end());
    const std::vector<std::string> types = {"LOC", "ORG", "PER"};
    auto model = tempdrift::train(TrainerSpec::parse("builtin-tagger"),
                                  request_for(train, dev, Task::SequenceLabeling, types, "span-micro-f1"));
    EXPECT_EQ(model.labels, bio_tag_set(types));
    const auto preds = predict(model, test);
    ASSERT_EQ(preds.size(), test.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const auto& tags = std::get<TagSequence>(preds[i]);
        ASSERT_EQ(tags.size(), test[i].tokens.size());
        expect_valid_bio(tags, types);
        // Constrained decoding never emits an I- tag that does not continue its type.
        for (std::size_t k = 0; k < tags.size(); ++k) {
            if (tags[k].rfind("I-", 0) == 0) {
                ASSERT_GT(k, 0u);
                EXPECT_EQ(tags[k - 1].substr(2), tags[k].substr(2));
            }
        }
    }
    EXPECT_GT(score_model(model, TaskMetric::parse("span-micro-f1"), test, types).value, 0.8);
}

TEST(Tagger, DeterministicAndTaskChecked) {
    const auto records = tagging_records(120, 5);
    const std::vector<Record> train(records.begin(), records.begin() + 90);
    const std::vector<Record> dev(records.begin() + 90, records.end());
    const std::vector<std::string> types = {"LOC", "ORG", "PER"};
    const auto spec = TrainerSpec::parse("builtin-tagger");
    const auto req = request_for(train, dev, Task::SequenceLabeling, types, "span-micro-f1");
    EXPECT_EQ(tempdrift::train(spec, req).bytes(), tempdrift::train(spec, req).bytes());
    EXPECT_THROW(tempdrift::train(TrainerSpec::parse("builtin-classifier"), req), UsageError);
    const auto cls = testutil::separable_records(20, 1, 1);
    EXPECT_THROW(tempdrift::train(spec, request_for(cls, cls, Task::SequenceLabeling, types, "span-micro-f1")),
                 UsageError);
}

// --- external trainer over the line protocol ----------------------------------------

TEST(External, TrainPredictAndCapabilities) {
    const auto train = testutil::separable_records(60, 1, 1);
    const auto dev = testutil::separable_records(20, 1, 2, "d");
    const auto test = testutil::separable_records(40, 1, 3, "t");
    const std::vector<std::string> inv = {"neg", "pos"};
    auto learner = make_learner(mock_spec());
    EXPECT_TRUE(learner->capabilities().supports_pretrain_phase);
    auto model = learner->train(request_for(train, dev, Task::Classification, inv, "macro-f1"));
    EXPECT_FALSE(model.parameters.empty());
    EXPECT_EQ(model.transcript, std::vector<std::string>{"train(d_1)"});
    EXPECT_DOUBLE_EQ(score_model(model, TaskMetric::parse("macro-f1"), test, inv).value, 1.0);
    EXPECT_EQ(model.process->sent_ops(), (std::vector<std::string>{"hello", "train", "predict"}));
}

TEST(External, RequestsCarryIdsAndPayload) {
    const auto log = testutil::scratch("external_log") / "requests.jsonl";
    const auto train = testutil::separable_records(10, 1, 1);
    auto learner = make_learner(mock_spec("--log " + log.string()));
    auto model = learner->train(request_for(train, train, Task::Classification, {"neg", "pos"}, "macro-f1"));
    (void)predict(model, train);
    std::istringstream in(testutil::slurp(log));
    std::string line;
    std::vector<nlohmann::json> sent;
    while (std::getline(in, line)) {
        sent.push_back(nlohmann::json::parse(line));
    }
    ASSERT_EQ(sent.size(), 3u);
    for (std::size_t i = 0; i < sent.size(); ++i) {
        EXPECT_EQ(sent[i]["id"], static_cast<int>(i + 1));
    }
    EXPECT_EQ(sent[1]["op"], "train");
    EXPECT_EQ(sent[1]["task"], "classification");
    EXPECT_EQ(sent[1]["metric"], "macro-f1");
    EXPECT_EQ(sent[1]["train"].size(), 10u);
    EXPECT_EQ(sent[1]["seed"], 7);
    EXPECT_EQ(sent[2]["op"], "predict");
    EXPECT_FALSE(sent[2]["records"][0].contains("label")) << "labels must not be sent for prediction";
}

TEST(External, WrongLabelCountNamesTheRequest) {
    const auto train = testutil::separable_records(10, 1, 1);
    auto learner = make_learner(mock_spec("--wrong-count"));
    auto model = learner->train(request_for(train, train, Task::Classification, {"neg", "pos"}, "macro-f1"));
    try {
        (void)predict(model, train);
        FAIL() << "expected ProtocolError";
    } catch (const ProtocolError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("request 3 (predict)"), std::string::npos) << msg;
        EXPECT_NE(msg.find("labels for 10 records"), std::string::npos) << msg;
    }
}

TEST(External, CrashSurfacesExitStatusAndStderr) {
    const auto train = testutil::separable_records(10, 1, 1);
    auto learner = make_learner(mock_spec("--crash-on train"));
    try {
        (void)learner->train(request_for(train, train, Task::Classification, {"neg", "pos"}, "macro-f1"));
        FAIL() << "expected TrainerError";
    } catch (const TrainerError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("exited with status 3"), std::string::npos) << msg;
        EXPECT_NE(msg.find("simulated crash on train"), std::string::npos) << msg;
    }
}

TEST(External, TimeoutIsATrainerError) {
    EXPECT_THROW(make_learner(mock_spec("--sleep-ms 3000", 300)), TrainerError);
}

TEST(External, MalformedResponsesAreProtocolErrors) {
    EXPECT_THROW(make_learner(mock_spec("--garbage")), ProtocolError);
    EXPECT_THROW(make_learner(mock_spec("--bad-id")), ProtocolError);
    EXPECT_THROW(make_learner(TrainerSpec::parse("external:true")), TrainerError);
}

TEST(External, ErrorResponsesAreTrainerErrors) {
    const auto train = testutil::separable_records(10, 1, 1);
    auto learner = make_learner(mock_spec("--fail-train"));
    try {
        (void)learner->train(request_for(train, train, Task::Classification, {"neg", "pos"}, "macro-f1"));
        FAIL() << "expected TrainerError";
    } catch (const ProtocolError&) {
        FAIL() << "an error response is not a protocol violation";
    } catch (const TrainerError& e) {
        EXPECT_NE(std::string(e.what()).find("request 2 (train) failed"), std::string::npos) << e.what();
    }
}

TEST(External, PretrainCapabilityIsChecked) {
    auto learner = make_learner(mock_spec("--no-pretrain"));
    EXPECT_FALSE(learner->capabilities().supports_pretrain_phase);
    std::vector<UnlabeledRecord> texts = {{"x", 1, {"a", "b"}}};
    EXPECT_THROW(learner->pretrain(nullptr, texts, 1), UnsupportedCapability);
}

TEST(External, ContinuedTrainingReferencesThePretrainedModel) {
    const auto log = testutil::scratch("external_chain") / "requests.jsonl";
    const auto train = testutil::separable_records(10, 1, 1);
    auto learner = make_learner(mock_spec("--log " + log.string()));
    std::vector<UnlabeledRecord> texts = strip_labels(testutil::separable_records(10, 2, 9));
    auto base = learner->train(request_for(train, train, Task::Classification, {"neg", "pos"}, "macro-f1"));
    auto adapted = learner->pretrain(&base, texts, 1);
    EXPECT_NE(adapted.parameters, base.parameters);
    auto req = request_for(train, train, Task::Classification, {"neg", "pos"}, "macro-f1");
    req.init = &adapted;
    auto final_model = learner->train(req);
    EXPECT_EQ(final_model.transcript, (std::vector<std::string>{"train(d_1)", "train(d_1)"}));

    std::istringstream in(testutil::slurp(log));
    std::string line;
    std::vector<nlohmann::json> sent;
    while (std::getline(in, line)) {
        sent.push_back(nlohmann::json::parse(line));
    }
    ASSERT_EQ(sent.size(), 4u);
    EXPECT_EQ(sent[2]["op"], "pretrain");
    EXPECT_EQ(sent[2]["model_id"], base.parameters);
    EXPECT_EQ(sent[2]["texts"].size(), 10u);
    EXPECT_EQ(sent[3]["init_model_id"], adapted.parameters);
}
