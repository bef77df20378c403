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

#include <gtest/gtest.h>

namespace fs = std::filesystem;
using testutil::run;

namespace {

std::string cli() {
    return testutil::cli();
}

/// Small simulated corpus shared by the CLI tests.
fs::path corpus() {
    static const fs::path path = [] {
        auto dir = testutil::scratch("cli_corpus");
        auto res = run(cli() + " simulate --out " + dir.string()
                       + " --set periods=4 --set records_per_period=120 --set vocab_size=600 --set indicative_size=15");
        EXPECT_EQ(res.exit_code, 0) << res.output;
        return dir / "corpus.jsonl";
    }();
    return path;
}

std::string grid_args(const fs::path& out) {
    return " --dataset " + corpus().string() + " --metric macro-f1 --seeds 1,2 --out " + out.string();
}

}// namespace

TEST(Cli, SimulateWritesCorpusAndReport) {
    const auto dir = corpus().parent_path();
    EXPECT_TRUE(fs::exists(dir / "drift.md"));
    EXPECT_NE(testutil::slurp(dir / "drift.md").find("Vocabulary overlap"), std::string::npos);
}

TEST(Cli, SplitPrintsSizes) {
    auto out = testutil::scratch("cli_split");
    auto res = run(cli() + " split --dataset " + corpus().string() + " --metric macro-f1 --out " + out.string());
    EXPECT_EQ(res.exit_code, 0) << res.output;
    EXPECT_NE(res.output.find("splits: 4, records per split: 120, train/dev: 96/24"), std::string::npos) << res.output;
    EXPECT_TRUE(fs::exists(out / "plan.json"));
}

TEST(Cli, RunGridThenSummarizeAgree) {
    auto out = testutil::scratch("cli_grid");
    auto res = run(cli() + " run-grid" + grid_args(out));
    ASSERT_EQ(res.exit_code, 0) << res.output;
    auto sum = run(cli() + " summarize " + (out / "grid.csv").string());
    ASSERT_EQ(sum.exit_code, 0) << sum.output;
    // run-grid also logs progress; its last line is the summary row.
    EXPECT_NE(res.output.find(sum.output), std::string::npos) << res.output << "\n---\n" << sum.output;
}

TEST(Cli, RenderMatrixMatchesGolden) {
    auto res = run(cli() + " render-matrix " + (testutil::data_dir() / "ref_glove.csv").string());
    EXPECT_EQ(res.exit_code, 0);
    EXPECT_EQ(res.output, testutil::slurp(testutil::data_dir() / "ref_glove_matrix.md"));
}

TEST(Cli, UsageErrorsExitOne) {
    EXPECT_EQ(run(cli()).exit_code, 1);
    EXPECT_EQ(run(cli() + " frobnicate").exit_code, 1);
    EXPECT_EQ(run(cli() + " run-grid --dataset x.jsonl --metric accuracy").exit_code, 1);
    auto out = testutil::scratch("cli_usage");
    auto bad_method = run(cli() + " adapt" + grid_args(out) + " --method distill");
    EXPECT_EQ(bad_method.exit_code, 1) << bad_method.output;
    EXPECT_NE(bad_method.output.find("unknown adaptation method 'distill'"), std::string::npos);
    EXPECT_EQ(run(cli() + " adapt" + grid_args(out) + " --method self-label --fraction 1.5").exit_code, 1);
    EXPECT_EQ(run(cli() + " adapt" + grid_args(out) + " --method self-label --fraction 0").exit_code, 1);
    EXPECT_EQ(run(cli() + " run-grid" + grid_args(out) + " --trainer svm").exit_code, 1);
    EXPECT_EQ(run(cli() + " simulate --out " + out.string() + " --set churn=2").exit_code, 1);
}

TEST(Cli, DataErrorsExitTwo) {
    auto dir = testutil::scratch("cli_data");
    EXPECT_EQ(run(cli() + " summarize " + (dir / "missing.csv").string()).exit_code, 2);
    testutil::write(dir / "partial.csv", "train_split,test_split,seed,metric_value\n1,2,0,0.5\n1,3,0,0.5\n");
    auto partial = run(cli() + " summarize " + (dir / "partial.csv").string());
    EXPECT_EQ(partial.exit_code, 2);
    EXPECT_NE(partial.output.find("incomplete"), std::string::npos) << partial.output;
    testutil::write(dir / "bad.jsonl", "{\"id\":\"a\",\"timestamp\":1,\"tokens\":[\"x\"],\"label\":\"p\"}\nnot json\n");
    auto bad = run(cli() + " split --dataset " + (dir / "bad.jsonl").string() + " --metric macro-f1 --out "
                   + dir.string());
    EXPECT_EQ(bad.exit_code, 2);
    EXPECT_NE(bad.output.find("line 2"), std::string::npos) << bad.output;
}

TEST(Cli, TrainerFailuresExitThree) {
    auto out = testutil::scratch("cli_trainer");
    auto res = run(cli() + " run-grid" + grid_args(out) + " --trainer 'external:" + testutil::mock_trainer()
                   + " --crash-on train'");
    EXPECT_EQ(res.exit_code, 3) << res.output;
    EXPECT_NE(res.output.find("simulated crash on train"), std::string::npos) << res.output;
    auto adapt = run(cli() + " adapt" + grid_args(testutil::scratch("cli_trainer_adapt")) + " --method pretrain-ft");
    EXPECT_EQ(adapt.exit_code, 3) << adapt.output;
    EXPECT_NE(adapt.output.find("pre-training"), std::string::npos) << adapt.output;
}

TEST(Cli, AdaptPrintsComparisonTable) {
    auto out = testutil::scratch("cli_adapt");
    auto res = run(cli() + " adapt" + grid_args(out) + " --method self-label,self-label-cumulative");
    ASSERT_EQ(res.exit_code, 0) << res.output;
    for (const char* row : {"| Gold |", "| Self-Label |", "| Self-Label (cumulative) |"}) {
        EXPECT_NE(res.output.find(row), std::string::npos) << row << "\n" << res.output;
    }
}
