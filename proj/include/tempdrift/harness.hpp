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

#include "tempdrift/adaptation.hpp"
#include "tempdrift/config.hpp"
#include "tempdrift/grid.hpp"
#include "tempdrift/learners.hpp"
#include "tempdrift/report.hpp"
#include "tempdrift/splitter.hpp"
#include "tempdrift/summary.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace tempdrift {

struct RunConfig {
    std::filesystem::path dataset;
    /// Inferred from the metric when unset (span-micro-f1 means sequence labeling).
    std::optional<Task> task;
    TaskMetric metric;
    int periods_per_split = 1;
    std::vector<std::int64_t> seeds = {1, 2, 3};
    /// Seeds downsampling and the train/dev partition; the run seeds drive training.
    std::uint64_t split_seed = 0;
    /// Defaults to the built-in learner for the task.
    std::optional<TrainerSpec> trainer;
    std::filesystem::path out = "out";
    double alpha = 0.05;
    int decimals = 1;
    int workers = 1;
    std::optional<std::size_t> truncate;

    Task resolved_task() const;
    TrainerSpec resolved_trainer() const;
    ReportFormat report_format() const { return {100.0, decimals, alpha}; }
    /// Throws UsageError on invalid settings.
    void validate() const;

    /// Keys: dataset, task, metric, periods_per_split, seeds, split_seed,
    /// trainer, trainer_timeout_s, hparam.<name>, out, alpha, decimals,
    /// workers, truncate.
    static RunConfig from_config(const KeyValueConfig& config);
};

struct PreparedRun {
    TemporalDataset dataset;
    SplitPlan plan;
    /// Hash of every setting and input byte that can change grid values.
    std::string config_hash;
};

PreparedRun prepare_run(const RunConfig& config);

struct RunGridOptions {
    /// Stop after this many units were trained in this invocation (interruption drill).
    std::optional<std::size_t> max_units;
    std::function<void(const std::string&)> log;
};

struct RunGridStats {
    std::size_t units_total = 0;
    std::size_t units_skipped = 0;
    std::size_t units_trained = 0;
    std::size_t cells_failed = 0;
};

struct RunGridResult {
    EvaluationGrid grid;
    RunGridStats stats;
    std::optional<SummaryScores> summary;
    bool interrupted = false;
};

/// Trains one model per (train split, seed) unit and scores it on every later
/// split. Writes plan.json, grid.csv and grid.meta.json under config.out,
/// rewriting grid.csv after every unit; units already complete in an existing
/// grid with the same config hash are skipped. A complete grid also gets
/// summary.csv, summary.md and matrix.md.
RunGridResult run_grid(const RunConfig& config, const RunGridOptions& options = {});

/// Writes summary.csv, summary.md and matrix.md for a complete grid (matrix.md
/// only, for an incomplete one). Returns the scores when the grid was complete.
std::optional<SummaryScores> write_reports(const EvaluationGrid& grid, const std::filesystem::path& dir,
                                           const std::string& label, const ReportFormat& fmt);

struct AdaptRunResult {
    /// (display name, summary) per method, Gold first.
    std::vector<std::pair<std::string, SummaryScores>> rows;
    std::vector<std::string> failures;
};

/// Runs the gold grid plus one adaptation grid per method. Each goes to
/// out/<method>/ in harness formats; out/adaptation.md holds the comparison
/// table and out/adaptation.csv the per-method summaries.
AdaptRunResult run_adaptation(const RunConfig& config, const std::vector<AdaptMethod>& methods, double fraction,
                              const std::function<void(const std::string&)>& log = {});

/// 16 hex digits of 64-bit FNV-1a.
std::string hash_hex(std::string_view bytes);

}// namespace tempdrift
