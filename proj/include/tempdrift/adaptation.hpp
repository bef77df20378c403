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

#include "tempdrift/grid.hpp"
#include "tempdrift/learners.hpp"
#include "tempdrift/splitter.hpp"
#include "tempdrift/summary.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tempdrift {

enum class AdaptMethod { GoldRetrain, SelfLabel, SelfLabelCumulative, PretrainThenFinetune, FinetunePretrainFinetune };

/// "gold", "self-label", "self-label-cumulative", "pretrain-ft", "ft-pretrain-ft".
AdaptMethod parse_adapt_method(const std::string& text);
std::string to_string(AdaptMethod method);
/// Row label in comparison tables.
std::string display_name(AdaptMethod method);

struct AdaptationJob {
    AdaptMethod method = AdaptMethod::SelfLabel;
    int source = 1;
    int target = 2;
    /// Share of the target split that gets self-labeled, in (0, 1].
    double fraction = 1.0;
    TrainerSpec trainer;
    std::int64_t seed = 0;

    /// Throws UsageError unless 1 <= source < target <= n-1 and fraction is in (0, 1].
    void validate(int n) const;
};

/// Everything an adaptation job reads. Train/dev views use the plan's seed.
struct AdaptationData {
    const TemporalDataset& dataset;
    const SplitPlan& plan;
    TaskMetric metric;
};

/// Replaces the base model as labeler; used for the perfect-labeler check.
using Labeler = std::function<std::vector<Label>(std::span<const UnlabeledRecord>)>;

struct AdaptationResult {
    ModelArtifact model;
    /// Final training mixture in training order: gold train_source first.
    std::vector<Record> training_set;
    std::size_t gold_count = 0;
    std::size_t self_labeled_count = 0;
};

/// round(fraction * split_size), halves up, at least 1.
std::size_t portion_size(std::size_t split_size, double fraction);

/// Indices (increasing) of the seeded uniform portion of split `split` used for self-labeling.
std::vector<std::size_t> portion_indices(std::size_t split_size, double fraction, std::int64_t seed, int split);

/// Split t with labels removed, canonical order.
std::vector<UnlabeledRecord> unlabeled_split(const AdaptationData& data, int t);

/// Base model on (train_i, dev_i) labels a portion of d_j; the final model is
/// trained on train_i plus those records, selecting on dev_i. `base` skips
/// base training when the caller already has it.
AdaptationResult self_label_adapt(const AdaptationJob& job, const AdaptationData& data, Learner& learner,
                                  const ModelArtifact* base = nullptr, const Labeler* labeler = nullptr);

/// As self_label_adapt but every split source+1 ... target is self-labeled.
AdaptationResult cumulative_self_label_adapt(const AdaptationJob& job, const AdaptationData& data, Learner& learner,
                                             const ModelArtifact* base = nullptr, const Labeler* labeler = nullptr);

/// Same mixture as self_label_adapt, with gold labels on the target portion.
AdaptationResult gold_mixture_retrain(const AdaptationJob& job, const AdaptationData& data, Learner& learner);

/// PretrainThenFinetune: pretrain(d_j) then train(d_i).
/// FinetunePretrainFinetune: train(d_i), pretrain(d_j), train(d_i).
AdaptationResult continual_pretrain_adapt(const AdaptationJob& job, const AdaptationData& data, Learner& learner);

/// Dispatches on job.method. GoldRetrain trains on (train_j, dev_j).
AdaptationResult adapt(const AdaptationJob& job, const AdaptationData& data, Learner& learner,
                       const ModelArtifact* base = nullptr);

struct AdaptationGridOptions {
    AdaptMethod method = AdaptMethod::SelfLabel;
    TrainerSpec trainer;
    std::vector<std::int64_t> seeds = {1, 2, 3};
    double fraction = 1.0;
    int workers = 1;
    SummaryOptions summary;
};

struct AdaptationGridResult {
    EvaluationGrid grid;
    /// Absent when a cell failed.
    std::optional<SummaryScores> summary;
};

/// Column 1 holds the gold model trained on d_1; column j (2..n-1) holds the
/// model adapted from split 1 towards split j, scored on rows k > j. With
/// GoldRetrain this is the standard grid.
AdaptationGridResult adaptation_grid(const AdaptationData& data, const AdaptationGridOptions& options);

}// namespace tempdrift
