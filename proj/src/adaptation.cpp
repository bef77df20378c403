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
#include "tempdrift/adaptation.hpp"

#include "tempdrift/errors.hpp"
#include "tempdrift/pool.hpp"
#include "tempdrift/rng.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

namespace tempdrift {

AdaptMethod parse_adapt_method(const std::string& text) {
    if (text == "gold") {
        return AdaptMethod::GoldRetrain;
    }
    if (text == "self-label") {
        return AdaptMethod::SelfLabel;
    }
    if (text == "self-label-cumulative") {
        return AdaptMethod::SelfLabelCumulative;
    }
    if (text == "pretrain-ft") {
        return AdaptMethod::PretrainThenFinetune;
    }
    if (text == "ft-pretrain-ft") {
        return AdaptMethod::FinetunePretrainFinetune;
    }
    throw UsageError("unknown adaptation method '" + text
                     + "' (expected gold, self-label, self-label-cumulative, pretrain-ft or ft-pretrain-ft)");
}

std::string to_string(AdaptMethod method) {
    switch (method) {
        case AdaptMethod::GoldRetrain: return "gold";
        case AdaptMethod::SelfLabel: return "self-label";
        case AdaptMethod::SelfLabelCumulative: return "self-label-cumulative";
        case AdaptMethod::PretrainThenFinetune: return "pretrain-ft";
        case AdaptMethod::FinetunePretrainFinetune: return "ft-pretrain-ft";
    }
    return {};
}

std::string display_name(AdaptMethod method) {
    switch (method) {
        case AdaptMethod::GoldRetrain: return "Gold";
        case AdaptMethod::SelfLabel: return "Self-Label";
        case AdaptMethod::SelfLabelCumulative: return "Self-Label (cumulative)";
        case AdaptMethod::PretrainThenFinetune: return "Pretrain";
        case AdaptMethod::FinetunePretrainFinetune: return "FT-Pretrain-FT";
    }
    return {};
}

void AdaptationJob::validate(int n) const {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw UsageError("adaptation fraction must lie in (0, 1], got " + std::to_string(fraction));
    }
    if (target <= source) {
        throw UsageError("adaptation target split " + std::to_string(target) + " must come after source split "
                         + std::to_string(source));
    }
    if (source < 1 || target > n - 1) {
        throw UsageError("adaptation needs 1 <= source < target <= " + std::to_string(n - 1)
                         + " so the adapted model still has future test splits");
    }
}

std::size_t portion_size(std::size_t split_size, double fraction) {
    auto k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(split_size) + 0.5));
    return std::clamp<std::size_t>(k, 1, split_size);
}

std::vector<std::size_t> portion_indices(std::size_t split_size, double fraction, std::int64_t seed, int split) {
    const auto k = portion_size(split_size, fraction);
    if (k == split_size) {
        std::vector<std::size_t> all(split_size);
        for (std::size_t i = 0; i < split_size; ++i) {
            all[i] = i;
        }
        return all;
    }
    Rng rng(derive_seed(static_cast<std::uint64_t>(seed), "self-label-sample", static_cast<std::uint64_t>(split)));
    return rng.sample_indices(split_size, k);
}

std::vector<UnlabeledRecord> unlabeled_split(const AdaptationData& data, int t) {
    return strip_labels(split_records(data.dataset, data.plan, t));
}

namespace {

TrainRequest request_for(const AdaptationData& data, const std::vector<Record>& train, const std::vector<Record>& dev,
                         std::int64_t seed, int split) {
    TrainRequest req;
    req.task = data.dataset.task;
    req.metric = data.metric;
    req.inventory = data.dataset.label_inventory;
    req.train = train;
    req.dev = dev;
    req.seed = seed;
    req.training_split = split;
    return req;
}

/// Labels the seeded portion of split t. Only label-stripped records reach the labeler.
std::vector<Record> self_labeled_portion(const AdaptationData& data, int t, double fraction, std::int64_t seed,
                                         const ModelArtifact& base, const Labeler* labeler) {
    const auto unlabeled = unlabeled_split(data, t);
    std::vector<UnlabeledRecord> chosen;
    for (auto idx : portion_indices(unlabeled.size(), fraction, seed, t)) {
        chosen.push_back(unlabeled[idx]);
    }
    const auto labels = labeler ? (*labeler)(chosen) : predict(base, std::span<const UnlabeledRecord>(chosen));
    if (labels.size() != chosen.size()) {
        throw TrainerError("labeler returned " + std::to_string(labels.size()) + " labels for " + std::to_string(chosen.size())
                           + " records");
    }
    std::vector<Record> out;
    out.reserve(chosen.size());
    for (std::size_t i = 0; i < chosen.size(); ++i) {
        Record r;
        r.id = chosen[i].id;
        r.timestamp = chosen[i].timestamp;
        r.tokens = chosen[i].tokens;
        r.label = labels[i];
        r.origin = LabelOrigin::Predicted;
        out.push_back(std::move(r));
    }
    return out;
}

ModelArtifact train_base(const AdaptationJob& job, const AdaptationData& data, Learner& learner,
                         const SplitViews& source) {
    return learner.train(request_for(data, source.train, source.dev, job.seed, job.source));
}

AdaptationResult finish(const AdaptationJob& job, const AdaptationData& data, Learner& learner, const SplitViews& source,
                        const std::vector<std::vector<Record>>& extra) {
    AdaptationResult res;
    res.training_set = source.train;
    for (const auto& part : extra) {
        for (const auto& r : part) {
            res.self_labeled_count += r.origin == LabelOrigin::Predicted ? 1 : 0;
            res.training_set.push_back(r);
        }
    }
    res.gold_count = res.training_set.size() - res.self_labeled_count;
    res.model = learner.train(request_for(data, res.training_set, source.dev, job.seed, job.source));
    return res;
}

}// namespace

AdaptationResult self_label_adapt(const AdaptationJob& job, const AdaptationData& data, Learner& learner,
                                  const ModelArtifact* base, const Labeler* labeler) {
    job.validate(data.plan.n);
    const auto source = materialize_split(data.dataset, data.plan, job.source, data.plan.seed);
    std::optional<ModelArtifact> own_base;
    if (base == nullptr && labeler == nullptr) {
        own_base = train_base(job, data, learner, source);
        base = &*own_base;
    }
    const ModelArtifact empty;
    auto portion = self_labeled_portion(data, job.target, job.fraction, job.seed, base ? *base : empty, labeler);
    return finish(job, data, learner, source, {portion});
}

AdaptationResult cumulative_self_label_adapt(const AdaptationJob& job, const AdaptationData& data, Learner& learner,
                                             const ModelArtifact* base, const Labeler* labeler) {
    job.validate(data.plan.n);
    if (job.source != 1) {
        throw UsageError("cumulative self-labeling starts from the first split");
    }
    const auto source = materialize_split(data.dataset, data.plan, job.source, data.plan.seed);
    std::optional<ModelArtifact> own_base;
    if (base == nullptr && labeler == nullptr) {
        own_base = train_base(job, data, learner, source);
        base = &*own_base;
    }
    const ModelArtifact empty;
    std::vector<std::vector<Record>> parts;
    for (int t = job.source + 1; t <= job.target; ++t) {
        parts.push_back(self_labeled_portion(data, t, job.fraction, job.seed, base ? *base : empty, labeler));
    }
    return finish(job, data, learner, source, parts);
}

AdaptationResult gold_mixture_retrain(const AdaptationJob& job, const AdaptationData& data, Learner& learner) {
    job.validate(data.plan.n);
    const auto source = materialize_split(data.dataset, data.plan, job.source, data.plan.seed);
    const auto gold = split_records(data.dataset, data.plan, job.target);
    std::vector<Record> portion;
    for (auto idx : portion_indices(gold.size(), job.fraction, job.seed, job.target)) {
        portion.push_back(gold[idx]);
    }
    return finish(job, data, learner, source, {portion});
}

AdaptationResult continual_pretrain_adapt(const AdaptationJob& job, const AdaptationData& data, Learner& learner) {
    job.validate(data.plan.n);
    if (job.method != AdaptMethod::PretrainThenFinetune && job.method != AdaptMethod::FinetunePretrainFinetune) {
        throw UsageError("continual pre-training needs method pretrain-ft or ft-pretrain-ft");
    }
    if (!learner.capabilities().supports_pretrain_phase) {
        throw UnsupportedCapability("trainer " + job.trainer.to_string() + " does not support a pre-training phase");
    }
    const auto source = materialize_split(data.dataset, data.plan, job.source, data.plan.seed);
    const auto texts = unlabeled_split(data, job.target);
    const std::string phase = "pretrain(d_" + std::to_string(job.target) + ")";

    ModelArtifact pretrained;
    if (job.method == AdaptMethod::PretrainThenFinetune) {
        pretrained = learner.pretrain(nullptr, texts, job.seed);
        pretrained.transcript = {phase};
    } else {
        const auto first = train_base(job, data, learner, source);
        pretrained = learner.pretrain(&first, texts, job.seed);
        pretrained.transcript = first.transcript;
        pretrained.transcript.push_back(phase);
    }
    auto req = request_for(data, source.train, source.dev, job.seed, job.source);
    req.init = &pretrained;
    AdaptationResult res;
    res.model = learner.train(req);
    res.training_set = source.train;
    res.gold_count = source.train.size();
    return res;
}

AdaptationResult adapt(const AdaptationJob& job, const AdaptationData& data, Learner& learner, const ModelArtifact* base) {
    switch (job.method) {
        case AdaptMethod::GoldRetrain: {
            job.validate(data.plan.n);
            const auto target = materialize_split(data.dataset, data.plan, job.target, data.plan.seed);
            AdaptationResult res;
            res.model = learner.train(request_for(data, target.train, target.dev, job.seed, job.target));
            res.training_set = target.train;
            res.gold_count = target.train.size();
            return res;
        }
        case AdaptMethod::SelfLabel: return self_label_adapt(job, data, learner, base);
        case AdaptMethod::SelfLabelCumulative: return cumulative_self_label_adapt(job, data, learner, base);
        case AdaptMethod::PretrainThenFinetune:
        case AdaptMethod::FinetunePretrainFinetune: return continual_pretrain_adapt(job, data, learner);
    }
    throw UsageError("unknown adaptation method");
}

AdaptationGridResult adaptation_grid(const AdaptationData& data, const AdaptationGridOptions& options) {
    const int n = data.plan.n;
    if (options.seeds.empty()) {
        throw UsageError("adaptation grid needs at least one seed");
    }
    check_metric(data.metric, data.dataset.task, data.dataset.label_inventory);
    AdaptationGridResult out{EvaluationGrid(n, options.seeds), std::nullopt};
    std::mutex mu;
    std::vector<std::vector<Record>> tests(static_cast<std::size_t>(n) + 1);
    for (int k = 2; k <= n; ++k) {
        tests[static_cast<std::size_t>(k)] = split_records(data.dataset, data.plan, k);
    }

    auto score_column = [&](const ModelArtifact& model, int column, std::int64_t seed) {
        for (int k = column + 1; k <= n; ++k) {
            auto mv = score_model(model, data.metric, tests[static_cast<std::size_t>(k)], data.dataset.label_inventory);
            std::lock_guard lock(mu);
            out.grid.set(column, k, seed, mv.value, mv.total);
        }
    };
    auto fail_column = [&](int column, std::int64_t seed, const std::string& why) {
        std::lock_guard lock(mu);
        for (int k = column + 1; k <= n; ++k) {
            out.grid.mark_failed(column, k, seed, why);
        }
    };

    parallel_for(options.seeds.size(), options.workers, [&](std::size_t u) {
        const auto seed = options.seeds[u];
        std::unique_ptr<Learner> learner;
        std::optional<ModelArtifact> gold;
        try {
            learner = make_learner(options.trainer);
            const auto source = materialize_split(data.dataset, data.plan, 1, data.plan.seed);
            TrainRequest req = request_for(data, source.train, source.dev, seed, 1);
            gold = learner->train(req);
            score_column(*gold, 1, seed);
        } catch (const TrainerError& e) {
            for (int col = 1; col <= n - 1; ++col) {
                fail_column(col, seed, e.what());
            }
            return;
        }
        for (int j = 2; j <= n - 1; ++j) {
            AdaptationJob job{options.method, 1, j, options.fraction, options.trainer, seed};
            try {
                auto res = adapt(job, data, *learner, &*gold);
                score_column(res.model, j, seed);
            } catch (const TrainerError& e) {
                fail_column(j, seed, e.what());
            }
        }
    });
    if (out.grid.complete()) {
        out.summary = summarize(out.grid, options.summary);
    }
    return out;
}

}// namespace tempdrift
