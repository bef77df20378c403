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
#include "tempdrift/harness.hpp"

#include "tempdrift/errors.hpp"
#include "tempdrift/pool.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>

#include <json.hpp>

namespace tempdrift {

namespace fs = std::filesystem;

std::string hash_hex(std::string_view bytes) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(detail::fnv1a(bytes)));
    return buf;
}

Task RunConfig::resolved_task() const {
    if (task) {
        return *task;
    }
    return metric.kind == TaskMetric::Kind::SpanMicroF1 ? Task::SequenceLabeling : Task::Classification;
}

TrainerSpec RunConfig::resolved_trainer() const {
    if (trainer) {
        return *trainer;
    }
    TrainerSpec spec;
    spec.kind = resolved_task() == Task::Classification ? TrainerKind::BuiltinClassifier : TrainerKind::BuiltinTagger;
    return spec;
}

void RunConfig::validate() const {
    if (dataset.empty()) {
        throw UsageError("no dataset given");
    }
    if (seeds.empty()) {
        throw UsageError("at least one seed is required");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw UsageError("alpha must lie in (0, 1)");
    }
    if (periods_per_split < 1) {
        throw UsageError("periods_per_split must be >= 1");
    }
    if (decimals < 0 || decimals > 6) {
        throw UsageError("decimals must lie in [0, 6]");
    }
    if (workers < 1) {
        throw UsageError("workers must be >= 1");
    }
    if (truncate && *truncate == 0) {
        throw UsageError("truncate must be >= 1");
    }
    if (metric.kind == TaskMetric::Kind::SpanMicroF1 && resolved_task() != Task::SequenceLabeling) {
        throw UsageError("span-micro-f1 needs a sequence-labeling task");
    }
}

RunConfig RunConfig::from_config(const KeyValueConfig& kv) {
    std::set<std::string> known = {"dataset", "task",    "metric", "periods_per_split", "seeds",   "split_seed",
                                   "trainer", "trainer_timeout_s", "out", "alpha", "decimals", "workers", "truncate"};
    for (const auto& [k, v] : kv.values()) {
        if (k.rfind("hparam.", 0) == 0) {
            known.insert(k);
        }
    }
    kv.reject_unknown(known);
    RunConfig c;
    if (auto v = kv.get("dataset")) {
        c.dataset = *v;
    }
    if (auto v = kv.get("task")) {
        c.task = parse_task(*v);
    }
    c.metric = TaskMetric::parse(kv.get_string("metric", "macro-f1"));
    c.periods_per_split = static_cast<int>(kv.get_int("periods_per_split", 1));
    if (auto v = kv.get("seeds")) {
        c.seeds.clear();
        for (const auto& s : split_list(*v)) {
            c.seeds.push_back(parse_int(s, "seeds"));
        }
    }
    c.split_seed = static_cast<std::uint64_t>(kv.get_int("split_seed", 0));
    if (auto v = kv.get("trainer")) {
        c.trainer = TrainerSpec::parse(*v);
    }
    for (const auto& [k, v] : kv.values()) {
        if (k.rfind("hparam.", 0) == 0) {
            if (!c.trainer) {
                c.trainer = c.resolved_trainer();
            }
            c.trainer->hyperparameters[k.substr(7)] = v;
        }
    }
    if (auto v = kv.get("trainer_timeout_s")) {
        if (!c.trainer) {
            c.trainer = c.resolved_trainer();
        }
        c.trainer->timeout = std::chrono::seconds(parse_int(*v, "trainer_timeout_s"));
    }
    c.out = kv.get_string("out", "out");
    c.alpha = kv.get_double("alpha", c.alpha);
    c.decimals = static_cast<int>(kv.get_int("decimals", c.decimals));
    c.workers = static_cast<int>(kv.get_int("workers", c.workers));
    if (kv.has("truncate")) {
        auto t = kv.get_int("truncate", 0);
        if (t < 1) {
            throw UsageError("truncate must be >= 1");
        }
        c.truncate = static_cast<std::size_t>(t);
    }
    return c;
}

PreparedRun prepare_run(const RunConfig& config) {
    config.validate();
    std::ifstream in(config.dataset, std::ios::binary);
    if (!in) {
        throw DataError("cannot open dataset " + config.dataset.string());
    }
    std::ostringstream raw;
    raw << in.rdbuf();
    const std::string bytes = raw.str();

    PreparedRun run;
    std::istringstream parse_in(bytes);
    run.dataset = ingest(parse_in, config.resolved_task());
    if (config.truncate) {
        run.dataset = truncate_tokens(run.dataset, *config.truncate);
    }
    check_metric(config.metric, run.dataset.task, run.dataset.label_inventory);
    run.plan = plan_splits(run.dataset, config.periods_per_split, config.split_seed);

    const auto trainer = config.resolved_trainer();
    nlohmann::json key = {{"dataset_fnv1a", hash_hex(bytes)},
                          {"task", to_string(run.dataset.task)},
                          {"metric", config.metric.to_string()},
                          {"periods_per_split", config.periods_per_split},
                          {"seeds", config.seeds},
                          {"split_seed", config.split_seed},
                          {"trainer", trainer.to_string()},
                          {"hparams", trainer.hyperparameters},
                          {"truncate", config.truncate ? nlohmann::json(*config.truncate) : nlohmann::json(nullptr)}};
    run.config_hash = hash_hex(key.dump());
    return run;
}

std::optional<SummaryScores> write_reports(const EvaluationGrid& grid, const fs::path& dir, const std::string& label,
                                           const ReportFormat& fmt) {
    fs::create_directories(dir);
    write_file_atomic(dir / "matrix.md", render_matrix(grid, fmt));
    if (!grid.complete()) {
        return std::nullopt;
    }
    SummaryOptions opts;
    opts.wilcoxon.alpha = fmt.alpha;
    auto scores = summarize(grid, opts);
    write_file_atomic(dir / "summary.csv", render_summary_csv(scores));
    write_file_atomic(dir / "summary.md", render_summary_markdown(scores, label, fmt));
    return scores;
}

namespace {

std::string run_label(const RunConfig& config) {
    return config.dataset.filename().string() + ", " + config.metric.to_string() + ", "
           + config.resolved_trainer().to_string();
}

}// namespace

RunGridResult run_grid(const RunConfig& config, const RunGridOptions& options) {
    const auto run = prepare_run(config);
    const int n = run.plan.n;
    const auto trainer = config.resolved_trainer();
    const fs::path grid_path = config.out / "grid.csv";
    const fs::path meta_path = config.out / "grid.meta.json";
    fs::create_directories(config.out);

    RunGridResult result{EvaluationGrid(n, config.seeds), {}, std::nullopt, false};
    if (fs::exists(grid_path)) {
        std::string previous;
        if (fs::exists(meta_path)) {
            std::ifstream in(meta_path);
            try {
                previous = nlohmann::json::parse(in).value("config_hash", "");
            } catch (const nlohmann::json::exception&) {
            }
        }
        if (previous != run.config_hash) {
            throw UsageError(grid_path.string() + " was produced by a different configuration (hash '" + previous
                             + "', now '" + run.config_hash + "'); use another --out directory or remove it");
        }
        result.grid.merge(read_grid_csv(grid_path, n));
    }
    write_file_atomic(config.out / "plan.json", plan_to_json(run.plan) + "\n");
    const nlohmann::json meta = {{"config_hash", run.config_hash}, {"n", n}, {"seeds", config.seeds},
                                 {"metric", config.metric.to_string()}, {"trainer", trainer.to_string()}};
    write_file_atomic(meta_path, meta.dump(2) + "\n");

    struct Unit {
        int train;
        std::int64_t seed;
    };
    std::vector<Unit> todo;
    for (int i = 1; i <= n - 1; ++i) {
        for (auto seed : config.seeds) {
            ++result.stats.units_total;
            bool done = true;
            for (int j = i + 1; j <= n; ++j) {
                done = done && result.grid.value(i, j, seed).has_value();
            }
            if (done) {
                ++result.stats.units_skipped;
            } else {
                todo.push_back({i, seed});
            }
        }
    }

    std::vector<std::vector<Record>> tests(static_cast<std::size_t>(n) + 1);
    for (int k = 2; k <= n; ++k) {
        tests[static_cast<std::size_t>(k)] = split_records(run.dataset, run.plan, k);
    }
    std::mutex mu;
    std::atomic<std::size_t> started{0};
    auto log = [&](const std::string& msg) {
        if (options.log) {
            std::lock_guard lock(mu);
            options.log(msg);
        }
    };

    parallel_for(todo.size(), config.workers, [&](std::size_t u) {
        if (options.max_units && started.fetch_add(1) >= *options.max_units) {
            return;
        }
        const auto [i, seed] = todo[u];
        EvaluationGrid local(n, config.seeds);
        try {
            auto learner = make_learner(trainer);
            const auto views = materialize_split(run.dataset, run.plan, i, run.plan.seed);
            TrainRequest req;
            req.task = run.dataset.task;
            req.metric = config.metric;
            req.inventory = run.dataset.label_inventory;
            req.train = views.train;
            req.dev = views.dev;
            req.seed = seed;
            req.training_split = i;
            const auto model = learner->train(req);
            for (int j = i + 1; j <= n; ++j) {
                auto mv = score_model(model, config.metric, tests[static_cast<std::size_t>(j)], run.dataset.label_inventory);
                local.set(i, j, seed, mv.value, mv.total);
            }
            log("trained split " + std::to_string(i) + " seed " + std::to_string(seed));
        } catch (const TrainerError& e) {
            for (int j = i + 1; j <= n; ++j) {
                local.mark_failed(i, j, seed, e.what());
            }
            log("FAILED split " + std::to_string(i) + " seed " + std::to_string(seed) + ": " + e.what());
        }
        std::lock_guard lock(mu);
        ++result.stats.units_trained;
        result.grid.merge(local);
        write_grid_csv(grid_path, result.grid);
    });

    result.stats.cells_failed = result.grid.failures().size();
    result.interrupted = result.stats.units_trained + result.stats.units_skipped < result.stats.units_total;
    if (!result.interrupted) {
        // Covers the zero-work case too, so outputs always reflect the grid on disk.
        write_grid_csv(grid_path, result.grid);
        result.summary = write_reports(result.grid, config.out, run_label(config), config.report_format());
    }
    return result;
}

AdaptRunResult run_adaptation(const RunConfig& config, const std::vector<AdaptMethod>& methods, double fraction,
                              const std::function<void(const std::string&)>& log) {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw UsageError("fraction must lie in (0, 1], got " + std::to_string(fraction));
    }
    const auto run = prepare_run(config);
    if (run.plan.n < 3) {
        throw DataError("adaptation needs at least 3 splits");
    }
    fs::create_directories(config.out);
    write_file_atomic(config.out / "plan.json", plan_to_json(run.plan) + "\n");

    std::vector<AdaptMethod> all = {AdaptMethod::GoldRetrain};
    for (auto m : methods) {
        if (m != AdaptMethod::GoldRetrain) {
            all.push_back(m);
        }
    }
    AdaptationData data{run.dataset, run.plan, config.metric};
    AdaptRunResult out;
    std::string csv;
    const auto fmt = config.report_format();
    for (auto method : all) {
        if (log) {
            log("adaptation method " + to_string(method));
        }
        AdaptationGridOptions opts;
        opts.method = method;
        opts.trainer = config.resolved_trainer();
        opts.seeds = config.seeds;
        opts.fraction = fraction;
        opts.workers = config.workers;
        opts.summary.wilcoxon.alpha = config.alpha;
        auto res = adaptation_grid(data, opts);
        const auto dir = config.out / to_string(method);
        fs::create_directories(dir);
        write_grid_csv(dir / "grid.csv", res.grid);
        write_reports(res.grid, dir, run_label(config) + ", " + display_name(method), fmt);
        for (const auto& [key, why] : res.grid.failures()) {
            out.failures.push_back(to_string(method) + ": cell (train " + std::to_string(key.train) + ", test "
                                   + std::to_string(key.test) + ", seed " + std::to_string(key.seed) + "): " + why);
        }
        if (!res.summary) {
            continue;
        }
        std::istringstream rows(render_summary_csv(*res.summary));
        std::string line;
        bool header = true;
        while (std::getline(rows, line)) {
            if (header) {
                if (csv.empty()) {
                    csv = "method," + line + "\n";
                }
                header = false;
                continue;
            }
            csv += to_string(method) + "," + line + "\n";
        }
        out.rows.emplace_back(display_name(method), *res.summary);
    }
    write_file_atomic(config.out / "adaptation.csv", csv);
    ReportFormat table_fmt = fmt;
    table_fmt.decimals = std::max(fmt.decimals, 2);
    write_file_atomic(config.out / "adaptation.md", render_adaptation_table(out.rows, table_fmt));
    return out;
}

}// namespace tempdrift
