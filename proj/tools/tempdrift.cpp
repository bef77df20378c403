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
#include "tempdrift/harness.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace tempdrift;
namespace fs = std::filesystem;

namespace {

/// Flags shared by run-grid, adapt and split. Values left unset keep the
/// config file's (or the built-in) defaults.
struct RunFlags {
    std::string config;
    std::string dataset;
    std::string task;
    std::string metric;
    std::string seeds;
    std::string trainer;
    std::vector<std::string> hparams;
    std::string out;
    std::optional<std::int64_t> split_seed;
    std::optional<int> periods_per_split;
    std::optional<double> alpha;
    std::optional<int> decimals;
    std::optional<int> workers;
    std::optional<std::size_t> truncate;

    void attach(CLI::App* app, bool training) {
        app->add_option("--config", config, "key = value run configuration file");
        app->add_option("--dataset", dataset, "line-delimited JSON records");
        app->add_option("--task", task, "classification or sequence-labeling");
        app->add_option("--metric", metric, "span-micro-f1, class-f1:<label> or macro-f1");
        app->add_option("--split-seed", split_seed, "seed for downsampling and the train/dev partition");
        app->add_option("--periods-per-split", periods_per_split, "consecutive periods per split");
        app->add_option("--truncate", truncate, "keep the first k tokens (classification)");
        app->add_option("--out", out, "output directory");
        if (training) {
            app->add_option("--seeds,--seed", seeds, "comma-separated training seeds");
            app->add_option("--trainer", trainer, "builtin-classifier, builtin-tagger or external:CMD");
            app->add_option("--hparam", hparams, "trainer hyperparameter key=value (repeatable)");
            app->add_option("--alpha", alpha, "significance level");
            app->add_option("--decimals", decimals, "report rounding");
            app->add_option("--workers", workers, "parallel training units");
        }
    }

    RunConfig resolve() const {
        KeyValueConfig kv = config.empty() ? KeyValueConfig{} : KeyValueConfig::load(config);
        auto put = [&](const char* key, const std::string& v) {
            if (!v.empty()) {
                kv.set(key, v);
            }
        };
        put("dataset", dataset);
        put("task", task);
        put("metric", metric);
        put("seeds", seeds);
        put("trainer", trainer);
        put("out", out);
        if (split_seed) {
            kv.set("split_seed", std::to_string(*split_seed));
        }
        if (periods_per_split) {
            kv.set("periods_per_split", std::to_string(*periods_per_split));
        }
        if (alpha) {
            kv.set("alpha", format_roundtrip(*alpha));
        }
        if (decimals) {
            kv.set("decimals", std::to_string(*decimals));
        }
        if (workers) {
            kv.set("workers", std::to_string(*workers));
        }
        if (truncate) {
            kv.set("truncate", std::to_string(*truncate));
        }
        for (const auto& h : hparams) {
            auto eq = h.find('=');
            if (eq == std::string::npos || eq == 0) {
                throw UsageError("--hparam expects key=value, got '" + h + "'");
            }
            kv.set("hparam." + h.substr(0, eq), h.substr(eq + 1));
        }
        return RunConfig::from_config(kv);
    }
};

void log_line(const std::string& msg) {
    std::cerr << msg << "\n";
}

int report_failures(const EvaluationGrid& grid) {
    for (const auto& [key, why] : grid.failures()) {
        std::cerr << "failed cell (train " << key.train << ", test " << key.test << ", seed " << key.seed
                  << "): " << why << "\n";
    }
    return 3;
}

}// namespace

int main(int argc, char** argv) {
    CLI::App app{"Temporal deterioration and adaptation experiments"};
    app.require_subcommand(1);

    RunFlags split_flags;
    auto* split = app.add_subcommand("split", "plan temporal splits and write plan.json");
    split_flags.attach(split, false);

    std::string sim_config, sim_out;
    std::optional<std::int64_t> sim_seed;
    std::vector<std::string> sim_sets;
    auto* simulate = app.add_subcommand("simulate", "generate a synthetic drift corpus");
    simulate->add_option("--config", sim_config, "key = value drift configuration");
    simulate->add_option("--set", sim_sets, "override a configuration key (key=value, repeatable)");
    simulate->add_option("--seed", sim_seed, "corpus seed");
    simulate->add_option("--out", sim_out, "output directory (corpus.jsonl, drift.md)")->required();

    RunFlags grid_flags;
    std::optional<std::size_t> max_units;
    auto* run_grid_cmd = app.add_subcommand("run-grid", "train and score the full evaluation grid");
    grid_flags.attach(run_grid_cmd, true);
    run_grid_cmd->add_option("--max-units", max_units, "stop after training this many units");

    RunFlags adapt_flags;
    std::vector<std::string> methods;
    double fraction = 1.0;
    auto* adapt_cmd = app.add_subcommand("adapt", "compare label-free adaptation methods with gold retraining");
    adapt_flags.attach(adapt_cmd, true);
    adapt_cmd->add_option("--method", methods,
                          "gold, self-label, self-label-cumulative, pretrain-ft or ft-pretrain-ft (repeatable)")
        ->required()
        ->delimiter(',');
    adapt_cmd->add_option("--fraction", fraction, "share of the target split to self-label, in (0, 1]");

    std::string grid_file, summary_out;
    double sum_alpha = 0.05;
    int sum_decimals = 1;
    auto* summarize_cmd = app.add_subcommand("summarize", "summary scores and significance for a grid CSV");
    summarize_cmd->add_option("grid", grid_file, "grid.csv")->required();
    summarize_cmd->add_option("--alpha", sum_alpha, "significance level");
    summarize_cmd->add_option("--decimals", sum_decimals, "report rounding");
    summarize_cmd->add_option("--out", summary_out, "directory for summary.csv, summary.md and matrix.md");

    std::string matrix_file, matrix_out;
    int matrix_decimals = 1;
    auto* render = app.add_subcommand("render-matrix", "lower-triangular table of a grid CSV");
    render->add_option("grid", matrix_file, "grid.csv")->required();
    render->add_option("--decimals", matrix_decimals, "report rounding");
    render->add_option("--out", matrix_out, "write to this file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*split) {
            auto config = split_flags.resolve();
            auto run = prepare_run(config);
            fs::create_directories(config.out);
            write_file_atomic(config.out / "plan.json", plan_to_json(run.plan) + "\n");
            std::cout << "splits: " << run.plan.n << ", records per split: " << run.plan.per_split_size
                      << ", train/dev: " << train_size_for(run.plan.per_split_size) << "/"
                      << run.plan.per_split_size - train_size_for(run.plan.per_split_size) << "\n";
            return 0;
        }
        if (*simulate) {
            KeyValueConfig kv = sim_config.empty() ? KeyValueConfig{} : KeyValueConfig::load(sim_config);
            for (const auto& s : sim_sets) {
                auto eq = s.find('=');
                if (eq == std::string::npos || eq == 0) {
                    throw UsageError("--set expects key=value, got '" + s + "'");
                }
                kv.set(s.substr(0, eq), s.substr(eq + 1));
            }
            if (sim_seed) {
                kv.set("seed", std::to_string(*sim_seed));
            }
            const auto cfg = DriftConfig::from_config(kv);
            const auto corpus = generate(cfg);
            fs::create_directories(sim_out);
            emit(fs::path(sim_out) / "corpus.jsonl", corpus);
            write_file_atomic(fs::path(sim_out) / "drift.md", describe(corpus).to_text());
            std::cout << "wrote " << corpus.records.size() << " records to " << (fs::path(sim_out) / "corpus.jsonl").string()
                      << "\n";
            return 0;
        }
        if (*run_grid_cmd) {
            auto config = grid_flags.resolve();
            RunGridOptions opts;
            opts.max_units = max_units;
            opts.log = log_line;
            auto res = run_grid(config, opts);
            std::cerr << "units: " << res.stats.units_total << " total, " << res.stats.units_skipped << " skipped, "
                      << res.stats.units_trained << " trained\n";
            if (res.stats.cells_failed > 0) {
                return report_failures(res.grid);
            }
            if (res.interrupted) {
                std::cerr << "stopped early; re-run to resume\n";
                return 0;
            }
            std::cout << render_summary_row(*res.summary, config.report_format()) << "\n";
            return 0;
        }
        if (*adapt_cmd) {
            auto config = adapt_flags.resolve();
            std::vector<AdaptMethod> parsed;
            for (const auto& m : methods) {
                parsed.push_back(parse_adapt_method(m));
            }
            if (!(fraction > 0.0 && fraction <= 1.0)) {
                throw UsageError("--fraction must lie in (0, 1]");
            }
            auto res = run_adaptation(config, parsed, fraction, log_line);
            std::ifstream table(config.out / "adaptation.md");
            std::cout << table.rdbuf();
            if (!res.failures.empty()) {
                for (const auto& f : res.failures) {
                    std::cerr << "failed " << f << "\n";
                }
                return 3;
            }
            return 0;
        }
        if (*summarize_cmd) {
            if (!(sum_alpha > 0.0 && sum_alpha < 1.0)) {
                throw UsageError("--alpha must lie in (0, 1)");
            }
            const auto grid = read_grid_csv(fs::path(grid_file));
            if (!grid.complete()) {
                throw DataError("grid " + grid_file + " is incomplete: " + std::to_string(grid.missing().size())
                                + " missing and " + std::to_string(grid.failures().size()) + " failed cells");
            }
            const ReportFormat fmt{100.0, sum_decimals, sum_alpha};
            SummaryOptions opts;
            opts.wilcoxon.alpha = sum_alpha;
            const auto scores = summarize(grid, opts);
            if (!summary_out.empty()) {
                write_reports(grid, summary_out, fs::path(grid_file).filename().string(), fmt);
            }
            std::cout << render_summary_row(scores, fmt) << "\n";
            return 0;
        }
        if (*render) {
            const auto text = render_matrix(read_grid_csv(fs::path(matrix_file)), ReportFormat{100.0, matrix_decimals, 0.05});
            if (matrix_out.empty()) {
                std::cout << text;
            } else {
                write_file_atomic(matrix_out, text);
            }
            return 0;
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const TrainerError& e) {
        std::cerr << "trainer error: " << e.what() << "\n";
        return 3;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
