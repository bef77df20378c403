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
// Acceptance suite: one PASS/FAIL line per criterion, INFO lines for
// quantities that are reported but not asserted. Exit status is 0 only when
// every criterion passes.
//
// usage: acceptance [OUTPUT_DIR]

#include "test_util.hpp"

#include "tempdrift/adaptation.hpp"
#include "tempdrift/drift_sim.hpp"
#include "tempdrift/harness.hpp"
#include "tempdrift/metrics.hpp"
#include "tempdrift/report.hpp"
#include "tempdrift/summary.hpp"
#include "tempdrift/wilcoxon.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <unordered_map>

using namespace tempdrift;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
    std::vector<std::string> info;
};

std::string fmt(double v, int decimals = 4) {
    return format_fixed(v, decimals);
}

// --- shared acceptance runs ----------------------------------------------------------

/// Pre-declared corpora: churn 0.3 with corpus seed 1, and churn 0 controls with
/// corpus seeds 1..5. Every other field keeps its DriftConfig default
/// (6 periods x 2000 records, classification, 3 classes).
constexpr std::uint64_t kDriftCorpusSeed = 1;
constexpr std::uint64_t kControlSeeds[] = {1, 2, 3, 4, 5};

struct Runs {
    fs::path root;
    RunConfig drift;
    std::optional<RunGridResult> drift_grid;
    double drift_seconds = 0.0;
    std::optional<AdaptRunResult> adaptation;
};

fs::path write_corpus(const fs::path& dir, double churn, std::uint64_t seed) {
    fs::create_directories(dir);
    DriftConfig cfg;
    cfg.churn = churn;
    cfg.seed = seed;
    const auto path = dir / "corpus.jsonl";
    emit(path, generate(cfg));
    return path;
}

RunConfig grid_config(const fs::path& dataset, const fs::path& out) {
    RunConfig c;
    c.dataset = dataset;
    c.metric = TaskMetric::parse("macro-f1");
    c.seeds = {1, 2, 3};
    c.out = out;
    fs::remove_all(out);
    return c;
}

std::string summary_line(const SummaryScores& s) {
    return render_summary_row(s);
}

// --- criteria -----------------------------------------------------------------------

Outcome reference_summaries() {
    Outcome o;
    const auto t0 = Clock::now();
    const auto glove = summarize(read_grid_csv(testutil::data_dir() / "ref_glove.csv"));
    const auto roberta = summarize(read_grid_csv(testutil::data_dir() / "ref_roberta.csv"));
    const auto g = render_summary_row(glove);
    const auto r = render_summary_row(roberta);
    const double secs = seconds_since(t0);
    const bool rows_ok = g == "55.2  54.1  63.0  -1.3  4.1*  -0.1  2.1*" && r == "67.5  77.8  80.0  3.2  1.4*  3.5  0.8";
    o.pass = rows_ok && secs < 1.0;
    o.detail = "GloVe [" + g + "] RoBERTa [" + r + "] in " + fmt(secs, 3) + " s";
    return o;
}

Outcome wilcoxon_oracle() {
    Outcome o;
    std::mt19937 gen(20240601);
    double worst = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 1 + gen() % 12;
        std::vector<double> d;
        for (std::size_t i = 0; i < n; ++i) {
            d.push_back(static_cast<double>(static_cast<int>(gen() % 17) - 8) / 4.0);
        }
        worst = std::max(worst, std::abs(wilcoxon_signed_rank(d).p_value - testutil::oracle_wilcoxon_p(d)));
    }
    const auto glove = read_grid_csv(testutil::data_dir() / "ref_glove.csv");
    const auto diffs = adaptation_consecutive(glove).diffs;
    const auto res = wilcoxon_signed_rank(diffs);
    const double oracle = testutil::oracle_wilcoxon_p(diffs);
    o.pass = worst <= 1e-12 && res.w_minus == 5.0 && std::abs(res.p_value - 0.0195) <= 1e-4
             && std::abs(res.p_value - oracle) <= 1e-4;
    o.detail = "max |p - oracle| over 200 vectors = " + std::to_string(worst) + "; GloVe A^{t-1}: W- = "
               + fmt(res.w_minus, 1) + ", p = " + fmt(res.p_value, 6) + " (oracle " + fmt(oracle, 6) + ")";
    return o;
}

Outcome metric_oracles() {
    Outcome o;
    std::mt19937 gen(77);
    static const std::vector<std::string> tag_opts = {"O", "O", "B-PER", "I-PER", "B-LOC", "I-LOC", "I-ORG"};
    auto tags = [&](std::size_t len) {
        std::vector<std::string> t;
        for (std::size_t i = 0; i < len; ++i) {
            t.push_back(tag_opts[gen() % tag_opts.size()]);
        }
        return t;
    };
    auto labels = [&](std::size_t len, std::size_t classes) {
        std::vector<std::string> out;
        for (std::size_t i = 0; i < len; ++i) {
            out.push_back(std::string(1, static_cast<char>('A' + gen() % classes)));
        }
        return out;
    };
    int span_bad = 0, class_bad = 0, macro_bad = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t sentences = 1 + gen() % 4;
        std::vector<std::vector<std::string>> gold, pred;
        std::vector<std::vector<Span>> gs, ps;
        for (std::size_t s = 0; s < sentences; ++s) {
            const std::size_t len = gen() % 8;
            gold.push_back(tags(len));
            pred.push_back(gen() % 4 == 0 ? gold.back() : tags(len));
            gs.push_back(extract_spans(gold.back()));
            ps.push_back(extract_spans(pred.back()));
        }
        auto [tp, fp, fn] = testutil::oracle_span_counts(gold, pred);
        span_bad += span_micro_f1(gs, ps).value != testutil::oracle_f1(tp, fp, fn);
    }
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t len = 1 + gen() % 12;
        const auto g = labels(len, 3), p = labels(len, 3);
        const std::string target(1, static_cast<char>('A' + gen() % 4));
        class_bad += class_f1(g, p, target).value != testutil::oracle_class_f1(g, p, target);
    }
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t len = 1 + gen() % 12;
        const auto g = labels(len, 4), p = labels(len, 4);
        const std::vector<std::string> inv = {"A", "B", "C", "D"};
        macro_bad += macro_f1(g, p, inv).value != testutil::oracle_macro_f1(g, p, inv);
    }
    o.pass = span_bad == 0 && class_bad == 0 && macro_bad == 0;
    o.detail = "mismatches out of 1000 each: span_micro_f1 " + std::to_string(span_bad) + ", class_f1 "
               + std::to_string(class_bad) + ", macro_f1 " + std::to_string(macro_bad);
    return o;
}

Outcome summary_properties() {
    Outcome o;
    std::mt19937 gen(4242);
    int violations = 0;
    for (int rep = 0; rep < 500; ++rep) {
        const int n = 3 + rep % 6;
        std::uniform_real_distribution<double> u(0.1, 0.9);
        const double shift = std::uniform_real_distribution<double>(-3, 3)(gen);
        const double k = std::uniform_real_distribution<double>(0.2, 5)(gen);
        const double constant = u(gen);
        EvaluationGrid g(n, {1}), shifted(n, {1}), scaled(n, {1}), flat(n, {1});
        for (int i = 1; i < n; ++i) {
            for (int j = i + 1; j <= n; ++j) {
                const double v = u(gen);
                g.set(i, j, 1, v);
                shifted.set(i, j, 1, v + shift);
                scaled.set(i, j, 1, v * k);
                flat.set(i, j, 1, constant);
            }
        }
        for (auto kind : kAllScores) {
            const auto base = compute_score(kind, g);
            violations += base.diffs.size() != static_cast<std::size_t>((n - 1) * (n - 2) / 2);
            violations += std::abs(compute_score(kind, shifted).value - base.value) > 1e-9;
            violations += std::abs(compute_score(kind, scaled).value - k * base.value) > 1e-9;
            violations += compute_score(kind, flat).value != 0.0;
        }
    }
    o.pass = violations == 0;
    o.detail = std::to_string(violations) + " violations over 500 grids x 4 scores (n = 3..8)";
    return o;
}

Outcome end_to_end(Runs& runs) {
    Outcome o;
    const auto dir = runs.root / "drift";
    const auto dataset = write_corpus(dir, 0.3, kDriftCorpusSeed);
    runs.drift = grid_config(dataset, dir / "grid");
    const auto t0 = Clock::now();
    runs.drift_grid = run_grid(runs.drift);
    runs.drift_seconds = seconds_since(t0);
    const auto& s = runs.drift_grid->summary;
    bool drift_ok = false;
    if (s) {
        const auto& aa = s->get(ScoreKind::AdaptationAnchor);
        drift_ok = aa.score.value > 0.0 && aa.test.p_value < 0.05 && runs.drift_seconds < 300.0;
        o.info.push_back("churn 0.3: [" + summary_line(*s) + "], A^a p = " + fmt(aa.test.p_value, 6) + ", grid "
                         + fmt(runs.drift_seconds, 1) + " s");
    } else {
        o.info.push_back("churn 0.3: grid incomplete");
    }

    int clean = 0;
    for (auto seed : kControlSeeds) {
        const auto cdir = runs.root / ("control-" + std::to_string(seed));
        auto res = run_grid(grid_config(write_corpus(cdir, 0.0, seed), cdir / "grid"));
        if (!res.summary) {
            o.info.push_back("control corpus seed " + std::to_string(seed) + ": grid incomplete");
            continue;
        }
        std::string flagged;
        for (const auto& r : res.summary->scores) {
            if (r.test.significant) {
                flagged += (flagged.empty() ? "" : ",") + score_header(r.kind);
            }
        }
        clean += flagged.empty() ? 1 : 0;
        o.info.push_back("control corpus seed " + std::to_string(seed) + ": [" + summary_line(*res.summary) + "]"
                         + (flagged.empty() ? " clean" : " significant: " + flagged));
    }
    const bool control_ok = clean >= 4;
    o.pass = drift_ok && control_ok;
    o.detail = std::string("churn 0.3 A^a positive and significant: ") + (drift_ok ? "yes" : "no")
               + "; churn 0 controls with no significant score: " + std::to_string(clean) + "/5 (need >= 4)";
    return o;
}

Outcome self_label_direction(Runs& runs) {
    Outcome o;
    auto cfg = runs.drift;
    cfg.out = runs.root / "drift" / "adapt";
    fs::remove_all(cfg.out);
    const auto t0 = Clock::now();
    runs.adaptation = run_adaptation(cfg, {AdaptMethod::SelfLabel, AdaptMethod::SelfLabelCumulative}, 1.0);
    const double secs = seconds_since(t0);
    const auto& rows = runs.adaptation->rows;
    const SummaryScores* gold = nullptr;
    const SummaryScores* self = nullptr;
    for (const auto& [name, s] : rows) {
        if (name == display_name(AdaptMethod::GoldRetrain)) {
            gold = &s;
        } else if (name == display_name(AdaptMethod::SelfLabel)) {
            self = &s;
        }
    }
    if (self == nullptr || gold == nullptr) {
        o.detail = "adaptation run incomplete";
        return o;
    }
    const auto& sa = self->get(ScoreKind::AdaptationAnchor);
    const auto& ga = gold->get(ScoreKind::AdaptationAnchor);
    o.pass = sa.score.value > 0.0 && sa.test.p_value < 0.05;
    o.detail = "Self-Label A^a = " + fmt(100 * sa.score.value, 2) + " (p = " + fmt(sa.test.p_value, 6) + ")";
    o.info.push_back("Gold A^a = " + fmt(100 * ga.score.value, 2) + " vs Self-Label A^a = " + fmt(100 * sa.score.value, 2)
                     + ": Gold >= Self-Label " + (ga.score.value >= sa.score.value ? "holds" : "does not hold")
                     + " (reported, not asserted)");

    // Cumulative vs single-step on shared cells.
    const auto single = read_grid_csv(cfg.out / "self-label" / "grid.csv");
    const auto cumul = read_grid_csv(cfg.out / "self-label-cumulative" / "grid.csv");
    double worst = 0.0, mean = 0.0;
    int cells = 0;
    for (int j = 3; j < single.n(); ++j) {
        for (int k = j + 1; k <= single.n(); ++k) {
            const double d = cumul.mean(j, k) - single.mean(j, k);
            worst = std::min(worst, d);
            mean += d;
            ++cells;
        }
    }
    if (cells > 0) {
        o.info.push_back("cumulative minus single-step self-labeling over " + std::to_string(cells)
                         + " cells with >= 2 self-labeled splits: mean " + fmt(100 * mean / cells, 2)
                         + ", worst " + fmt(100 * worst, 2) + " points (tolerance reported, not asserted)");
    }
    o.info.push_back("adaptation run (gold + 2 methods): " + fmt(secs, 1) + " s");
    return o;
}

Outcome perfect_oracle(const Runs& runs) {
    Outcome o;
    const auto prepared = prepare_run(runs.drift);
    AdaptationData data{prepared.dataset, prepared.plan, runs.drift.metric};
    std::unordered_map<std::string, Label> gold;
    for (const auto& r : prepared.dataset.records) {
        gold.emplace(r.id, r.label);
    }
    Labeler oracle = [&gold](std::span<const UnlabeledRecord> records) {
        std::vector<Label> out;
        for (const auto& r : records) {
            out.push_back(gold.at(r.id));
        }
        return out;
    };
    int identical = 0, total = 0;
    for (double fraction : {0.25, 1.0}) {
        for (int target : {2, prepared.plan.n - 1}) {
            AdaptationJob job;
            job.method = AdaptMethod::SelfLabel;
            job.source = 1;
            job.target = target;
            job.fraction = fraction;
            job.trainer = runs.drift.resolved_trainer();
            job.seed = 1;
            auto learner = make_learner(job.trainer);
            const auto self = self_label_adapt(job, data, *learner, nullptr, &oracle);
            const auto mix = gold_mixture_retrain(job, data, *learner);
            identical += self.model.bytes() == mix.model.bytes() ? 1 : 0;
            ++total;
        }
    }
    o.pass = identical == total;
    o.detail = std::to_string(identical) + "/" + std::to_string(total)
               + " artifacts byte-identical (fractions 0.25 and 1, targets 2 and n-1)";
    return o;
}

Outcome determinism(const Runs& runs) {
    Outcome o;
    int same = 0, total = 0;
    auto compare = [&](const fs::path& a, const fs::path& b) {
        ++total;
        const bool eq = fs::exists(a) && fs::exists(b) && testutil::slurp(a) == testutil::slurp(b);
        same += eq ? 1 : 0;
        if (!eq) {
            o.info.push_back("differs: " + a.string() + " vs " + b.string());
        }
    };
    auto rerun = runs.drift;
    rerun.out = runs.root / "drift" / "grid-rerun";
    fs::remove_all(rerun.out);
    (void)run_grid(rerun);
    for (const char* f : {"grid.csv", "summary.csv"}) {
        compare(runs.drift.out / f, rerun.out / f);
    }

    const auto cdir = runs.root / ("control-" + std::to_string(kControlSeeds[0]));
    auto control = grid_config(cdir / "corpus.jsonl", cdir / "grid-rerun");
    (void)run_grid(control);
    for (const char* f : {"grid.csv", "summary.csv"}) {
        compare(cdir / "grid" / f, control.out / f);
    }

    auto adapt = runs.drift;
    adapt.out = runs.root / "drift" / "adapt-rerun";
    fs::remove_all(adapt.out);
    (void)run_adaptation(adapt, {AdaptMethod::SelfLabel, AdaptMethod::SelfLabelCumulative}, 1.0);
    for (const char* m : {"gold", "self-label", "self-label-cumulative"}) {
        for (const char* f : {"grid.csv", "summary.csv"}) {
            compare(runs.root / "drift" / "adapt" / m / f, adapt.out / m / f);
        }
    }
    o.pass = same == total;
    o.detail = std::to_string(same) + "/" + std::to_string(total) + " re-run outputs byte-identical";
    return o;
}

}// namespace

int main(int argc, char** argv) {
    const fs::path root = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out");
    fs::create_directories(root);
    Runs runs;
    runs.root = root;

    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {"reference-summary", reference_summaries},
        {"wilcoxon-oracle", wilcoxon_oracle},
        {"metric-oracles", metric_oracles},
        {"summary-properties", summary_properties},
        {"end-to-end-drift", [&] { return end_to_end(runs); }},
        {"self-label-direction", [&] { return self_label_direction(runs); }},
        {"perfect-oracle-equivalence", [&] { return perfect_oracle(runs); }},
        {"determinism", [&] { return determinism(runs); }},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("error: ") + e.what();
        }
        failed += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << (i + 1) << "] " << criteria[i].name << ": " << o.detail
                  << "\n";
        for (const auto& line : o.info) {
            std::cout << "INFO      " << line << "\n";
        }
        std::cout << std::flush;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
              << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
