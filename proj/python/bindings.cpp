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
#include "tempdrift/grid.hpp"
#include "tempdrift/harness.hpp"
#include "tempdrift/metrics.hpp"
#include "tempdrift/report.hpp"
#include "tempdrift/summary.hpp"
#include "tempdrift/wilcoxon.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace tempdrift;

namespace {

py::dict test_dict(const WilcoxonResult& r) {
    py::dict d;
    d["w_plus"] = r.w_plus;
    d["w_minus"] = r.w_minus;
    d["statistic"] = r.statistic;
    d["p_value"] = r.p_value;
    d["significant"] = r.significant;
    d["degenerate"] = r.degenerate;
    d["exact"] = r.exact;
    d["n_effective"] = r.n_effective;
    return d;
}

py::dict summary_dict(const SummaryScores& s, const ReportFormat& fmt) {
    py::dict salient;
    salient["base"] = s.salient.base;
    salient["longest_horizon"] = s.salient.longest_horizon;
    salient["latest_retrain"] = s.salient.latest_retrain;
    py::dict scores;
    for (const auto& r : s.scores) {
        py::dict d = test_dict(r.test);
        d["value"] = r.score.value;
        d["diffs"] = r.score.diffs;
        d["seed_min"] = r.seed_range.min;
        d["seed_max"] = r.seed_range.max;
        d["sign_consistent"] = r.seed_range.sign_consistent;
        scores[py::str(score_name(r.kind))] = d;
    }
    py::dict out;
    out["n"] = s.n;
    out["seed_count"] = s.seed_count;
    out["salient"] = salient;
    out["scores"] = scores;
    out["row"] = render_summary_row(s, fmt);
    return out;
}

SummaryOptions options_for(double alpha) {
    SummaryOptions o;
    o.wilcoxon.alpha = alpha;
    return o;
}

std::vector<std::vector<Span>> spans_of(const std::vector<TagSequence>& sentences) {
    std::vector<std::vector<Span>> out;
    out.reserve(sentences.size());
    for (const auto& s : sentences) {
        out.push_back(extract_spans(s));
    }
    return out;
}

}// namespace

PYBIND11_MODULE(tempdrift, m) {
    m.doc() = "Temporal drift evaluation: grids, summary scores, significance and synthetic drift corpora.";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<UsageError>(m, "UsageError", base.ptr());
    py::register_exception<DataError>(m, "DataError", base.ptr());
    auto trainer = py::register_exception<TrainerError>(m, "TrainerError", base.ptr());
    py::register_exception<ProtocolError>(m, "ProtocolError", trainer.ptr());
    py::register_exception<UnsupportedCapability>(m, "UnsupportedCapability", trainer.ptr());

    m.def(
        "wilcoxon",
        [](const std::vector<double>& diffs, double alpha, const std::string& zero_method) {
            WilcoxonOptions o;
            o.alpha = alpha;
            if (zero_method == "wilcox") {
                o.zero_method = ZeroMethod::Wilcox;
            } else if (zero_method == "pratt") {
                o.zero_method = ZeroMethod::Pratt;
            } else {
                throw UsageError("zero_method must be 'wilcox' or 'pratt'");
            }
            return test_dict(wilcoxon_signed_rank(diffs, o));
        },
        py::arg("diffs"), py::arg("alpha") = 0.05, py::arg("zero_method") = "wilcox",
        "Two-sided Wilcoxon signed-rank test of zero median difference.");

    m.def(
        "summarize_matrix",
        [](const std::vector<std::vector<double>>& rows, double alpha, int decimals) {
            return summary_dict(summarize(EvaluationGrid::from_lower_triangle(rows), options_for(alpha)),
                                ReportFormat{100.0, decimals, alpha});
        },
        py::arg("rows"), py::arg("alpha") = 0.05, py::arg("decimals") = 1,
        "Summary scores of a single-seed grid given as lower-triangular rows: rows[k] holds the values of "
        "test split k+2 for train splits 1..k+1.");

    m.def(
        "summarize_csv",
        [](const std::filesystem::path& path, double alpha, int decimals) {
            return summary_dict(summarize(read_grid_csv(path), options_for(alpha)), ReportFormat{100.0, decimals, alpha});
        },
        py::arg("path"), py::arg("alpha") = 0.05, py::arg("decimals") = 1, "Summary scores of a grid CSV file.");

    m.def(
        "render_matrix_csv",
        [](const std::filesystem::path& path, int decimals) {
            return render_matrix(read_grid_csv(path), ReportFormat{100.0, decimals, 0.05});
        },
        py::arg("path"), py::arg("decimals") = 1, "Lower-triangular text table of a grid CSV file.");

    m.def(
        "span_micro_f1",
        [](const std::vector<TagSequence>& gold, const std::vector<TagSequence>& pred) {
            if (gold.size() != pred.size()) {
                throw UsageError("gold and predictions differ in sentence count");
            }
            const auto g = spans_of(gold), p = spans_of(pred);
            return span_micro_f1(g, p).value;
        },
        py::arg("gold"), py::arg("pred"), "Exact-match span micro-F1 over BIO tag sequences.");

    m.def(
        "class_f1",
        [](const std::vector<std::string>& gold, const std::vector<std::string>& pred, const std::string& target) {
            return class_f1(gold, pred, target).value;
        },
        py::arg("gold"), py::arg("pred"), py::arg("target"));

    m.def(
        "macro_f1",
        [](const std::vector<std::string>& gold, const std::vector<std::string>& pred,
           const std::optional<std::vector<std::string>>& inventory) {
            return inventory ? macro_f1(gold, pred, *inventory).value : macro_f1(gold, pred).value;
        },
        py::arg("gold"), py::arg("pred"), py::arg("inventory") = py::none());

    m.def(
        "simulate",
        [](const std::filesystem::path& out, const std::map<std::string, std::string>& settings) {
            KeyValueConfig kv;
            for (const auto& [k, v] : settings) {
                kv.set(k, v);
            }
            const auto corpus = generate(DriftConfig::from_config(kv));
            emit(out, corpus);
            return corpus.records.size();
        },
        py::arg("out"), py::arg("settings") = std::map<std::string, std::string>{},
        "Writes a synthetic drift corpus as JSON lines; settings use the drift configuration keys.");

    m.def(
        "run_grid",
        [](const std::filesystem::path& dataset, const std::string& metric, const std::filesystem::path& out,
           const std::vector<std::int64_t>& seeds, int periods_per_split, const std::optional<std::string>& trainer,
           int workers) -> py::object {
            RunConfig c;
            c.dataset = dataset;
            c.metric = TaskMetric::parse(metric);
            c.out = out;
            c.seeds = seeds;
            c.periods_per_split = periods_per_split;
            c.workers = workers;
            if (trainer) {
                c.trainer = TrainerSpec::parse(*trainer);
            }
            RunGridResult res;
            {
                py::gil_scoped_release release;
                res = run_grid(c);
            }
            if (!res.summary) {
                return py::none();
            }
            return summary_dict(*res.summary, c.report_format());
        },
        py::arg("dataset"), py::arg("metric"), py::arg("out"), py::arg("seeds") = std::vector<std::int64_t>{1, 2, 3},
        py::arg("periods_per_split") = 1, py::arg("trainer") = py::none(), py::arg("workers") = 1,
        "Trains and scores the full grid (resuming from out/grid.csv); returns the summary, or None when cells failed.");
}
