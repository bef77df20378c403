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
#include "tempdrift/report.hpp"

#include <cstdio>
#include <sstream>

namespace tempdrift {

std::string format_fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    std::string s(buf);
    if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) {
        s.erase(0, 1);
    }
    return s;
}

namespace {

std::string starred(const ScoreResult& r, const ReportFormat& fmt) {
    return format_fixed(r.score.value * fmt.scale, fmt.decimals) + (r.test.significant ? "*" : "");
}

const char* kSalientHeaders[] = {"M_s^{s+1}", "M_s^n", "M_{n-1}^n"};

}// namespace

std::string render_summary_row(const SummaryScores& scores, const ReportFormat& fmt) {
    std::vector<std::string> cells = {format_fixed(scores.salient.base * fmt.scale, fmt.decimals),
                                      format_fixed(scores.salient.longest_horizon * fmt.scale, fmt.decimals),
                                      format_fixed(scores.salient.latest_retrain * fmt.scale, fmt.decimals)};
    for (const auto& r : scores.scores) {
        cells.push_back(starred(r, fmt));
    }
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        out += (i ? "  " : "") + cells[i];
    }
    return out;
}

std::string render_summary_markdown(const SummaryScores& scores, const std::string& label, const ReportFormat& fmt) {
    std::ostringstream out;
    out << "| |";
    for (const char* h : kSalientHeaders) {
        out << ' ' << h << " |";
    }
    for (auto kind : kAllScores) {
        out << ' ' << score_header(kind) << " |";
    }
    out << "\n|---|---|---|---|---|---|---|---|\n";
    out << "| " << label << " | " << format_fixed(scores.salient.base * fmt.scale, fmt.decimals) << " | "
        << format_fixed(scores.salient.longest_horizon * fmt.scale, fmt.decimals) << " | "
        << format_fixed(scores.salient.latest_retrain * fmt.scale, fmt.decimals) << " |";
    for (const auto& r : scores.scores) {
        out << ' ' << starred(r, fmt) << " |";
    }
    out << "\n\n";
    out << "An asterisk marks scores whose two-sided Wilcoxon signed-rank p-value is below alpha = "
        << format_roundtrip(fmt.alpha) << " (" << diff_count(scores.n) << " differences per score, " << scores.n
        << " splits, metric averaged over " << scores.seed_count << " seed" << (scores.seed_count == 1 ? "" : "s")
        << ").\n\n";

    out << "| score | value | W+ | W- | N | p | test |\n|---|---|---|---|---|---|---|\n";
    for (const auto& r : scores.scores) {
        out << "| " << score_header(r.kind) << " | " << format_fixed(r.score.value * fmt.scale, fmt.decimals + 2)
            << " | " << format_fixed(r.test.w_plus, 1) << " | " << format_fixed(r.test.w_minus, 1) << " | "
            << r.test.n_effective << " | " << format_fixed(r.test.p_value, 6) << " | "
            << (r.test.degenerate ? "degenerate" : (r.test.exact ? "exact" : "normal approx.")) << " |\n";
    }

    out << "\nPer-seed minimum and maximum of significant scores";
    if (scores.single_seed) {
        out << " (single seed: extremes equal the score)";
    }
    out << ":\n\n| |";
    for (auto kind : kAllScores) {
        out << ' ' << score_header(kind) << " |";
    }
    out << "\n|---|---|---|---|---|\n| " << label << " |";
    for (const auto& r : scores.scores) {
        if (!r.test.significant) {
            out << " - |";
            continue;
        }
        out << " [" << format_fixed(r.seed_range.min * fmt.scale, fmt.decimals) << ", "
            << format_fixed(r.seed_range.max * fmt.scale, fmt.decimals) << "]" << (r.seed_range.sign_consistent ? "" : " (sign differs)")
            << " |";
    }
    out << "\n\nF1 conventions: a class or span set absent from both gold and predictions scores 1.0; "
           "zero true positives otherwise score 0.0. Orphan I- tags open a new span.\n";
    return out.str();
}

std::string render_summary_csv(const SummaryScores& scores) {
    std::ostringstream out;
    out << "quantity,value,p_value,significant,w_plus,w_minus,n_effective,exact,degenerate,seed_min,seed_max,"
           "sign_consistent\n";
    const std::pair<const char*, double> salient[] = {{"M_s^s+1", scores.salient.base},
                                                      {"M_s^n", scores.salient.longest_horizon},
                                                      {"M_n-1^n", scores.salient.latest_retrain}};
    for (const auto& [name, v] : salient) {
        out << name << ',' << format_roundtrip(v) << ",,,,,,,,,,\n";
    }
    for (const auto& r : scores.scores) {
        out << score_name(r.kind) << ',' << format_roundtrip(r.score.value) << ',' << format_roundtrip(r.test.p_value)
            << ',' << (r.test.significant ? "true" : "false") << ',' << format_roundtrip(r.test.w_plus) << ','
            << format_roundtrip(r.test.w_minus) << ',' << r.test.n_effective << ',' << (r.test.exact ? "true" : "false")
            << ',' << (r.test.degenerate ? "true" : "false") << ',' << format_roundtrip(r.seed_range.min) << ','
            << format_roundtrip(r.seed_range.max) << ',' << (r.seed_range.sign_consistent ? "true" : "false") << '\n';
    }
    return out.str();
}

std::string render_matrix(const EvaluationGrid& grid, const ReportFormat& fmt) {
    std::ostringstream out;
    char buf[64];
    out << "test\\train";
    const int n = grid.n();
    for (int i = 1; i < n; ++i) {
        std::snprintf(buf, sizeof(buf), "%8d", i);
        out << buf;
    }
    out << '\n';
    for (int j = 2; j <= n; ++j) {
        std::snprintf(buf, sizeof(buf), "%-10d", j);
        out << buf;
        for (int i = 1; i < n; ++i) {
            std::string cell = "-";
            if (i < j) {
                bool all = !grid.seeds().empty();
                bool failed = false;
                for (auto seed : grid.seeds()) {
                    all = all && grid.has(i, j, seed);
                    failed = failed || grid.failures().contains(CellKey{i, j, seed});
                }
                if (failed) {
                    cell = "fail";
                } else if (all) {
                    cell = format_fixed(grid.mean(i, j) * fmt.scale, fmt.decimals);
                }
            }
            std::snprintf(buf, sizeof(buf), "%8s", cell.c_str());
            out << buf;
        }
        out << '\n';
    }
    return out.str();
}

std::string render_adaptation_table(const std::vector<std::pair<std::string, SummaryScores>>& rows,
                                    const ReportFormat& fmt) {
    std::ostringstream out;
    out << "| method | A^a | p | A^{t-1} | p |\n|---|---|---|---|---|\n";
    for (const auto& [method, s] : rows) {
        const auto& aa = s.get(ScoreKind::AdaptationAnchor);
        const auto& ac = s.get(ScoreKind::AdaptationConsecutive);
        out << "| " << method << " | " << starred(aa, fmt) << " | " << format_fixed(aa.test.p_value, 4) << " | "
            << starred(ac, fmt) << " | " << format_fixed(ac.test.p_value, 4) << " |\n";
    }
    out << "\nAdaptation scores are measured against the gold model trained on the anchor split; an asterisk "
           "marks p < "
        << format_roundtrip(fmt.alpha) << ".\n";
    return out.str();
}

}// namespace tempdrift
