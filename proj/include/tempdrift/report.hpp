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
#include "tempdrift/summary.hpp"

#include <string>
#include <utility>
#include <vector>

namespace tempdrift {

/// Presentation settings. Grid values live in [0, 1]; tables show them scaled
/// (x100 by default) and rounded only here.
struct ReportFormat {
    double scale = 100.0;
    int decimals = 1;
    double alpha = 0.05;
};

/// Fixed-point with `decimals` digits; never prints a negative zero.
std::string format_fixed(double value, int decimals);

/// "55.2  54.1  63.0  -1.3  4.1*  -0.1  2.1*": salient triple then D^a, A^a,
/// D^{t-1}, A^{t-1}, asterisk on significant scores.
std::string render_summary_row(const SummaryScores& scores, const ReportFormat& fmt = {});

/// Markdown report: summary table, test details, per-seed extremes table for
/// significant scores and the F1 conventions in force.
std::string render_summary_markdown(const SummaryScores& scores, const std::string& label,
                                    const ReportFormat& fmt = {});

/// Machine-readable summary at full precision.
std::string render_summary_csv(const SummaryScores& scores);

/// Lower-triangular table: train splits as columns, test splits as rows,
/// "-" for missing cells, "fail" for failed ones.
std::string render_matrix(const EvaluationGrid& grid, const ReportFormat& fmt = {});

/// Adaptation scores w.r.t. the anchor per method (Gold / Pretrain / Self-Label rows).
std::string render_adaptation_table(const std::vector<std::pair<std::string, SummaryScores>>& rows,
                                    const ReportFormat& fmt = {.scale = 100.0, .decimals = 2, .alpha = 0.05});

}// namespace tempdrift
