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
#include "tempdrift/wilcoxon.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace tempdrift {

/// The four summary scores, in summary-table column order.
enum class ScoreKind {
    DeteriorationAnchor,     // D^a: each column against its first test row
    AdaptationAnchor,        // A^a: each train column against the d_s column
    DeteriorationConsecutive,// D^{t-1}: consecutive test rows within a column
    AdaptationConsecutive,   // A^{t-1}: consecutive train columns within a row
};

inline constexpr std::array<ScoreKind, 4> kAllScores = {ScoreKind::DeteriorationAnchor, ScoreKind::AdaptationAnchor,
                                                        ScoreKind::DeteriorationConsecutive,
                                                        ScoreKind::AdaptationConsecutive};

std::string score_name(ScoreKind kind);  // "DS_anchor", ...
std::string score_header(ScoreKind kind);// "D^a", ...

/// A score and the differences it averages.
struct DiffScore {
    double value = 0.0;
    std::vector<double> diffs;
};

/// Number of differences behind every score of an n-split grid: (n-1)(n-2)/2.
constexpr std::size_t diff_count(int n) {
    return n < 3 ? 0 : static_cast<std::size_t>((n - 1) * (n - 2) / 2);
}

/// Scores on the mean-over-seeds grid. All throw DataError for n < 3 or an
/// incomplete grid.
DiffScore deterioration_consecutive(const EvaluationGrid& grid);
DiffScore deterioration_anchor(const EvaluationGrid& grid);
DiffScore adaptation_consecutive(const EvaluationGrid& grid);
DiffScore adaptation_anchor(const EvaluationGrid& grid);
DiffScore compute_score(ScoreKind kind, const EvaluationGrid& grid);

/// (M_s^{s+1}, M_s^n, M_{n-1}^n) of the mean grid.
struct SalientValues {
    double base = 0.0;          // first row, first column
    double longest_horizon = 0.0;// last row, first column
    double latest_retrain = 0.0; // last row, last column
};

SalientValues salient_values(const EvaluationGrid& grid);

struct SeedRange {
    double min = 0.0;
    double max = 0.0;
    /// min and max share a sign (or both are zero).
    bool sign_consistent = true;
};

struct SeedExtremes {
    std::array<SeedRange, 4> ranges;// indexed like kAllScores
    /// Only one seed: extremes collapse onto the score itself.
    bool single_seed = false;
};

/// Recomputes each score on every per-seed grid and reports min/max.
SeedExtremes seed_extremes(const EvaluationGrid& grid);

struct ScoreResult {
    ScoreKind kind = ScoreKind::DeteriorationAnchor;
    DiffScore score;
    WilcoxonResult test;
    SeedRange seed_range;
};

struct SummaryOptions {
    WilcoxonOptions wilcoxon;
};

struct SummaryScores {
    int n = 0;
    std::size_t seed_count = 0;
    SalientValues salient;
    std::array<ScoreResult, 4> scores;// indexed like kAllScores
    bool single_seed = false;

    const ScoreResult& get(ScoreKind kind) const { return scores[static_cast<std::size_t>(kind)]; }
};

/// Scores and significance on the mean grid, plus per-seed extremes. Refuses
/// incomplete grids.
SummaryScores summarize(const EvaluationGrid& grid, const SummaryOptions& options = {});

}// namespace tempdrift
