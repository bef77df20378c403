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
#include "tempdrift/summary.hpp"

#include "tempdrift/errors.hpp"

#include <algorithm>
#include <numeric>

namespace tempdrift {

std::string score_name(ScoreKind kind) {
    switch (kind) {
        case ScoreKind::DeteriorationAnchor: return "DS_anchor";
        case ScoreKind::AdaptationAnchor: return "AS_anchor";
        case ScoreKind::DeteriorationConsecutive: return "DS_consecutive";
        case ScoreKind::AdaptationConsecutive: return "AS_consecutive";
    }
    return {};
}

std::string score_header(ScoreKind kind) {
    switch (kind) {
        case ScoreKind::DeteriorationAnchor: return "D^a";
        case ScoreKind::AdaptationAnchor: return "A^a";
        case ScoreKind::DeteriorationConsecutive: return "D^{t-1}";
        case ScoreKind::AdaptationConsecutive: return "A^{t-1}";
    }
    return {};
}

namespace {

/// Mean values of the complete grid, indexed [train][test].
class MeanMatrix {
  public:
    explicit MeanMatrix(const EvaluationGrid& grid) : n_(grid.n()) {
        if (n_ < 3) {
            throw DataError("summary scores need at least 3 splits, grid has " + std::to_string(n_));
        }
        if (!grid.failures().empty()) {
            throw DataError("grid contains failed cells");
        }
        values_.assign(static_cast<std::size_t>((n_ + 1) * (n_ + 1)), 0.0);
        for (int i = 1; i < n_; ++i) {
            for (int j = i + 1; j <= n_; ++j) {
                values_[index(i, j)] = grid.mean(i, j);
            }
        }
    }
    int n() const { return n_; }
    double operator()(int train, int test) const { return values_[index(train, test)]; }

  private:
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(i * (n_ + 1) + j); }
    int n_;
    std::vector<double> values_;
};

DiffScore finish(std::vector<double> diffs) {
    DiffScore s;
    s.value = diffs.empty() ? 0.0 : std::accumulate(diffs.begin(), diffs.end(), 0.0) / static_cast<double>(diffs.size());
    s.diffs = std::move(diffs);
    return s;
}

// Column i is the model trained on split i; its rows are tests i+1..n.
DiffScore score_on(ScoreKind kind, const MeanMatrix& m) {
    const int n = m.n();
    std::vector<double> d;
    d.reserve(diff_count(n));
    switch (kind) {
        case ScoreKind::DeteriorationConsecutive:
            for (int i = 1; i <= n - 2; ++i) {
                for (int j = i + 1; j < n; ++j) {
                    d.push_back(m(i, j + 1) - m(i, j));
                }
            }
            break;
        case ScoreKind::DeteriorationAnchor:
            for (int i = 1; i <= n - 2; ++i) {
                for (int j = i + 2; j <= n; ++j) {
                    d.push_back(m(i, j) - m(i, i + 1));
                }
            }
            break;
        case ScoreKind::AdaptationConsecutive:
            for (int j = 3; j <= n; ++j) {
                for (int i = 1; i + 1 < j; ++i) {
                    d.push_back(m(i + 1, j) - m(i, j));
                }
            }
            break;
        case ScoreKind::AdaptationAnchor:
            for (int j = 3; j <= n; ++j) {
                for (int i = 2; i < j; ++i) {
                    d.push_back(m(i, j) - m(1, j));
                }
            }
            break;
    }
    return finish(std::move(d));
}

}// namespace

DiffScore compute_score(ScoreKind kind, const EvaluationGrid& grid) {
    return score_on(kind, MeanMatrix(grid));
}

DiffScore deterioration_consecutive(const EvaluationGrid& grid) {
    return compute_score(ScoreKind::DeteriorationConsecutive, grid);
}
DiffScore deterioration_anchor(const EvaluationGrid& grid) {
    return compute_score(ScoreKind::DeteriorationAnchor, grid);
}
DiffScore adaptation_consecutive(const EvaluationGrid& grid) {
    return compute_score(ScoreKind::AdaptationConsecutive, grid);
}
DiffScore adaptation_anchor(const EvaluationGrid& grid) {
    return compute_score(ScoreKind::AdaptationAnchor, grid);
}

SalientValues salient_values(const EvaluationGrid& grid) {
    if (grid.n() < 2) {
        throw DataError("salient values need at least 2 splits");
    }
    const int n = grid.n();
    return {grid.mean(1, 2), grid.mean(1, n), grid.mean(n - 1, n)};
}

SeedExtremes seed_extremes(const EvaluationGrid& grid) {
    SeedExtremes out;
    out.single_seed = grid.seeds().size() < 2;
    for (std::size_t k = 0; k < kAllScores.size(); ++k) {
        bool first = true;
        for (auto seed : grid.seeds()) {
            const double v = compute_score(kAllScores[k], grid.for_seed(seed)).value;
            auto& r = out.ranges[k];
            if (first) {
                r.min = r.max = v;
                first = false;
            } else {
                r.min = std::min(r.min, v);
                r.max = std::max(r.max, v);
            }
        }
        auto& r = out.ranges[k];
        r.sign_consistent = (r.min > 0 && r.max > 0) || (r.min < 0 && r.max < 0) || (r.min == 0 && r.max == 0);
    }
    return out;
}

SummaryScores summarize(const EvaluationGrid& grid, const SummaryOptions& options) {
    if (!grid.complete()) {
        const auto missing = grid.missing();
        std::string detail = missing.empty() ? "failed cells present"
                                             : "first missing cell (train " + std::to_string(missing.front().train)
                                                   + ", test " + std::to_string(missing.front().test) + ", seed "
                                                   + std::to_string(missing.front().seed) + ")";
        throw DataError("refusing to summarize an incomplete grid: " + std::to_string(missing.size())
                        + " cells missing or failed; " + detail);
    }
    const MeanMatrix mean(grid);
    SummaryScores out;
    out.n = grid.n();
    out.seed_count = grid.seeds().size();
    out.salient = salient_values(grid);
    const auto extremes = seed_extremes(grid);
    out.single_seed = extremes.single_seed;
    for (std::size_t k = 0; k < kAllScores.size(); ++k) {
        auto& r = out.scores[k];
        r.kind = kAllScores[k];
        r.score = score_on(r.kind, mean);
        r.test = wilcoxon_signed_rank(r.score.diffs, options.wilcoxon);
        r.seed_range = extremes.ranges[k];
    }
    return out;
}

}// namespace tempdrift
