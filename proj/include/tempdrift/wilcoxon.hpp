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

#include <span>
#include <vector>

namespace tempdrift {

/// How zero differences enter the test. Wilcox drops them before ranking
/// (the classic procedure); Pratt ranks them and then drops their ranks.
enum class ZeroMethod { Wilcox, Pratt };

struct WilcoxonOptions {
    double alpha = 0.05;
    ZeroMethod zero_method = ZeroMethod::Wilcox;
    /// Exact null distribution up to this many non-zero differences, normal
    /// approximation (tie-corrected, with continuity correction) above.
    int exact_max_n = 25;
};

struct WilcoxonResult {
    double w_plus = 0.0;
    double w_minus = 0.0;
    double statistic = 0.0;// min(W+, W-)
    double p_value = 1.0;  // two-sided
    bool significant = false;
    bool degenerate = false;// every difference was zero
    bool exact = true;
    int n_effective = 0;
};

/// Two-sided Wilcoxon signed-rank test of zero median difference. Ties get
/// average ranks; two magnitudes count as tied when they agree to a relative
/// 1e-9, and a difference counts as zero below 1e-12 of the largest magnitude
/// (or 1e-12 absolute), so floating-point noise in differences of equal cells
/// does not break ties.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> diffs, const WilcoxonOptions& options = {});

/// Average ranks (1-based) of |values| with the tolerance rule above.
std::vector<double> average_ranks(std::span<const double> magnitudes);

}// namespace tempdrift
