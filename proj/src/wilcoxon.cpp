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
#include "tempdrift/wilcoxon.hpp"

#include "tempdrift/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tempdrift {

namespace {

constexpr double kTieRelTol = 1e-9;
constexpr double kZeroTol = 1e-12;

bool tied(double a, double b) {
    return std::abs(a - b) <= kTieRelTol * std::max(std::abs(a), std::abs(b));
}

/// P(T <= t2) under the null where T (doubled) is the sum of a random subset
/// of the doubled ranks. Counting subsets by dynamic programming equals full
/// sign enumeration; counts stay exact in double up to 2^53.
double exact_lower_tail(const std::vector<long>& doubled_ranks, long t2) {
    const long total = std::accumulate(doubled_ranks.begin(), doubled_ranks.end(), 0L);
    std::vector<double> ways(static_cast<std::size_t>(total) + 1, 0.0);
    ways[0] = 1.0;
    long reach = 0;
    for (long r : doubled_ranks) {
        for (long s = reach; s >= 0; --s) {
            if (ways[static_cast<std::size_t>(s)] != 0.0) {
                ways[static_cast<std::size_t>(s + r)] += ways[static_cast<std::size_t>(s)];
            }
        }
        reach += r;
    }
    double below = 0.0;
    for (long s = 0; s <= std::min(t2, total); ++s) {
        below += ways[static_cast<std::size_t>(s)];
    }
    return below / std::ldexp(1.0, static_cast<int>(doubled_ranks.size()));
}

}// namespace

std::vector<double> average_ranks(std::span<const double> magnitudes) {
    const std::size_t n = magnitudes.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(magnitudes[a]) < std::abs(magnitudes[b]); });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i + 1;
        while (j < n && tied(std::abs(magnitudes[order[j - 1]]), std::abs(magnitudes[order[j]]))) {
            ++j;
        }
        // positions i..j-1 share ranks i+1..j
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            ranks[order[k]] = avg;
        }
        i = j;
    }
    return ranks;
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> diffs, const WilcoxonOptions& options) {
    if (diffs.empty()) {
        throw UsageError("wilcoxon_signed_rank: empty difference vector");
    }
    if (!(options.alpha > 0.0 && options.alpha < 1.0)) {
        throw UsageError("wilcoxon_signed_rank: alpha must lie in (0, 1)");
    }
    double scale = 0.0;
    for (double d : diffs) {
        if (!std::isfinite(d)) {
            throw UsageError("wilcoxon_signed_rank: non-finite difference");
        }
        scale = std::max(scale, std::abs(d));
    }
    const double zero_cut = kZeroTol * std::max(1.0, scale);
    auto is_zero = [&](double d) { return std::abs(d) <= zero_cut; };

    std::vector<double> ranked;// values that take part in ranking
    for (double d : diffs) {
        if (options.zero_method == ZeroMethod::Pratt || !is_zero(d)) {
            ranked.push_back(is_zero(d) ? 0.0 : d);
        }
    }

    WilcoxonResult res;
    const auto ranks = average_ranks(ranked);

    // Doubled ranks are integers (sum of two integer positions).
    std::vector<long> doubled;
    std::vector<double> kept_ranks;
    for (std::size_t k = 0; k < ranked.size(); ++k) {
        if (ranked[k] == 0.0) {
            continue;
        }
        kept_ranks.push_back(ranks[k]);
        doubled.push_back(std::lround(2.0 * ranks[k]));
        (ranked[k] > 0 ? res.w_plus : res.w_minus) += ranks[k];
    }
    res.n_effective = static_cast<int>(doubled.size());
    res.statistic = std::min(res.w_plus, res.w_minus);

    if (res.n_effective == 0) {
        res.degenerate = true;
        res.p_value = 1.0;
        res.significant = false;
        return res;
    }

    if (res.n_effective <= options.exact_max_n) {
        res.exact = true;
        const long t2 = std::lround(2.0 * res.statistic);
        res.p_value = std::min(1.0, 2.0 * exact_lower_tail(doubled, t2));
    } else {
        res.exact = false;
        double total = 0.0, var = 0.0;
        for (double r : kept_ranks) {
            total += r;
            var += r * r;
        }
        const double mean = total / 2.0;
        var /= 4.0;
        const double dev = std::max(0.0, std::abs(res.w_plus - mean) - 0.5);
        const double z = var > 0.0 ? dev / std::sqrt(var) : 0.0;
        res.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
    }
    res.significant = res.p_value < options.alpha;
    return res;
}

}// namespace tempdrift
