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

#include "tempdrift/metrics.hpp"

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tempdrift {

/// (train split i, test split j, seed). Splits are 1-based.
struct CellKey {
    int train = 0;
    int test = 0;
    std::int64_t seed = 0;

    auto operator<=>(const CellKey&) const = default;
};

/// Lower-triangular matrix M_i^j of task metrics, one value per seed. A cell
/// exists only for 1 <= i <= n-1 and i < j <= n: models are never scored on
/// their own split or on the past.
class EvaluationGrid {
  public:
    EvaluationGrid() = default;
    EvaluationGrid(int n, std::vector<std::int64_t> seeds);

    /// Single-seed grid from Table-1 style rows: rows[r] holds the values for
    /// test split r+2, trained on splits 1..r+1.
    static EvaluationGrid from_lower_triangle(const std::vector<std::vector<double>>& rows, std::int64_t seed = 0);

    static bool in_shape(int n, int train, int test) { return train >= 1 && train < test && test <= n; }

    int n() const { return n_; }
    const std::vector<std::int64_t>& seeds() const { return seeds_; }

    void set(int train, int test, std::int64_t seed, double value, std::optional<Counts> counts = std::nullopt);
    void mark_failed(int train, int test, std::int64_t seed, std::string reason);

    std::optional<double> value(int train, int test, std::int64_t seed) const;
    bool has(int train, int test, std::int64_t seed) const;

    /// Every in-shape cell has a value for every seed and nothing failed.
    bool complete() const;
    std::vector<CellKey> missing() const;

    /// Mean over seeds. Throws DataError if any seed is missing for the cell.
    double mean(int train, int test) const;

    /// The grid restricted to one seed.
    EvaluationGrid for_seed(std::int64_t seed) const;

    /// Number of (train, test) pairs in shape: n(n-1)/2.
    std::size_t pair_count() const { return static_cast<std::size_t>(n_ * (n_ - 1) / 2); }

    const std::map<CellKey, double>& cells() const { return cells_; }
    const std::map<CellKey, Counts>& counts() const { return counts_; }
    const std::map<CellKey, std::string>& failures() const { return failed_; }

    /// Moves cells of `other` (same n) into this grid, overwriting.
    void merge(const EvaluationGrid& other);

    bool operator==(const EvaluationGrid&) const = default;

  private:
    void check_key(int train, int test, std::int64_t seed) const;

    int n_ = 0;
    std::vector<std::int64_t> seeds_;
    std::map<CellKey, double> cells_;
    std::map<CellKey, Counts> counts_;
    std::map<CellKey, std::string> failed_;
};

/// CSV with header train_split,test_split,seed,metric_value[,tp,fp,fn].
/// Failed cells carry metric_value "failed". Rows are written in key order and
/// numbers in shortest round-trip form, so identical grids give identical bytes.
void write_grid_csv(std::ostream& out, const EvaluationGrid& grid);
void write_grid_csv(const std::filesystem::path& path, const EvaluationGrid& grid);

/// n is inferred from the largest split index unless given.
EvaluationGrid read_grid_csv(std::istream& in, std::optional<int> n = std::nullopt);
EvaluationGrid read_grid_csv(const std::filesystem::path& path, std::optional<int> n = std::nullopt);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Shortest decimal string that parses back to exactly `value`.
std::string format_roundtrip(double value);

}// namespace tempdrift
