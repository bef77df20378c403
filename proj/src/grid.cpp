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
#include "tempdrift/grid.hpp"

#include "tempdrift/errors.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace tempdrift {

EvaluationGrid::EvaluationGrid(int n, std::vector<std::int64_t> seeds) : n_(n), seeds_(std::move(seeds)) {
    std::sort(seeds_.begin(), seeds_.end());
    seeds_.erase(std::unique(seeds_.begin(), seeds_.end()), seeds_.end());
    if (n_ < 0) {
        throw UsageError("grid size must be non-negative");
    }
}

EvaluationGrid EvaluationGrid::from_lower_triangle(const std::vector<std::vector<double>>& rows, std::int64_t seed) {
    const int n = static_cast<int>(rows.size()) + 1;
    EvaluationGrid grid(n, {seed});
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const int test = static_cast<int>(r) + 2;
        if (static_cast<int>(rows[r].size()) != test - 1) {
            throw DataError("row for test split " + std::to_string(test) + " needs " + std::to_string(test - 1)
                            + " values");
        }
        for (int train = 1; train < test; ++train) {
            grid.set(train, test, seed, rows[r][static_cast<std::size_t>(train - 1)]);
        }
    }
    return grid;
}

void EvaluationGrid::check_key(int train, int test, std::int64_t seed) const {
    if (!in_shape(n_, train, test)) {
        throw DataError("cell (train " + std::to_string(train) + ", test " + std::to_string(test)
                        + ") is outside the lower-triangular grid of size " + std::to_string(n_));
    }
    if (!std::binary_search(seeds_.begin(), seeds_.end(), seed)) {
        throw DataError("seed " + std::to_string(seed) + " is not in the grid's seed set");
    }
}

void EvaluationGrid::set(int train, int test, std::int64_t seed, double value, std::optional<Counts> counts) {
    check_key(train, test, seed);
    const CellKey key{train, test, seed};
    cells_[key] = value;
    failed_.erase(key);
    if (counts) {
        counts_[key] = *counts;
    } else {
        counts_.erase(key);
    }
}

void EvaluationGrid::mark_failed(int train, int test, std::int64_t seed, std::string reason) {
    check_key(train, test, seed);
    const CellKey key{train, test, seed};
    cells_.erase(key);
    counts_.erase(key);
    failed_[key] = std::move(reason);
}

std::optional<double> EvaluationGrid::value(int train, int test, std::int64_t seed) const {
    auto it = cells_.find(CellKey{train, test, seed});
    if (it == cells_.end()) {
        return std::nullopt;
    }
    return it->second;
}

bool EvaluationGrid::has(int train, int test, std::int64_t seed) const {
    return cells_.contains(CellKey{train, test, seed});
}

std::vector<CellKey> EvaluationGrid::missing() const {
    std::vector<CellKey> out;
    for (int i = 1; i < n_; ++i) {
        for (int j = i + 1; j <= n_; ++j) {
            for (auto seed : seeds_) {
                if (!has(i, j, seed)) {
                    out.push_back({i, j, seed});
                }
            }
        }
    }
    return out;
}

bool EvaluationGrid::complete() const {
    return !seeds_.empty() && failed_.empty() && cells_.size() == pair_count() * seeds_.size();
}

double EvaluationGrid::mean(int train, int test) const {
    if (seeds_.empty()) {
        throw DataError("grid has no seeds");
    }
    double sum = 0.0;
    for (auto seed : seeds_) {
        auto v = value(train, test, seed);
        if (!v) {
            throw DataError("incomplete grid: no value for (train " + std::to_string(train) + ", test "
                            + std::to_string(test) + ", seed " + std::to_string(seed) + ")");
        }
        sum += *v;
    }
    return sum / static_cast<double>(seeds_.size());
}

EvaluationGrid EvaluationGrid::for_seed(std::int64_t seed) const {
    EvaluationGrid out(n_, {seed});
    for (const auto& [key, v] : cells_) {
        if (key.seed == seed) {
            out.cells_[key] = v;
        }
    }
    for (const auto& [key, c] : counts_) {
        if (key.seed == seed) {
            out.counts_[key] = c;
        }
    }
    for (const auto& [key, r] : failed_) {
        if (key.seed == seed) {
            out.failed_[key] = r;
        }
    }
    return out;
}

void EvaluationGrid::merge(const EvaluationGrid& other) {
    if (other.n_ != n_) {
        throw DataError("cannot merge grids of different sizes");
    }
    for (const auto& [key, v] : other.cells_) {
        std::optional<Counts> c;
        if (auto it = other.counts_.find(key); it != other.counts_.end()) {
            c = it->second;
        }
        set(key.train, key.test, key.seed, v, c);
    }
    for (const auto& [key, reason] : other.failed_) {
        mark_failed(key.train, key.test, key.seed, reason);
    }
}

std::string format_roundtrip(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

void write_grid_csv(std::ostream& out, const EvaluationGrid& grid) {
    out << "train_split,test_split,seed,metric_value,tp,fp,fn\n";
    std::set<CellKey> keys;
    for (const auto& [key, v] : grid.cells()) {
        keys.insert(key);
    }
    for (const auto& [key, r] : grid.failures()) {
        keys.insert(key);
    }
    for (const auto& key : keys) {
        out << key.train << ',' << key.test << ',' << key.seed << ',';
        if (auto v = grid.value(key.train, key.test, key.seed)) {
            out << format_roundtrip(*v);
            if (auto it = grid.counts().find(key); it != grid.counts().end()) {
                out << ',' << it->second.tp << ',' << it->second.fp << ',' << it->second.fn;
            } else {
                out << ",,,";
            }
        } else {
            out << "failed,,,";
        }
        out << '\n';
    }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    // Write-then-rename so an interrupted run never leaves a torn file behind.
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) {
            throw DataError("cannot write " + tmp.string());
        }
        out << content;
        if (!out.flush()) {
            throw DataError("cannot write " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

void write_grid_csv(const std::filesystem::path& path, const EvaluationGrid& grid) {
    std::ostringstream out;
    write_grid_csv(out, grid);
    write_file_atomic(path, out.str());
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

template <typename T>
T parse_number(const std::string& text, std::size_t line_no, const char* what) {
    T value{};
    const auto* end = text.data() + text.size();
    auto res = std::from_chars(text.data(), end, value);
    if (res.ec != std::errc() || res.ptr != end) {
        throw DataError("grid CSV line " + std::to_string(line_no) + ": bad " + what + " '" + text + "'");
    }
    return value;
}

struct Row {
    CellKey key;
    std::optional<double> value;
    std::optional<Counts> counts;
};

}// namespace

EvaluationGrid read_grid_csv(std::istream& in, std::optional<int> n) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) {
        throw DataError("grid CSV is empty");
    }
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    const auto header = split_csv_line(line);
    if (header.size() < 4 || header[0] != "train_split" || header[1] != "test_split" || header[2] != "seed"
        || header[3] != "metric_value") {
        throw DataError("grid CSV header must start with train_split,test_split,seed,metric_value");
    }

    std::vector<Row> rows;
    std::set<std::int64_t> seeds;
    int max_split = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        auto f = split_csv_line(line);
        if (f.size() < 4) {
            throw DataError("grid CSV line " + std::to_string(line_no) + ": expected at least 4 fields");
        }
        Row row;
        row.key.train = parse_number<int>(f[0], line_no, "train_split");
        row.key.test = parse_number<int>(f[1], line_no, "test_split");
        row.key.seed = parse_number<std::int64_t>(f[2], line_no, "seed");
        if (f[3] != "failed") {
            row.value = parse_number<double>(f[3], line_no, "metric_value");
            if (f.size() >= 7 && !f[4].empty()) {
                row.counts = Counts{parse_number<long>(f[4], line_no, "tp"), parse_number<long>(f[5], line_no, "fp"),
                                    parse_number<long>(f[6], line_no, "fn")};
            }
        }
        seeds.insert(row.key.seed);
        max_split = std::max({max_split, row.key.train, row.key.test});
        rows.push_back(std::move(row));
    }

    EvaluationGrid grid(n.value_or(max_split), std::vector<std::int64_t>(seeds.begin(), seeds.end()));
    for (const auto& row : rows) {
        if (row.value) {
            grid.set(row.key.train, row.key.test, row.key.seed, *row.value, row.counts);
        } else {
            grid.mark_failed(row.key.train, row.key.test, row.key.seed, "failed");
        }
    }
    return grid;
}

EvaluationGrid read_grid_csv(const std::filesystem::path& path, std::optional<int> n) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    return read_grid_csv(in, n);
}

}// namespace tempdrift
