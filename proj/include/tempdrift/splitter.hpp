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

#include "tempdrift/record.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace tempdrift {

/// n equal-size temporal splits. Split indices are 1-based: split 1 is the
/// oldest (d_s), split n the latest.
struct SplitPlan {
    int n = 0;
    int periods_per_split = 1;
    std::size_t per_split_size = 0;
    std::uint64_t seed = 0;
    /// period key -> split index, for every key in the dataset's period range.
    std::map<std::int64_t, int> period_map;
    /// Per split (index t-1), the retained record ids in canonical order.
    std::vector<std::vector<std::string>> split_record_ids;

    bool operator==(const SplitPlan&) const = default;
};

/// train_t / dev_t drawn from split t; test_t is the whole split.
struct SplitViews {
    int t = 0;
    std::vector<Record> train;
    std::vector<Record> dev;
    std::vector<Record> test;
};

/// Groups `periods_per_split` consecutive period keys per split and downsamples
/// every split (seeded, without replacement) to the size of the smallest one.
SplitPlan plan_splits(const TemporalDataset& dataset, int periods_per_split, std::uint64_t seed);

/// Seeded 80/20 train/dev partition of split t (train size rounded half up).
SplitViews materialize_split(const TemporalDataset& dataset, const SplitPlan& plan, int t, std::uint64_t seed);

/// The records of split t in canonical order (same as the test view).
std::vector<Record> split_records(const TemporalDataset& dataset, const SplitPlan& plan, int t);

std::size_t train_size_for(std::size_t split_size);

std::string plan_to_json(const SplitPlan& plan);
SplitPlan plan_from_json(const std::string& text);

}// namespace tempdrift
