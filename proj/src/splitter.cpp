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
#include "tempdrift/splitter.hpp"

#include "tempdrift/errors.hpp"
#include "tempdrift/rng.hpp"

#include <algorithm>
#include <unordered_map>

#include <json.hpp>

namespace tempdrift {

SplitPlan plan_splits(const TemporalDataset& dataset, int periods_per_split, std::uint64_t seed) {
    if (periods_per_split < 1) {
        throw UsageError("periods_per_split must be >= 1");
    }
    if (dataset.records.empty()) {
        throw DataError("cannot split an empty dataset");
    }

    SplitPlan plan;
    plan.periods_per_split = periods_per_split;
    plan.seed = seed;

    const auto first = dataset.period_range.first;
    const auto span = dataset.period_range.last - first + 1;
    plan.n = static_cast<int>((span + periods_per_split - 1) / periods_per_split);
    if (plan.n < 3) {
        throw DataError("need at least 3 temporal splits, got " + std::to_string(plan.n));
    }
    for (std::int64_t p = first; p <= dataset.period_range.last; ++p) {
        plan.period_map[p] = static_cast<int>((p - first) / periods_per_split) + 1;
    }

    std::vector<std::vector<const Record*>> members(plan.n);
    for (const auto& r : dataset.records) {
        members[plan.period_map.at(r.timestamp) - 1].push_back(&r);
    }
    std::size_t smallest = members.front().size();
    for (int t = 1; t <= plan.n; ++t) {
        if (members[t - 1].empty()) {
            throw DataError("temporal split " + std::to_string(t) + " has zero records");
        }
        smallest = std::min(smallest, members[t - 1].size());
    }
    plan.per_split_size = smallest;

    plan.split_record_ids.resize(plan.n);
    for (int t = 1; t <= plan.n; ++t) {
        const auto& group = members[t - 1];
        Rng rng(derive_seed(seed, "downsample", static_cast<std::uint64_t>(t)));
        auto& ids = plan.split_record_ids[t - 1];
        for (auto idx : rng.sample_indices(group.size(), smallest)) {
            ids.push_back(group[idx]->id);
        }
    }
    return plan;
}

std::vector<Record> split_records(const TemporalDataset& dataset, const SplitPlan& plan, int t) {
    if (t < 1 || t > plan.n) {
        throw UsageError("split index " + std::to_string(t) + " out of range [1, " + std::to_string(plan.n) + "]");
    }
    std::unordered_map<std::string_view, const Record*> by_id;
    by_id.reserve(dataset.records.size());
    for (const auto& r : dataset.records) {
        by_id.emplace(r.id, &r);
    }
    std::vector<Record> out;
    out.reserve(plan.split_record_ids[t - 1].size());
    for (const auto& id : plan.split_record_ids[t - 1]) {
        auto it = by_id.find(id);
        if (it == by_id.end()) {
            throw DataError("plan references unknown record id '" + id + "'");
        }
        out.push_back(*it->second);
    }
    return out;
}

std::size_t train_size_for(std::size_t split_size) {
    return round_half_up_fraction(split_size, 8, 10);
}

SplitViews materialize_split(const TemporalDataset& dataset, const SplitPlan& plan, int t, std::uint64_t seed) {
    SplitViews views;
    views.t = t;
    views.test = split_records(dataset, plan, t);

    std::vector<Record> shuffled = views.test;
    Rng rng(derive_seed(seed, "train-dev", static_cast<std::uint64_t>(t)));
    rng.shuffle(shuffled);

    const auto n_train = train_size_for(shuffled.size());
    views.train.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_train));
    views.dev.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(n_train), shuffled.end());
    return views;
}

std::string plan_to_json(const SplitPlan& plan) {
    nlohmann::ordered_json j;
    j["n"] = plan.n;
    j["periods_per_split"] = plan.periods_per_split;
    j["per_split_size"] = plan.per_split_size;
    j["seed"] = plan.seed;
    auto& pm = j["period_map"] = nlohmann::ordered_json::array();
    for (const auto& [period, t] : plan.period_map) {
        pm.push_back({period, t});
    }
    j["splits"] = plan.split_record_ids;
    return j.dump(2) + "\n";
}

SplitPlan plan_from_json(const std::string& text) {
    try {
        auto j = nlohmann::json::parse(text);
        SplitPlan plan;
        plan.n = j.at("n").get<int>();
        plan.periods_per_split = j.at("periods_per_split").get<int>();
        plan.per_split_size = j.at("per_split_size").get<std::size_t>();
        plan.seed = j.at("seed").get<std::uint64_t>();
        for (const auto& entry : j.at("period_map")) {
            plan.period_map[entry.at(0).get<std::int64_t>()] = entry.at(1).get<int>();
        }
        plan.split_record_ids = j.at("splits").get<std::vector<std::vector<std::string>>>();
        if (static_cast<int>(plan.split_record_ids.size()) != plan.n) {
            throw DataError("plan lists " + std::to_string(plan.split_record_ids.size()) + " splits but n = "
                            + std::to_string(plan.n));
        }
        return plan;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed plan JSON: ") + e.what());
    }
}

}// namespace tempdrift
