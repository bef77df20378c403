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
#include "tempdrift/record.hpp"

#include "tempdrift/errors.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace tempdrift {

using ordered_json = nlohmann::ordered_json;

std::string to_string(Task task) {
    return task == Task::Classification ? "classification" : "sequence-labeling";
}

Task parse_task(const std::string& text) {
    if (text == "classification") {
        return Task::Classification;
    }
    if (text == "sequence-labeling" || text == "tagging") {
        return Task::SequenceLabeling;
    }
    throw UsageError("unknown task '" + text + "' (expected classification or sequence-labeling)");
}

UnlabeledRecord strip_label(const Record& record) {
    return UnlabeledRecord{record.id, record.timestamp, record.tokens};
}

std::vector<UnlabeledRecord> strip_labels(const std::vector<Record>& records) {
    std::vector<UnlabeledRecord> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        out.push_back(strip_label(r));
    }
    return out;
}

std::string bio_type(const std::string& tag) {
    if (tag == "O") {
        return {};
    }
    if (tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-') {
        return tag.substr(2);
    }
    throw DataError("unknown tag scheme: '" + tag + "'");
}

void sort_canonical(std::vector<Record>& records) {
    std::stable_sort(records.begin(), records.end(), [](const Record& a, const Record& b) {
        return std::tie(a.timestamp, a.id) < std::tie(b.timestamp, b.id);
    });
}

TemporalDataset make_dataset(Task task, std::vector<Record> records, std::vector<std::string> declared_labels) {
    TemporalDataset ds;
    ds.task = task;
    ds.records = std::move(records);
    sort_canonical(ds.records);

    std::set<std::string> inventory(declared_labels.begin(), declared_labels.end());
    for (const auto& r : ds.records) {
        if (const auto* cls = std::get_if<std::string>(&r.label)) {
            inventory.insert(*cls);
        } else {
            for (const auto& tag : std::get<TagSequence>(r.label)) {
                try {
                    if (auto type = bio_type(tag); !type.empty()) {
                        inventory.insert(type);
                    }
                } catch (const DataError&) {
                    // reported by validate()
                }
            }
        }
    }
    ds.label_inventory.assign(inventory.begin(), inventory.end());
    if (!ds.records.empty()) {
        ds.period_range = {ds.records.front().timestamp, ds.records.back().timestamp};
    }

    if (auto violations = validate(ds); !violations.empty()) {
        throw DataError("invalid dataset: record '" + violations.front().record_id + "': " + violations.front().message
                        + (violations.size() > 1 ? " (and " + std::to_string(violations.size() - 1) + " more)" : ""));
    }
    return ds;
}

std::vector<Violation> validate(const TemporalDataset& dataset) {
    std::vector<Violation> out;
    const std::set<std::string> inventory(dataset.label_inventory.begin(), dataset.label_inventory.end());
    std::set<std::string> seen_ids;

    for (const auto& r : dataset.records) {
        std::vector<std::string> problems;
        if (r.tokens.empty()) {
            problems.emplace_back("empty token sequence");
        }
        if (!seen_ids.insert(r.id).second) {
            problems.emplace_back("duplicate id");
        }
        if (!dataset.period_range.contains(r.timestamp)) {
            problems.push_back("timestamp " + std::to_string(r.timestamp) + " outside period range");
        }
        if (dataset.task == Task::Classification) {
            if (const auto* cls = std::get_if<std::string>(&r.label)) {
                if (!inventory.contains(*cls)) {
                    problems.push_back("label '" + *cls + "' not in inventory");
                }
            } else {
                problems.emplace_back("tag sequence on a classification record");
            }
        } else if (const auto* tags = std::get_if<TagSequence>(&r.label)) {
            if (tags->size() != r.tokens.size()) {
                problems.emplace_back("label/token length mismatch");
            }
            for (const auto& tag : *tags) {
                try {
                    auto type = bio_type(tag);
                    if (!type.empty() && !inventory.contains(type)) {
                        problems.push_back("tag '" + tag + "' uses type outside inventory");
                        break;
                    }
                } catch (const DataError& e) {
                    problems.emplace_back(e.what());
                    break;
                }
            }
        } else {
            problems.emplace_back("class label on a sequence-labeling record");
        }

        if (!problems.empty()) {
            std::string msg = problems.front();
            for (std::size_t i = 1; i < problems.size(); ++i) {
                msg += "; " + problems[i];
            }
            out.push_back({r.id, msg});
        }
    }
    return out;
}

TemporalDataset truncate_tokens(const TemporalDataset& dataset, std::size_t k) {
    if (k == 0) {
        throw UsageError("truncate_tokens: k must be >= 1");
    }
    if (dataset.task != Task::Classification) {
        throw UsageError("truncate_tokens applies to classification datasets only (tags would desynchronize)");
    }
    TemporalDataset out = dataset;
    for (auto& r : out.records) {
        if (r.tokens.size() > k) {
            r.tokens.resize(k);
        }
    }
    return out;
}

namespace {

std::int64_t parse_timestamp(const ordered_json& value) {
    if (value.is_number_integer()) {
        return value.get<std::int64_t>();
    }
    if (value.is_string()) {
        const auto& s = value.get_ref<const std::string&>();
        // Plain integers or ISO dates; ISO dates reduce to their year.
        std::size_t digits = 0;
        bool negative = !s.empty() && s[0] == '-';
        for (std::size_t i = negative ? 1 : 0; i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])); ++i) {
            ++digits;
        }
        if (digits > 0) {
            const std::size_t start = negative ? 1 : 0;
            if (start + digits == s.size()) {
                return std::stoll(s);
            }
            if (!negative && digits == 4 && s[4] == '-') {
                return std::stoll(s.substr(0, 4));
            }
        }
    }
    throw DataError("timestamp must be an integer period key or an ISO date");
}

Record parse_record(const std::string& line, Task task) {
    ordered_json j;
    try {
        j = ordered_json::parse(line);
    } catch (const ordered_json::parse_error&) {
        throw DataError("malformed JSON");
    }
    if (!j.is_object()) {
        throw DataError("record must be a JSON object");
    }
    Record r;
    try {
        if (!j.contains("id")) {
            throw DataError("missing field 'id'");
        }
        r.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
        if (!j.contains("timestamp")) {
            throw DataError("missing field 'timestamp'");
        }
        r.timestamp = parse_timestamp(j.at("timestamp"));
        if (!j.contains("tokens") || !j.at("tokens").is_array()) {
            throw DataError("missing or non-array field 'tokens'");
        }
        r.tokens = j.at("tokens").get<std::vector<std::string>>();
        if (r.tokens.empty()) {
            throw DataError("empty token sequence");
        }
        if (task == Task::Classification) {
            if (!j.contains("label") || !j.at("label").is_string()) {
                throw DataError("classification record needs a string 'label'");
            }
            r.label = j.at("label").get<std::string>();
        } else {
            if (!j.contains("tags") || !j.at("tags").is_array()) {
                throw DataError("sequence-labeling record needs a 'tags' array");
            }
            auto tags = j.at("tags").get<TagSequence>();
            if (tags.size() != r.tokens.size()) {
                throw DataError("label/token length mismatch");
            }
            for (const auto& tag : tags) {
                bio_type(tag);
            }
            r.label = std::move(tags);
        }
        if (j.contains("meta")) {
            r.meta = j.at("meta").get<std::map<std::string, std::string>>();
        }
    } catch (const ordered_json::exception& e) {
        throw DataError(std::string("bad field type: ") + e.what());
    }
    return r;
}

}// namespace

TemporalDataset ingest(std::istream& in, Task task) {
    std::vector<Record> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        try {
            records.push_back(parse_record(line, task));
        } catch (const DataError& e) {
            throw DataError(std::string(e.what()) + " at line " + std::to_string(line_no));
        }
    }
    if (records.empty()) {
        throw DataError("empty file: no records");
    }
    return make_dataset(task, std::move(records));
}

TemporalDataset ingest(const std::filesystem::path& path, Task task) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    return ingest(in, task);
}

std::string record_to_json(const Record& record, Task task, bool with_label) {
    ordered_json j;
    j["id"] = record.id;
    j["timestamp"] = record.timestamp;
    j["tokens"] = record.tokens;
    if (with_label) {
        if (task == Task::Classification) {
            j["label"] = std::get<std::string>(record.label);
        } else {
            j["tags"] = std::get<TagSequence>(record.label);
        }
    }
    if (!record.meta.empty()) {
        j["meta"] = record.meta;
    }
    return j.dump();
}

void emit(std::ostream& out, const TemporalDataset& dataset) {
    for (const auto& r : dataset.records) {
        out << record_to_json(r, dataset.task) << '\n';
    }
}

void emit(const std::filesystem::path& path, const TemporalDataset& dataset) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    emit(out, dataset);
}

}// namespace tempdrift
