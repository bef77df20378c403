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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace tempdrift {

enum class Task { SequenceLabeling, Classification };

std::string to_string(Task task);
Task parse_task(const std::string& text);

using TagSequence = std::vector<std::string>;

/// One class label (classification) or one BIO tag per token (sequence labeling).
using Label = std::variant<std::string, TagSequence>;

/// Where a record's label came from. Self-labeled records are marked so that
/// adaptation code and audits can tell pseudo-labels from annotations.
enum class LabelOrigin { Gold, Predicted };

struct Record {
    std::string id;
    std::int64_t timestamp = 0;
    std::vector<std::string> tokens;
    Label label;
    std::map<std::string, std::string> meta;
    LabelOrigin origin = LabelOrigin::Gold;

    bool operator==(const Record&) const = default;
};

/// A record with its label removed. Adaptation hands these to labelers so that
/// gold annotations of an unlabeled split cannot leak.
struct UnlabeledRecord {
    std::string id;
    std::int64_t timestamp = 0;
    std::vector<std::string> tokens;

    bool operator==(const UnlabeledRecord&) const = default;
};

UnlabeledRecord strip_label(const Record& record);
std::vector<UnlabeledRecord> strip_labels(const std::vector<Record>& records);

struct PeriodRange {
    std::int64_t first = 0;
    std::int64_t last = 0;

    bool contains(std::int64_t period) const { return period >= first && period <= last; }
    bool operator==(const PeriodRange&) const = default;
};

struct TemporalDataset {
    Task task = Task::Classification;
    std::vector<Record> records;
    /// Class names (classification) or span type names (sequence labeling), sorted.
    std::vector<std::string> label_inventory;
    PeriodRange period_range;

    bool operator==(const TemporalDataset&) const = default;
};

/// Sorts records canonically by (timestamp, id), derives the inventory from the
/// observed labels plus `declared_labels`, and sets the period range. Throws
/// DataError when the result violates a dataset invariant.
TemporalDataset make_dataset(Task task, std::vector<Record> records, std::vector<std::string> declared_labels = {});

/// Sorts by (timestamp, id).
void sort_canonical(std::vector<Record>& records);

struct Violation {
    std::string record_id;
    std::string message;

    bool operator==(const Violation&) const = default;
};

/// One violation per offending record; empty iff every invariant holds.
std::vector<Violation> validate(const TemporalDataset& dataset);

/// Keeps the first k tokens of every classification record.
TemporalDataset truncate_tokens(const TemporalDataset& dataset, std::size_t k);

/// Reads the line-delimited JSON record format. Errors carry the line number.
TemporalDataset ingest(const std::filesystem::path& path, Task task);
TemporalDataset ingest(std::istream& in, Task task);

/// Writes one JSON object per record, in dataset order.
void emit(std::ostream& out, const TemporalDataset& dataset);
void emit(const std::filesystem::path& path, const TemporalDataset& dataset);

/// JSON value for one record in the wire/file format (labels optional).
std::string record_to_json(const Record& record, Task task, bool with_label = true);

/// Span type of a BIO tag ("B-PER" -> "PER"); empty for "O". Throws DataError
/// for anything outside the BIO scheme.
std::string bio_type(const std::string& tag);

}// namespace tempdrift
