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

#include <compare>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace tempdrift {

/// Token span [start, end) of one entity type.
struct Span {
    int start = 0;
    int end = 0;
    std::string type;

    auto operator<=>(const Span&) const = default;
};

struct Counts {
    long tp = 0;
    long fp = 0;
    long fn = 0;

    Counts& operator+=(const Counts& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        return *this;
    }
    bool operator==(const Counts&) const = default;
};

/// F1 = 2TP / (2TP + FP + FN); 1 when there is nothing to find and nothing was
/// predicted, 0 when TP = 0 otherwise.
double f1_from_counts(const Counts& c);

/// Metric value in [0, 1] at full precision with the counts behind it.
struct MetricValue {
    double value = 0.0;
    Counts total;
    std::map<std::string, Counts> per_class;
};

/// Which task metric fills the grid.
struct TaskMetric {
    enum class Kind { SpanMicroF1, ClassF1, MacroF1 };
    Kind kind = Kind::MacroF1;
    std::string target;// ClassF1 only

    /// "span-micro-f1", "class-f1:<label>" or "macro-f1".
    static TaskMetric parse(const std::string& text);
    std::string to_string() const;
    bool operator==(const TaskMetric&) const = default;
};

/// Throws UsageError when the metric does not fit the dataset (span F1 on
/// classification, ClassF1 target outside the inventory).
void check_metric(const TaskMetric& metric, Task task, const std::vector<std::string>& inventory);

/// Lenient BIO decoding: an I-X that does not continue an X span opens a new one.
std::vector<Span> extract_spans(const TagSequence& tags);

/// Inverse of extract_spans for non-overlapping spans.
TagSequence spans_to_tags(const std::vector<Span>& spans, std::size_t length);

/// Exact-match span micro-F1 over all types, one span list per sentence.
MetricValue span_micro_f1(std::span<const std::vector<Span>> gold, std::span<const std::vector<Span>> pred);

/// Binary F1 with `target` as the positive class.
MetricValue class_f1(std::span<const std::string> gold, std::span<const std::string> pred, const std::string& target);

/// Unweighted mean of per-class F1 over `inventory`. A class absent from both
/// gold and predictions scores 1.0.
MetricValue macro_f1(std::span<const std::string> gold, std::span<const std::string> pred,
                     const std::vector<std::string>& inventory);

/// Macro-F1 over the union of labels seen in gold and predictions.
MetricValue macro_f1(std::span<const std::string> gold, std::span<const std::string> pred);

/// Scores predictions for `gold` records with the configured metric.
MetricValue evaluate(const TaskMetric& metric, const std::vector<Record>& gold, const std::vector<Label>& predictions,
                     const std::vector<std::string>& inventory);

}// namespace tempdrift
