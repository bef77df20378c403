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
#include "tempdrift/metrics.hpp"

#include "tempdrift/errors.hpp"

#include <algorithm>
#include <set>

namespace tempdrift {

double f1_from_counts(const Counts& c) {
    const long denom = 2 * c.tp + c.fp + c.fn;
    if (denom == 0) {
        return 1.0;
    }
    return static_cast<double>(2 * c.tp) / static_cast<double>(denom);
}

TaskMetric TaskMetric::parse(const std::string& text) {
    if (text == "span-micro-f1") {
        return {Kind::SpanMicroF1, {}};
    }
    if (text == "macro-f1") {
        return {Kind::MacroF1, {}};
    }
    const std::string prefix = "class-f1:";
    if (text.rfind(prefix, 0) == 0 && text.size() > prefix.size()) {
        return {Kind::ClassF1, text.substr(prefix.size())};
    }
    throw UsageError("unknown metric '" + text + "' (expected span-micro-f1, class-f1:<label> or macro-f1)");
}

std::string TaskMetric::to_string() const {
    switch (kind) {
        case Kind::SpanMicroF1: return "span-micro-f1";
        case Kind::ClassF1: return "class-f1:" + target;
        case Kind::MacroF1: return "macro-f1";
    }
    return {};
}

void check_metric(const TaskMetric& metric, Task task, const std::vector<std::string>& inventory) {
    if (metric.kind == TaskMetric::Kind::SpanMicroF1 && task != Task::SequenceLabeling) {
        throw UsageError("span-micro-f1 requires a sequence-labeling dataset");
    }
    if (metric.kind != TaskMetric::Kind::SpanMicroF1 && task != Task::Classification) {
        throw UsageError(metric.to_string() + " requires a classification dataset");
    }
    if (metric.kind == TaskMetric::Kind::ClassF1
        && std::find(inventory.begin(), inventory.end(), metric.target) == inventory.end()) {
        throw UsageError("class-f1 target '" + metric.target + "' is not in the label inventory");
    }
}

std::vector<Span> extract_spans(const TagSequence& tags) {
    std::vector<Span> spans;
    bool open = false;
    Span current;
    for (int i = 0; i < static_cast<int>(tags.size()); ++i) {
        const auto& tag = tags[static_cast<std::size_t>(i)];
        const auto type = bio_type(tag);
        const bool continues = tag[0] == 'I' && open && current.type == type;
        if (continues) {
            current.end = i + 1;
            continue;
        }
        if (open) {
            spans.push_back(current);
            open = false;
        }
        if (!type.empty()) {
            current = Span{i, i + 1, type};
            open = true;
        }
    }
    if (open) {
        spans.push_back(current);
    }
    return spans;
}

TagSequence spans_to_tags(const std::vector<Span>& spans, std::size_t length) {
    TagSequence tags(length, "O");
    for (const auto& s : spans) {
        for (int i = s.start; i < s.end; ++i) {
            tags[static_cast<std::size_t>(i)] = (i == s.start ? "B-" : "I-") + s.type;
        }
    }
    return tags;
}

MetricValue span_micro_f1(std::span<const std::vector<Span>> gold, std::span<const std::vector<Span>> pred) {
    if (gold.size() != pred.size()) {
        throw UsageError("span_micro_f1: " + std::to_string(gold.size()) + " gold sentences vs "
                         + std::to_string(pred.size()) + " predicted");
    }
    MetricValue mv;
    for (std::size_t s = 0; s < gold.size(); ++s) {
        std::multiset<Span> g(gold[s].begin(), gold[s].end());
        for (const auto& p : pred[s]) {
            auto& counts = mv.per_class[p.type];
            if (auto it = g.find(p); it != g.end()) {
                ++counts.tp;
                g.erase(it);
            } else {
                ++counts.fp;
            }
        }
        for (const auto& missed : g) {
            ++mv.per_class[missed.type].fn;
        }
    }
    for (const auto& [type, c] : mv.per_class) {
        mv.total += c;
    }
    mv.value = f1_from_counts(mv.total);
    return mv;
}

namespace {

void check_label_inputs(std::span<const std::string> gold, std::span<const std::string> pred, const char* who) {
    if (gold.size() != pred.size()) {
        throw UsageError(std::string(who) + ": gold and predictions differ in length");
    }
    if (gold.empty()) {
        throw UsageError(std::string(who) + ": empty input");
    }
}

Counts binary_counts(std::span<const std::string> gold, std::span<const std::string> pred, const std::string& target) {
    Counts c;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        const bool g = gold[i] == target;
        const bool p = pred[i] == target;
        c.tp += g && p;
        c.fp += !g && p;
        c.fn += g && !p;
    }
    return c;
}

}// namespace

MetricValue class_f1(std::span<const std::string> gold, std::span<const std::string> pred, const std::string& target) {
    check_label_inputs(gold, pred, "class_f1");
    MetricValue mv;
    mv.total = binary_counts(gold, pred, target);
    mv.per_class[target] = mv.total;
    mv.value = f1_from_counts(mv.total);
    return mv;
}

MetricValue macro_f1(std::span<const std::string> gold, std::span<const std::string> pred,
                     const std::vector<std::string>& inventory) {
    check_label_inputs(gold, pred, "macro_f1");
    if (inventory.empty()) {
        throw UsageError("macro_f1: empty label inventory");
    }
    MetricValue mv;
    double sum = 0.0;
    for (const auto& cls : inventory) {
        const auto c = binary_counts(gold, pred, cls);
        mv.per_class[cls] = c;
        mv.total += c;
        sum += f1_from_counts(c);
    }
    mv.value = sum / static_cast<double>(inventory.size());
    return mv;
}

MetricValue macro_f1(std::span<const std::string> gold, std::span<const std::string> pred) {
    std::set<std::string> labels(gold.begin(), gold.end());
    labels.insert(pred.begin(), pred.end());
    return macro_f1(gold, pred, std::vector<std::string>(labels.begin(), labels.end()));
}

MetricValue evaluate(const TaskMetric& metric, const std::vector<Record>& gold, const std::vector<Label>& predictions,
                     const std::vector<std::string>& inventory) {
    if (gold.size() != predictions.size()) {
        throw UsageError("evaluate: " + std::to_string(gold.size()) + " records vs " + std::to_string(predictions.size())
                         + " predictions");
    }
    if (metric.kind == TaskMetric::Kind::SpanMicroF1) {
        std::vector<std::vector<Span>> g, p;
        g.reserve(gold.size());
        p.reserve(gold.size());
        for (std::size_t i = 0; i < gold.size(); ++i) {
            g.push_back(extract_spans(std::get<TagSequence>(gold[i].label)));
            p.push_back(extract_spans(std::get<TagSequence>(predictions[i])));
        }
        return span_micro_f1(g, p);
    }
    std::vector<std::string> g, p;
    g.reserve(gold.size());
    p.reserve(gold.size());
    for (std::size_t i = 0; i < gold.size(); ++i) {
        g.push_back(std::get<std::string>(gold[i].label));
        p.push_back(std::get<std::string>(predictions[i]));
    }
    if (metric.kind == TaskMetric::Kind::ClassF1) {
        return class_f1(g, p, metric.target);
    }
    return macro_f1(g, p, inventory);
}

}// namespace tempdrift
