// Copyright 2026 The templner Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "templner/eval.hpp"

#include <algorithm>
#include <iomanip>
#include <set>
#include <sstream>

#include "json.hpp"

#include "templner/error.hpp"

namespace templner {
namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

void check_aligned(std::span<const SentenceSpans> predicted, std::span<const SentenceSpans> gold) {
  if (predicted.size() != gold.size())
    throw ValueError("predicted has " + std::to_string(predicted.size()) + " sentences, gold has " +
                     std::to_string(gold.size()));
}

// Per-label counts; every entity is attributed to its own label.
std::map<std::string, Counts> count_by_label(std::span<const SentenceSpans> predicted,
                                             std::span<const SentenceSpans> gold) {
  check_aligned(predicted, gold);
  std::map<std::string, Counts> counts;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    std::set<EntitySpan> g(gold[i].begin(), gold[i].end());
    std::set<EntitySpan> p(predicted[i].begin(), predicted[i].end());
    for (const auto& e : p) {
      if (g.count(e))
        ++counts[e.label].tp;
      else
        ++counts[e.label].fp;
    }
    for (const auto& e : g)
      if (!p.count(e)) ++counts[e.label].fn;
  }
  return counts;
}

nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["f1"] = r.f1;
  j["tp"] = r.counts.tp;
  j["fp"] = r.counts.fp;
  j["fn"] = r.counts.fn;
  if (!r.per_type.empty()) {
    nlohmann::ordered_json per_type = nlohmann::ordered_json::object();
    for (const auto& [label, sub] : r.per_type) per_type[label] = to_json(sub);
    j["per_type"] = per_type;
  }
  if (!r.buckets.empty()) {
    nlohmann::ordered_json buckets = nlohmann::ordered_json::object();
    for (const auto& [name, sub] : r.buckets) buckets[name] = to_json(sub);
    j["buckets"] = buckets;
  }
  return j;
}

}  // namespace

double Counts::precision() const { return ratio(tp, tp + fp); }
double Counts::recall() const { return ratio(tp, tp + fn); }
double Counts::f1() const {
  const double p = precision(), r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

EvalReport EvalReport::from_counts(const Counts& counts) {
  EvalReport r;
  r.counts = counts;
  r.precision = counts.precision();
  r.recall = counts.recall();
  r.f1 = counts.f1();
  return r;
}

std::map<std::string, EvalReport> per_type_report(std::span<const SentenceSpans> predicted,
                                                  std::span<const SentenceSpans> gold) {
  std::map<std::string, EvalReport> out;
  for (const auto& [label, counts] : count_by_label(predicted, gold)) out[label] = EvalReport::from_counts(counts);
  return out;
}

EvalReport evaluate(std::span<const SentenceSpans> predicted, std::span<const SentenceSpans> gold) {
  Counts total;
  auto per_type = per_type_report(predicted, gold);
  for (const auto& [label, sub] : per_type) total += sub.counts;
  EvalReport report = EvalReport::from_counts(total);
  report.per_type = std::move(per_type);
  return report;
}

FrequencyBuckets frequency_buckets(const Corpus& train, const Corpus& test, BucketMode mode) {
  if (train.empty()) throw ValueError("frequency buckets need a nonempty training corpus");
  FrequencyBuckets buckets;
  for (const auto& label : test.label_set()) buckets.train_frequency[label] = 0;
  for (const auto& s : train.sentences())
    for (const auto& span : s.spans())
      if (buckets.train_frequency.count(span.label)) ++buckets.train_frequency[span.label];

  std::vector<std::pair<std::string, std::size_t>> ranked(buckets.train_frequency.begin(),
                                                           buckets.train_frequency.end());
  // std::map order already sorts by name, so a stable sort keeps the tie-break.
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

  const std::size_t k = ranked.size();
  if (mode == BucketMode::kTypeCount) {
    const std::size_t high = (k + 2) / 3;
    const std::size_t low = k / 3;
    for (std::size_t i = 0; i < k; ++i) {
      auto& dest = i < high ? buckets.high : (i >= k - low ? buckets.low : buckets.mid);
      dest.push_back(ranked[i].first);
    }
  } else {
    std::size_t total = 0;
    for (const auto& [label, n] : ranked) total += n;
    std::size_t before = 0;
    for (const auto& [label, n] : ranked) {
      // before/total < 1/3  <=>  3*before < total
      if (3 * before < total)
        buckets.high.push_back(label);
      else if (3 * before >= 2 * total)
        buckets.low.push_back(label);
      else
        buckets.mid.push_back(label);
      before += n;
    }
  }
  return buckets;
}

EvalReport evaluate_restricted(std::span<const SentenceSpans> predicted, std::span<const SentenceSpans> gold,
                               std::span<const std::string> labels) {
  check_aligned(predicted, gold);
  std::set<std::string> keep(labels.begin(), labels.end());
  auto filter = [&](std::span<const SentenceSpans> side) {
    std::vector<SentenceSpans> out;
    out.reserve(side.size());
    for (const auto& sentence : side) {
      SentenceSpans kept;
      for (const auto& e : sentence)
        if (keep.count(e.label)) kept.push_back(e);
      out.push_back(std::move(kept));
    }
    return out;
  };
  return evaluate(filter(predicted), filter(gold));
}

EvalReport evaluate_with_buckets(std::span<const SentenceSpans> predicted, std::span<const SentenceSpans> gold,
                                 const FrequencyBuckets& buckets) {
  EvalReport report = evaluate(predicted, gold);
  report.buckets["high"] = evaluate_restricted(predicted, gold, buckets.high);
  report.buckets["mid"] = evaluate_restricted(predicted, gold, buckets.mid);
  report.buckets["low"] = evaluate_restricted(predicted, gold, buckets.low);
  return report;
}

std::vector<SentenceSpans> gold_spans(const Corpus& corpus) {
  std::vector<SentenceSpans> out;
  out.reserve(corpus.size());
  for (const auto& s : corpus.sentences()) out.push_back(s.spans());
  return out;
}

std::string format_report(const EvalReport& report) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  auto row = [&](const std::string& name, const EvalReport& r) {
    out << std::left << std::setw(14) << name << std::right << std::setw(8) << 100.0 * r.precision << std::setw(8)
        << 100.0 * r.recall << std::setw(8) << 100.0 * r.f1 << std::setw(7) << r.counts.tp << std::setw(7)
        << r.counts.fp << std::setw(7) << r.counts.fn << '\n';
  };
  out << std::left << std::setw(14) << "" << std::right << std::setw(8) << "P" << std::setw(8) << "R" << std::setw(8)
      << "F1" << std::setw(7) << "tp" << std::setw(7) << "fp" << std::setw(7) << "fn" << '\n';
  row("overall", report);
  for (const auto& [label, sub] : report.per_type) row("  " + label, sub);
  for (const auto& name : {"high", "mid", "low"}) {
    auto it = report.buckets.find(name);
    if (it != report.buckets.end()) row(std::string("[") + name + "]", it->second);
  }
  return out.str();
}

std::string report_to_json(const EvalReport& report) { return to_json(report).dump(2); }

}  // namespace templner
