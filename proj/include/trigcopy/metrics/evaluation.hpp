#pragma once

#include "trigcopy/decoding/decode.hpp"
#include "trigcopy/metrics/scores.hpp"

#include <json.hpp>

#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace trigcopy {

/// C1 no trigger, C2 trigger outside V, C3 in V but in no reference, C4 in V and in a reference.
enum class TriggerClass { kC1, kC2, kC3, kC4 };

std::string_view trigger_class_name(TriggerClass c);
TriggerClass parse_trigger_class(std::string_view name);

/// Membership tests are case-insensitive.
TriggerClass classify_trigger(std::string_view trigger, const Vocabulary& vocab,
                              const std::vector<TokenSequence>& references);

struct EvalRecord {
  std::string id;
  TokenSequence candidate;
  std::vector<TokenSequence> references;
  std::string intent;
  std::string signature;
  std::string trigger;
  TriggerClass trigger_class = TriggerClass::kC1;

  friend bool operator==(const EvalRecord&, const EvalRecord&) = default;
};

EvalRecord make_record(std::string id, const DataSample& sample, TokenSequence candidate, const Vocabulary& vocab);

std::vector<Segment> to_segments(std::span<const EvalRecord> records);

struct KeyedScore {
  std::string key;
  std::size_t count = 0;
  double value = 0.0;

  friend bool operator==(const KeyedScore&, const KeyedScore&) = default;
};

/// Metric over all records and over each class / field-combination subset.
struct AggregateTable {
  Metric metric = Metric::kBleu;
  double overall = 0.0;
  std::vector<KeyedScore> by_class;      // C1..C4 order, present classes only
  std::vector<KeyedScore> by_signature;  // sorted by key
};

AggregateTable aggregate(std::span<const EvalRecord> records, Metric metric);

struct MetricReport {
  std::size_t records = 0;
  double bleu = 0.0;
  double rouge_l = 0.0;
  double meteor = 0.0;
  std::vector<AggregateTable> tables;  // one per metric
};

/// Throws std::invalid_argument on an empty record set.
MetricReport make_report(std::span<const EvalRecord> records);
nlohmann::json to_json(const MetricReport& report);
/// One row per (metric, grouping, key).
void write_report_csv(std::ostream& out, const MetricReport& report);

/// Overall metric on the trigger-free (0K) and all-triggered (+K) evaluations.
struct ExtremesPair {
  double zero_k = 0.0;
  double plus_k = 0.0;
};
ExtremesPair aggregate_pair(std::span<const EvalRecord> zero_k, std::span<const EvalRecord> plus_k, Metric metric);

void write_records(std::ostream& out, std::span<const EvalRecord> records);
/// Throws ParseError with the line number on malformed input.
std::vector<EvalRecord> read_records(std::istream& in);

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// Decodes every sample (beam width from the model config) and scores it
/// against all of its references. Samples that differ only in their
/// reference should be grouped first.
template <typename Scalar>
std::vector<EvalRecord> evaluate_model(const Model<Scalar>& model, const std::vector<DataSample>& samples,
                                       Index max_len = kDefaultMaxLen, const ProgressFn& progress = {});

}  // namespace trigcopy
