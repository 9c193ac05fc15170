#include "trigcopy/metrics/evaluation.hpp"

#include "trigcopy/data/parsers.hpp"
#include "trigcopy/data/tokenizer.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

namespace trigcopy {

std::string_view trigger_class_name(TriggerClass c) {
  switch (c) {
    case TriggerClass::kC1: return "C1";
    case TriggerClass::kC2: return "C2";
    case TriggerClass::kC3: return "C3";
    case TriggerClass::kC4: return "C4";
  }
  return "C1";
}

TriggerClass parse_trigger_class(std::string_view name) {
  for (auto c : {TriggerClass::kC1, TriggerClass::kC2, TriggerClass::kC3, TriggerClass::kC4}) {
    if (trigger_class_name(c) == name) return c;
  }
  throw std::invalid_argument("unknown trigger class '" + std::string(name) + "'");
}

TriggerClass classify_trigger(std::string_view trigger, const Vocabulary& vocab,
                              const std::vector<TokenSequence>& references) {
  if (trigger.empty() || trigger == Vocabulary::kSosToken) return TriggerClass::kC1;
  const std::string k = to_lower(trigger);
  if (!vocab.contains(k)) return TriggerClass::kC2;
  for (const auto& ref : references) {
    for (const auto& t : ref) {
      if (to_lower(t) == k) return TriggerClass::kC4;
    }
  }
  return TriggerClass::kC3;
}

EvalRecord make_record(std::string id, const DataSample& sample, TokenSequence candidate, const Vocabulary& vocab) {
  EvalRecord r;
  r.id = std::move(id);
  r.candidate = std::move(candidate);
  r.references = sample.references;
  r.intent = sample.intent;
  r.signature = sample.signature();
  r.trigger = sample.trigger;
  r.trigger_class = classify_trigger(sample.trigger, vocab, sample.references);
  return r;
}

std::vector<Segment> to_segments(std::span<const EvalRecord> records) {
  std::vector<Segment> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back({r.candidate, r.references});
  return out;
}

AggregateTable aggregate(std::span<const EvalRecord> records, Metric metric) {
  AggregateTable table;
  table.metric = metric;
  const auto all = to_segments(records);
  table.overall = score(metric, all);

  std::map<TriggerClass, std::vector<Segment>> classes;
  std::map<std::string, std::vector<Segment>> signatures;
  for (std::size_t i = 0; i < records.size(); ++i) {
    classes[records[i].trigger_class].push_back(all[i]);
    signatures[records[i].signature].push_back(all[i]);
  }
  for (const auto& [c, segs] : classes) {
    table.by_class.push_back({std::string(trigger_class_name(c)), segs.size(), score(metric, segs)});
  }
  for (const auto& [key, segs] : signatures) table.by_signature.push_back({key, segs.size(), score(metric, segs)});
  return table;
}

MetricReport make_report(std::span<const EvalRecord> records) {
  if (records.empty()) throw std::invalid_argument("evaluation: no records");
  MetricReport report;
  report.records = records.size();
  for (auto m : {Metric::kBleu, Metric::kRougeL, Metric::kMeteor}) report.tables.push_back(aggregate(records, m));
  report.bleu = report.tables[0].overall;
  report.rouge_l = report.tables[1].overall;
  report.meteor = report.tables[2].overall;
  return report;
}

namespace {

nlohmann::json keyed(const std::vector<KeyedScore>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) out.push_back({{"key", r.key}, {"count", r.count}, {"value", r.value}});
  return out;
}

}  // namespace

nlohmann::json to_json(const MetricReport& report) {
  nlohmann::json j = {{"records", report.records},
                      {"bleu", report.bleu},
                      {"rouge_l", report.rouge_l},
                      {"meteor", report.meteor}};
  for (const auto& t : report.tables) {
    j["by_class"][std::string(metric_name(t.metric))] = keyed(t.by_class);
    j["by_signature"][std::string(metric_name(t.metric))] = keyed(t.by_signature);
  }
  return j;
}

void write_report_csv(std::ostream& out, const MetricReport& report) {
  out << "metric,grouping,key,count,value\n";
  for (const auto& t : report.tables) {
    const std::string name(metric_name(t.metric));
    out << name << ",overall,all," << report.records << ',' << t.overall << '\n';
    for (const auto& r : t.by_class) out << name << ",class," << r.key << ',' << r.count << ',' << r.value << '\n';
    for (const auto& r : t.by_signature) {
      out << name << ",signature," << csv_escape(r.key) << ',' << r.count << ',' << r.value << '\n';
    }
  }
}

ExtremesPair aggregate_pair(std::span<const EvalRecord> zero_k, std::span<const EvalRecord> plus_k, Metric metric) {
  return {score(metric, to_segments(zero_k)), score(metric, to_segments(plus_k))};
}

void write_records(std::ostream& out, std::span<const EvalRecord> records) {
  for (const auto& r : records) {
    nlohmann::json refs = nlohmann::json::array();
    for (const auto& ref : r.references) refs.push_back(join_tokens(ref));
    out << nlohmann::json{{"id", r.id},
                          {"candidate", join_tokens(r.candidate)},
                          {"references", refs},
                          {"intent", r.intent},
                          {"signature", r.signature},
                          {"trigger", r.trigger},
                          {"class", std::string(trigger_class_name(r.trigger_class))}}
               .dump()
        << '\n';
  }
}

std::vector<EvalRecord> read_records(std::istream& in) {
  std::vector<EvalRecord> out;
  std::string line;
  std::size_t number = 0;
  auto split = [](const std::string& text) {
    TokenSequence tokens;
    std::string current;
    for (char c : text) {
      if (c == ' ') {
        if (!current.empty()) tokens.push_back(std::move(current));
        current.clear();
      } else {
        current += c;
      }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
  };
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      EvalRecord r;
      r.id = j.at("id").get<std::string>();
      r.candidate = split(j.at("candidate").get<std::string>());
      for (const auto& ref : j.at("references")) r.references.push_back(split(ref.get<std::string>()));
      if (r.references.empty()) throw ParseError("record without references", number);
      r.intent = j.value("intent", std::string(IntentSet::kDummyLabel));
      r.signature = j.value("signature", std::string());
      r.trigger = j.value("trigger", std::string(Vocabulary::kSosToken));
      r.trigger_class = parse_trigger_class(j.value("class", std::string("C1")));
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("malformed evaluation record: ") + e.what(), number);
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), number);
    }
  }
  return out;
}

template <typename Scalar>
std::vector<EvalRecord> evaluate_model(const Model<Scalar>& model, const std::vector<DataSample>& samples,
                                       Index max_len, const ProgressFn& progress) {
  std::vector<EvalRecord> out;
  out.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto generation = decode(model, samples[i], max_len);
    out.push_back(make_record(std::to_string(i), samples[i], generation.tokens, model.vocab()));
    if (progress) progress(i + 1, samples.size());
  }
  return out;
}

template std::vector<EvalRecord> evaluate_model(const Model<double>&, const std::vector<DataSample>&, Index,
                                                const ProgressFn&);
template std::vector<EvalRecord> evaluate_model(const Model<float>&, const std::vector<DataSample>&, Index,
                                                const ProgressFn&);

}  // namespace trigcopy
