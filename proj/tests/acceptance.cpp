// Acceptance suite: one PASS/FAIL line per criterion. Arguments select a
// subset of criterion numbers; no arguments runs all ten.

#include "trigcopy/data/parsers.hpp"
#include "trigcopy/data/synthetic.hpp"
#include "trigcopy/data/triggers.hpp"
#include "trigcopy/decoding/decode.hpp"
#include "trigcopy/metrics/evaluation.hpp"
#include "trigcopy/sweep/sweep.hpp"
#include "trigcopy/training/checkpoint.hpp"
#include "trigcopy/training/train.hpp"

#include "support/beam_oracle.hpp"
#include "support/gradcheck.hpp"
#include "support/metric_oracles.hpp"
#include "support/op_cases.hpp"
#include "support/toy.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

namespace trigcopy {
namespace {

namespace fs = std::filesystem;
using testing::random_toy_sample;
using testing::toy_intents;
using testing::toy_sample;
using testing::toy_vocab;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream out;
  out.precision(precision);
  out << v;
  return out.str();
}

// Toy configuration with every hidden width at 8.
ModelConfig hidden8_config() {
  ModelConfig c = testing::toy_config();
  c.encoder_hidden = 8;
  c.attention_depth = 8;
  c.decoder_hidden = 8;
  return c;
}

// Scaled M7 used by the training criteria.
ModelConfig scaled_m7(Index hidden, Index beam_width) {
  ModelConfig c = model_preset("M7");
  c.encoder_hidden = hidden;
  c.attention_depth = hidden;
  c.decoder_hidden = hidden;
  c.readout = 2 * hidden;
  c.beam_width = beam_width;
  c.use_pretrained_embeddings = false;
  return c;
}

// P(y) from raw scores: softmax mass on V plus copy mass of every position holding y.
std::vector<long double> mixture_from_scores(const DecoderStep<double>& step, const ExtendedVocabulary& ext,
                                         Index vocab_size) {
  long double z = 0;
  for (Index v = 0; v < vocab_size; ++v) z += std::exp(static_cast<long double>(step.generate_scores(0, v)));
  for (Index j = 0; j < step.copy_scores.cols(); ++j) z += std::exp(static_cast<long double>(step.copy_scores(0, j)));
  std::vector<long double> p(static_cast<std::size_t>(ext.size()), 0.0L);
  for (Index v = 0; v < vocab_size; ++v) p[v] = std::exp(static_cast<long double>(step.generate_scores(0, v))) / z;
  for (Index j = 0; j < step.copy_scores.cols(); ++j) {
    p[ext.position_ids()[j]] += std::exp(static_cast<long double>(step.copy_scores(0, j))) / z;
  }
  return p;
}

TokenId sample_token(const std::vector<double>& probs, std::mt19937_64& rng) {
  std::discrete_distribution<TokenId> pick(probs.begin(), probs.end());
  return pick(rng);
}

Outcome gradients() {
  const auto start = std::chrono::steady_clock::now();
  auto [params, cases] = testing::op_gradient_cases();
  double op_error = 0;
  for (const auto& [name, build] : cases) {
    op_error = std::max(op_error, testing::gradient_check(params, build).max_relative_error);
  }
  Model<double> model(hidden8_config(), toy_vocab(), toy_intents(), 3);
  std::mt19937_64 rng(21);
  const std::vector<DataSample> samples = {toy_sample(), random_toy_sample(rng), random_toy_sample(rng)};
  std::vector<const DataSample*> ptrs;
  for (const auto& s : samples) ptrs.push_back(&s);
  const auto full = testing::gradient_check(model.parameters(), [&](Graph<double>& g, const ParameterSet<double>&) {
    std::mt19937_64 mask(4);
    return model.loss(g, std::span<const DataSample* const>(ptrs), &mask);
  });
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {op_error < 1e-4 && full.max_relative_error < 1e-4 && full.checked == model.parameters().scalar_count() &&
              seconds < 60,
          std::to_string(cases.size()) + " ops max rel " + fmt(op_error) + "; model loss (|V|=10, N=3, hidden 8) " +
              std::to_string(full.checked) + " entries max rel " + fmt(full.max_relative_error) + "; " +
              fmt(seconds, 3) + " s"};
}

Outcome distributions() {
  std::mt19937_64 rng(77);
  Index steps = 0, sum_bad = 0, absent_bad = 0, source_only_bad = 0;
  double worst_sum = 0;
  for (std::uint64_t seed = 1; steps < 1200; ++seed) {
    ModelConfig c = hidden8_config();
    c.attention = seed % 2 ? AttentionKind::kBahdanau : AttentionKind::kLuong;
    const Model<double> model(c, toy_vocab(), toy_intents(), seed);
    const auto sample = random_toy_sample(rng);
    const auto mem = model.encode(sample);
    const auto& ext = mem.extended;
    const Index V = model.vocab().size();
    std::set<TokenId> source(ext.position_ids().begin(), ext.position_ids().end());
    auto step = model.initial_step(mem);
    TokenId prev = Vocabulary::kSos;
    for (int t = 0; t < 6; ++t, ++steps) {
      step = model.decode_step(mem, step, prev);
      const double total = std::accumulate(step.probabilities.begin(), step.probabilities.end(), 0.0);
      worst_sum = std::max(worst_sum, std::abs(total - 1.0));
      if (std::abs(total - 1.0) > 1e-6) ++sum_bad;
      const auto oracle = mixture_from_scores(step, ext, V);
      for (TokenId y = 0; y < ext.size(); ++y) {
        const double p = step.probabilities[y];
        if (!source.contains(y)) {
          // No copy mass: exactly the generation share.
          if (std::abs(p - static_cast<double>(oracle[y])) > 1e-12) ++absent_bad;
        } else if (y >= V) {
          double copy_mass = 0;
          for (Index j = 0; j < ext.copy_positions(); ++j) {
            if (ext.position_ids()[j] == y) copy_mass += step.copy_probabilities(0, j);
          }
          if (std::abs(p - copy_mass) > 1e-12) ++source_only_bad;
        }
      }
      prev = ext.input_id(sample_token(step.probabilities, rng));
      if (prev == Vocabulary::kEos) prev = Vocabulary::kSos;
    }
  }
  return {sum_bad == 0 && absent_bad == 0 && source_only_bad == 0,
          std::to_string(steps) + " decode steps; max |sum-1| " + fmt(worst_sum) + "; absent-token copy violations " +
              std::to_string(absent_bad) + "; source-only violations " + std::to_string(source_only_bad)};
}

Outcome mixture_brute_force() {
  Vocabulary vocab;
  vocab.add("a");  // |V| = 5 with the reserved ids
  static const std::vector<std::string> words = {"a", "k", "zz", "yy"};
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<std::size_t> word(0, words.size() - 1);
  std::uniform_int_distribution<int> length(1, 2);
  double worst = 0;
  Index checked = 0, max_x = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    ModelConfig c = hidden8_config();
    c.init_bound = 0.8;
    const Model<double> model(c, vocab, toy_intents(), seed);
    DataSample s;
    s.intent = "ASK";
    const int n = length(rng);
    for (int i = 0; i < n; ++i) {
      s.fields.push_back(words[word(rng)]);
      s.values.push_back(words[word(rng)]);
    }
    s.references = {{"a"}};
    const auto mem = model.encode(s);
    const auto& ext = mem.extended;
    max_x = std::max<Index>(max_x, static_cast<Index>(ext.source_words().size()));
    auto step = model.initial_step(mem);
    TokenId prev = Vocabulary::kSos;
    for (int t = 0; t < 4; ++t) {
      step = model.decode_step(mem, step, prev);
      const auto oracle = mixture_from_scores(step, ext, vocab.size());
      for (TokenId y = 0; y < ext.size(); ++y) {
        worst = std::max(worst, std::abs(step.probabilities[y] - static_cast<double>(oracle[y])));
        ++checked;
      }
      prev = ext.input_id(sample_token(step.probabilities, rng));
    }
  }
  return {worst <= 1e-9 && max_x <= 4,
          std::to_string(checked) + " probabilities, |V| = 5, |X| <= " + std::to_string(max_x) +
              "; max abs difference " + fmt(worst)};
}

Outcome overfit() {
  const auto start = std::chrono::steady_clock::now();
  const auto data = synthetic_e2e(32, 5);
  auto model = make_model<float>(scaled_m7(64, 1), data, 1);
  TrainConfig t;
  t.batch_size = 32;
  t.epochs = 500;
  t.stop_below = 0.01;
  const auto result = train<float>(std::move(model), data, data, t);
  const auto& best = result.best.model;
  const double loss = mean_loss(best, data);
  int exact = 0;
  for (const auto& s : data) exact += greedy_decode(best, s).tokens == s.references[0];
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double fraction = exact / 32.0;
  return {loss < 0.1 && fraction >= 0.95 && result.history.size() <= 500 && seconds < 600,
          std::to_string(result.history.size()) + " epochs, training loss " + fmt(loss) + ", greedy exact " +
              std::to_string(exact) + "/32; " + fmt(seconds, 3) + " s"};
}

Outcome metric_oracles() {
  double bleu_err = 0, rouge_err = 0;
  const auto suite = testing::bleu_golden_suite(42);
  for (const auto& corpus : suite) {
    bleu_err = std::max(bleu_err, std::abs(bleu_corpus(corpus) - testing::oracle_bleu(corpus)));
    rouge_err = std::max(rouge_err, std::abs(rouge_l_f1(corpus) - testing::oracle_rouge_l(corpus)));
  }
  Vocabulary v;
  for (const char* t : {"the", "near", "with", "pub", "green", "man", "there", "is", "a"}) v.add(t);
  const std::vector<TokenSequence> refs = {testing::words("near the green man there is a pub")};
  const bool table = classify_trigger(Vocabulary::kSosToken, v, refs) == TriggerClass::kC1 &&
                     classify_trigger("ghgsdpkwq", v, refs) == TriggerClass::kC2 &&
                     classify_trigger("with", v, refs) == TriggerClass::kC3 &&
                     classify_trigger("near", v, refs) == TriggerClass::kC4;
  return {suite.size() == 20 && bleu_err <= 1e-6 && rouge_err <= 1e-6 && table,
          std::to_string(suite.size()) + " cases, max BLEU diff " + fmt(bleu_err) + ", max ROUGE-L diff " +
              fmt(rouge_err) + "; trigger classes C1-C4 " + (table ? "reproduced" : "wrong")};
}

Outcome beam_properties() {
  std::mt19937_64 rng(2024);
  int mismatches = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    ModelConfig c = testing::toy_config();
    c.use_copy = seed % 4 != 0;
    c.attention = seed % 3 == 0 ? AttentionKind::kLuong : AttentionKind::kBahdanau;
    const Model<double> model(c, toy_vocab(), toy_intents(), seed);
    const auto sample = random_toy_sample(rng);
    const auto greedy = greedy_decode(model, sample, 12);
    const auto beam = beam_decode(model, sample, 1, 12);
    if (beam.size() != 1 || beam.front().ids != greedy.ids) ++mismatches;
  }
  int optimal = 0, instances = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto table = testing::random_table(seed);
    for (Index max_len = 1; max_len <= 4; ++max_len) {
      for (bool normalize : {false, true}) {
        SearchOptions options;
        options.beam_width = 625;
        options.max_len = max_len;
        options.length_normalize = normalize;
        const auto beam = beam_search(testing::PrefixState{}, Vocabulary::kSos, testing::prefix_expander(table), options);
        const auto oracle = testing::brute_force_best(table, max_len, normalize);
        ++instances;
        optimal += beam.front().tokens == oracle.tokens && std::abs(beam.front().score - oracle.score) < 1e-12;
      }
    }
  }
  return {mismatches == 0 && optimal == instances,
          "width 1 vs greedy: " + std::to_string(100 - mismatches) + "/100 identical; exhaustive optimum found in " +
              std::to_string(optimal) + "/" + std::to_string(instances) + " toy instances (5 ids, len <= 4)"};
}

struct E2eSplits {
  std::vector<DataSample> train, validation, test;
};

std::optional<E2eSplits> real_e2e() {
  const char* dir = std::getenv("TRIGCOPY_E2E_DIR");
  if (!dir || !*dir) return std::nullopt;
  const fs::path root(dir);
  fs::path test = root / "testset_w_refs.csv";
  if (!fs::exists(test)) test = root / "testset.csv";
  E2eSplits s;
  s.train = read_dataset(root / "trainset.csv", DatasetFormat::kE2e);
  s.validation = read_dataset(root / "devset.csv", DatasetFormat::kE2e);
  s.test = group_references(read_dataset(test, DatasetFormat::kE2e));
  return s;
}

std::vector<Segment> c1_segments(const Model<float>& model, const std::vector<DataSample>& test) {
  std::vector<EvalRecord> records;
  for (const auto& s : strip_triggers(test)) records.push_back(make_record("", s, decode(model, s).tokens, model.vocab()));
  return to_segments(records);
}

// Pinned from the baseline run of this smoke configuration (BLEU 77.77).
constexpr double kSmokeBleuThreshold = 75.0;

Outcome e2e_reproduction() {
  const auto start = std::chrono::steady_clock::now();
  const auto train_set = synthetic_e2e(5000, 11);
  const auto dev = synthetic_e2e(200, 12);
  const auto test = synthetic_e2e(200, 13, 3);
  TrainConfig t;
  t.batch_size = 32;
  t.epochs = 5;
  auto model = make_model<float>(scaled_m7(64, 3), prepare_split(train_set, 0.0, t.seed), 1);
  const auto result = train<float>(std::move(model), train_set, dev, t);
  const double bleu = bleu_corpus(c1_segments(result.best.model, test));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  Outcome out{bleu >= kSmokeBleuThreshold, "smoke (synthetic 5000 samples, 5 epochs, hidden 64): BLEU " + fmt(bleu) +
                                               " >= " + fmt(kSmokeBleuThreshold) + "; " + fmt(seconds, 3) + " s"};
  const auto real = real_e2e();
  if (!real) {
    out.detail += "; full-scale run skipped (set TRIGCOPY_E2E_DIR to enable)";
    return out;
  }
  const ModelConfig m7 = model_preset("M7");
  const char* embeddings = std::getenv("TRIGCOPY_EMBEDDINGS");
  const TrainConfig full = default_train_config(false);
  auto big = make_model<float>(m7, prepare_split(real->train, 0.0, full.seed), full.seed,
                               embeddings ? fs::path(embeddings) : fs::path());
  const auto trained = train<float>(std::move(big), real->train, real->validation, full);
  const auto segments = c1_segments(trained.best.model, real->test);
  const double real_bleu = bleu_corpus(segments);
  const double real_rouge = rouge_l_f1(segments);
  const bool ok = std::abs(real_bleu - 66.43) <= 3.0 && std::abs(real_rouge - 70.14) <= 3.0;
  out.pass = out.pass && ok;
  out.detail += "; full E2E M7 C1: BLEU " + fmt(real_bleu) + " (66.43 +- 3), ROUGE-L " + fmt(real_rouge) +
                " (70.14 +- 3)";
  return out;
}

Outcome trigger_leading() {
  const auto real = real_e2e();
  const auto train_set = real ? std::vector<DataSample>(real->train.begin(), real->train.begin() +
                                                            std::min<std::size_t>(5000, real->train.size()))
                              : synthetic_e2e(5000, 11);
  const auto dev = real ? real->validation : synthetic_e2e(200, 12);
  const auto test = real ? real->test : synthetic_e2e(200, 13, 3);
  TrainConfig t;
  t.batch_size = 32;
  t.epochs = 5;
  t.trigger_ratio = 1.0;
  auto model = make_model<float>(scaled_m7(64, 3), prepare_split(train_set, 1.0, t.seed), 1);
  const auto result = train<float>(std::move(model), train_set, dev, t);
  const auto& m = result.best.model;
  int leading = 0, c4 = 0;
  for (const auto& s : trigger_all(test)) {
    if (classify_trigger(s.trigger, m.vocab(), s.references) != TriggerClass::kC4) continue;
    ++c4;
    const auto top = beam_decode(m, s, m.config().beam_width, kDefaultMaxLen).front();
    leading += !top.tokens.empty() && top.tokens.front() == s.trigger;
  }
  const double fraction = c4 ? static_cast<double>(leading) / c4 : 0.0;
  return {c4 > 0 && fraction >= 0.9, std::string(real ? "E2E" : "synthetic E2E") + " r_K = 1: " +
                                         std::to_string(leading) + "/" + std::to_string(c4) +
                                         " beam-top-1 outputs lead with the C4 trigger (" + fmt(100 * fraction) + "%)"};
}

Outcome sweep_machinery() {
  // Rows from a real (tiny) sweep for the per-row identity.
  const auto train_set = synthetic_e2e(60, 21);
  const auto dev = synthetic_e2e(10, 22);
  const auto test = synthetic_e2e(10, 23);
  SweepConfig config;
  config.grid = {0.0, 0.5, 1.0};
  config.model = scaled_m7(8, 1);
  config.train.epochs = 1;
  config.train.batch_size = 16;
  config.max_len = 15;
  config.metric = Metric::kRougeL;
  auto result = run_sweep<double>(config, train_set, dev, test);
  bool identity = result.rows.size() == 3;
  for (double w : {0.0, 25.0, 50.0, 75.0, 100.0}) {
    const auto curve = weighted_mean_curve(result.rows, w);
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
      const auto& r = result.rows[i];
      identity = identity && curve[i] == (w / 100.0) * r.plus_k + (1.0 - w / 100.0) * r.zero_k;
      if (w == 0.0) identity = identity && curve[i] == r.zero_k;
      if (w == 100.0) identity = identity && curve[i] == r.plus_k;
    }
  }
  // Synthetic curves with known maxima.
  auto rows_of = [](const std::vector<double>& grid, const std::function<double(double)>& zero,
                    const std::function<double(double)>& plus) {
    std::vector<SweepRow> rows;
    for (double r : grid) rows.push_back({r, zero(r), plus(r)});
    return rows;
  };
  const std::vector<double> grid = {0.0, 0.25, 0.5, 0.75, 1.0};
  auto peak = rows_of(grid, [](double r) { return 80 - 20 * r; }, [](double r) { return 40 + 80 * r - 60 * r * r; });
  weighted_mean_curve(peak, 50);
  auto zero_only = peak;
  weighted_mean_curve(zero_only, 0);
  auto plus_only = rows_of(grid, [](double) { return 0.0; }, [](double r) { return 40 + 80 * r - 60 * r * r; });
  weighted_mean_curve(plus_only, 100);
  auto flat = rows_of(grid, [](double) { return 5.0; }, [](double) { return 5.0; });
  weighted_mean_curve(flat, 50);
  // Without the peak row, 0.25 and 0.75 tie at 65.625 and the smaller ratio wins.
  auto failed = peak;
  failed[2].failed = true;
  const bool argmax = argmax_ratio(peak) == 0.5 && argmax_ratio(zero_only) == 0.0 &&
                      argmax_ratio(plus_only) == 0.75 && argmax_ratio(flat) == 0.0 && argmax_ratio(failed) == 0.25;
  return {identity && argmax,
          std::string("weighted-mean identity ") + (identity ? "exact" : "violated") + " on " +
              std::to_string(result.rows.size()) + " sweep rows for w in {0,25,50,75,100}; synthetic argmax " +
              (argmax ? "exact" : "wrong") + "; full-sweep optimum reproduction not run (stretch)"};
}

template <typename Scalar>
bool same_parameters(const ParameterSet<Scalar>& a, const ParameterSet<Scalar>& b) {
  if (a.size() != b.size()) return false;
  for (ParamId id = 0; id < a.size(); ++id) {
    const auto& x = a[id].value;
    const auto& y = b[id].value;
    if (a[id].name != b[id].name || x.rows() != y.rows() || x.cols() != y.cols() ||
        std::memcmp(x.data(), y.data(), sizeof(Scalar) * static_cast<std::size_t>(x.size())) != 0) {
      return false;
    }
  }
  return true;
}

template <typename Scalar>
std::pair<bool, bool> persistence_for() {
  const auto data = synthetic_e2e(40, 31);
  auto model = make_model<Scalar>(scaled_m7(16, 3), data, 2);
  TrainConfig t;
  t.epochs = 2;
  t.batch_size = 16;
  const auto trained = train<Scalar>(std::move(model), data, synthetic_e2e(8, 32), t);
  std::stringstream first;
  save_checkpoint(trained.best.model, trained.best.metadata, first);
  const std::string bytes = first.str();
  const auto loaded = load_checkpoint<Scalar>(first);
  std::stringstream second;
  save_checkpoint(loaded.model, loaded.metadata, second);
  const bool bitwise = same_parameters(trained.best.model.parameters(), loaded.model.parameters()) &&
                       loaded.metadata == trained.best.metadata && second.str() == bytes &&
                       loaded.model.vocab().tokens() == trained.best.model.vocab().tokens();
  bool generations = true;
  const auto probes = synthetic_e2e(10, 33);
  for (const auto& s : probes) {
    const auto before = beam_decode(trained.best.model, s, 3, 30);
    const auto after = beam_decode(loaded.model, s, 3, 30);
    generations = generations && before.size() == after.size();
    for (std::size_t i = 0; generations && i < before.size(); ++i) {
      generations = before[i].tokens == after[i].tokens && before[i].score == after[i].score;
    }
  }
  return {bitwise, generations};
}

Outcome persistence() {
  const auto [bits_d, gen_d] = persistence_for<double>();
  const auto [bits_f, gen_f] = persistence_for<float>();
  return {bits_d && gen_d && bits_f && gen_f,
          std::string("double: round trip ") + (bits_d ? "bitwise" : "differs") + ", 10 beam generations " +
              (gen_d ? "identical" : "differ") + "; float: round trip " + (bits_f ? "bitwise" : "differs") +
              ", 10 beam generations " + (gen_f ? "identical" : "differ")};
}

}  // namespace
}  // namespace trigcopy

int main(int argc, char** argv) {
  using namespace trigcopy;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient correctness", gradients},
      {"distribution validity", distributions},
      {"copy-generate mixture brute force", mixture_brute_force},
      {"overfit", overfit},
      {"metric oracles", metric_oracles},
      {"beam properties", beam_properties},
      {"E2E reproduction", e2e_reproduction},
      {"trigger leading", trigger_leading},
      {"sweep machinery", sweep_machinery},
      {"persistence", persistence},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.contains(number)) continue;
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    all = all && outcome.pass;
    std::cout << (outcome.pass ? "PASS" : "FAIL") << " criterion " << number << " (" << criteria[i].first
              << "): " << outcome.detail << std::endl;
  }
  return all ? 0 : 1;
}
