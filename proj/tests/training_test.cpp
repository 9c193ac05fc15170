#include "trigcopy/decoding/decode.hpp"
#include "trigcopy/training/train.hpp"

#include "support/gradcheck.hpp"
#include "support/toy.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <sstream>

namespace trigcopy {
namespace {

using testing::random_toy_sample;
using testing::toy_config;
using testing::toy_intents;
using testing::toy_sample;
using testing::toy_vocab;

std::vector<DataSample> toy_set(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<DataSample> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_toy_sample(rng));
  return out;
}

TrainConfig quick_config() {
  TrainConfig t;
  t.batch_size = 4;
  t.epochs = 3;
  t.learning_rate = 0.01;
  t.seed = 9;
  return t;
}

Model<double> fresh_model(std::uint64_t seed = 3) { return Model<double>(toy_config(), toy_vocab(), toy_intents(), seed); }

bool bitwise_equal(const ParameterSet<double>& a, const ParameterSet<double>& b) {
  if (a.size() != b.size()) return false;
  for (ParamId id = 0; id < a.size(); ++id) {
    if (a[id].name != b[id].name || a[id].value.rows() != b[id].value.rows() ||
        a[id].value.cols() != b[id].value.cols()) {
      return false;
    }
    if (std::memcmp(a[id].value.data(), b[id].value.data(), sizeof(double) * a[id].value.size()) != 0) return false;
  }
  return true;
}

TEST(TrainConfig, Validation) {
  EXPECT_NO_THROW(TrainConfig{}.validate());
  TrainConfig t;
  t.batch_size = 0;
  EXPECT_THROW(t.validate(), std::invalid_argument);
  t = {};
  t.epochs = 0;
  EXPECT_THROW(t.validate(), std::invalid_argument);
  t = {};
  t.trigger_ratio = 1.5;
  EXPECT_THROW(t.validate(), std::invalid_argument);
  EXPECT_TRUE(default_train_config(true).dropout);
  EXPECT_FALSE(default_train_config(false).dropout);
  EXPECT_EQ(TrainConfig{}.batch_size, 64);
  EXPECT_EQ(TrainConfig{}.epochs, 18);
  EXPECT_DOUBLE_EQ(TrainConfig{}.learning_rate, 0.001);
}

TEST(NllLoss, GradientMatchesFiniteDifferencesOnTwoTokenSample) {
  auto model = fresh_model();
  DataSample s = toy_sample();
  s.references = {{"c", "zz"}};
  const auto result = testing::gradient_check(model.parameters(), [&](Graph<double>& g, const ParameterSet<double>&) {
    return nll_loss(g, model, s);
  });
  EXPECT_LT(result.max_relative_error, 1e-4);
}

TEST(NllLoss, FiniteAndPositive) {
  const auto model = fresh_model();
  for (const auto& s : toy_set(20, 4)) {
    Graph<double> g(false);
    const double v = nll_loss(g, model, s).value()(0, 0);
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_GT(v, 0.0);
  }
}

TEST(MeanLoss, EqualsAverageOfSampleLosses) {
  const auto model = fresh_model();
  const auto samples = toy_set(7, 5);
  double sum = 0;
  for (const auto& s : samples) {
    Graph<double> g(false);
    sum += nll_loss(g, model, s).value()(0, 0);
  }
  EXPECT_NEAR(mean_loss(model, samples, 3), sum / 7.0, 1e-10);
}

TEST(Train, SameSeedReplaysHistory) {
  const auto data = toy_set(10, 6);
  const auto a = train(fresh_model(), data, data, quick_config());
  const auto b = train(fresh_model(), data, data, quick_config());
  ASSERT_EQ(a.history.size(), 3u);
  EXPECT_NEAR(a.history[0].train_loss, b.history[0].train_loss, 1e-9);
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].train_loss, b.history[i].train_loss);
    EXPECT_EQ(a.history[i].validation_loss, b.history[i].validation_loss);
  }
  EXPECT_TRUE(bitwise_equal(a.best.model.parameters(), b.best.model.parameters()));
}

TEST(Train, DifferentSeedChangesBatchOrder) {
  const auto data = toy_set(10, 6);
  auto other = quick_config();
  other.seed = 10;
  EXPECT_NE(train(fresh_model(), data, data, quick_config()).history[0].train_loss,
            train(fresh_model(), data, data, other).history[0].train_loss);
}

TEST(Train, BestCheckpointHasMinimalValidationLoss) {
  const auto data = toy_set(12, 7);
  const auto validation = toy_set(5, 8);
  auto config = quick_config();
  config.epochs = 6;
  config.learning_rate = 0.05;  // large enough for validation loss to move non-monotonically
  config.trigger_ratio = 0.5;
  const auto result = train(fresh_model(), data, validation, config);
  double min = std::numeric_limits<double>::infinity();
  Index argmin = 0;
  for (const auto& r : result.history) {
    if (r.validation_loss < min) min = r.validation_loss, argmin = r.epoch;
  }
  EXPECT_EQ(result.best.metadata.validation_loss, min);
  EXPECT_EQ(result.best.metadata.epoch, argmin);
  EXPECT_EQ(result.best.metadata.seed, config.seed);
  EXPECT_EQ(result.best.metadata.trigger_ratio, 0.5);
  // The stored parameters reproduce the recorded loss on the same prepared split.
  const auto prepared = prepare_split(validation, 0.5, config.seed ^ 0x56414cull);
  EXPECT_NEAR(mean_loss(result.best.model, prepared, config.batch_size), min, 1e-12);
}

TEST(Train, TrainingLowersLoss) {
  const auto data = toy_set(8, 9);
  auto config = quick_config();
  config.epochs = 30;
  const auto result = train(fresh_model(), data, data, config);
  EXPECT_LT(result.history.back().train_loss, 0.5 * result.history.front().train_loss);
}

TEST(Train, StopBelowEndsEarly) {
  const auto data = toy_set(8, 9);
  auto config = quick_config();
  config.epochs = 50;
  config.stop_below = 100.0;
  EXPECT_EQ(train(fresh_model(), data, data, config).history.size(), 1u);
}

TEST(Train, NonFiniteLossNamesEpochAndBatch) {
  auto model = fresh_model();
  model.parameters()[model.parameters().id("generate.out.b")].value(0, 0) = std::nan("");
  const auto data = toy_set(8, 9);
  try {
    train(std::move(model), data, data, quick_config());
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_EQ(e.epoch(), 1);
    EXPECT_EQ(e.batch(), 1);
    EXPECT_NE(std::string(e.what()).find("epoch 1, batch 1"), std::string::npos);
  }
}

TEST(Train, EmptySplitsRejected) {
  const auto data = toy_set(3, 1);
  EXPECT_THROW(train(fresh_model(), {}, data, quick_config()), std::invalid_argument);
  EXPECT_THROW(train(fresh_model(), data, {}, quick_config()), std::invalid_argument);
}

TEST(Train, DropoutRunsAndStaysDeterministic) {
  const auto data = toy_set(8, 2);
  auto config = quick_config();
  config.dropout = true;
  const auto a = train(fresh_model(), data, data, config);
  const auto b = train(fresh_model(), data, data, config);
  EXPECT_EQ(a.history.back().train_loss, b.history.back().train_loss);
  config.dropout = false;
  EXPECT_NE(train(fresh_model(), data, data, config).history.front().train_loss, a.history.front().train_loss);
}

TEST(PrepareSplit, ExpandsReferencesAndAddsTriggers) {
  auto s = toy_sample();
  s.trigger = std::string(Vocabulary::kSosToken);
  s.references = {{"c", "d"}, {"e", "d"}};
  const std::vector<DataSample> samples(10, s);
  const auto all = prepare_split(samples, 1.0, 3);
  ASSERT_EQ(all.size(), 20u);
  for (const auto& x : all) {
    EXPECT_EQ(x.references.size(), 1u);
    EXPECT_EQ(x.trigger, x.references[0][0]);
  }
  const auto none = prepare_split(samples, 0.0, 3);
  for (const auto& x : none) EXPECT_FALSE(x.has_trigger());
}

TEST(MakeModel, VocabularyFromTrainingSplitOnly) {
  std::vector<DataSample> train_set = {toy_sample()};
  const auto model = make_model<double>(toy_config(), train_set, 1);
  EXPECT_TRUE(model.vocab().contains("zz"));
  EXPECT_FALSE(model.vocab().contains("f"));
  EXPECT_TRUE(model.intents().contains("ASK"));
}

TEST(History, JsonLinesRoundTrip) {
  const std::vector<EpochRecord> history = {{1, 2.5, 2.75, 0.5}, {2, 1.25, 1.5, 0.25}};
  std::stringstream ss;
  write_history(ss, history);
  const std::string text = ss.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  const auto back = read_history(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].epoch, 2);
  EXPECT_EQ(back[1].train_loss, 1.25);
  EXPECT_EQ(back[1].validation_loss, 1.5);
}

TrainingMetadata sample_metadata() {
  TrainingMetadata m;
  m.epoch = 7;
  m.validation_loss = 1.0 / 3.0;
  m.seed = 123456789012345ull;
  m.trigger_ratio = 0.65;
  m.run_config = {{"format", "e2e"}, {"epochs", 18}};
  return m;
}

std::string saved(const Model<double>& m, const TrainingMetadata& meta = sample_metadata()) {
  std::stringstream ss;
  save_checkpoint(m, meta, ss);
  return ss.str();
}

TEST(Checkpoint, RoundTripIsBitExact) {
  auto c = toy_config();
  c.attention = AttentionKind::kLuong;
  const Model<double> model(c, toy_vocab(), toy_intents(), 77);
  std::stringstream ss(saved(model));
  const auto back = load_checkpoint<double>(ss);
  EXPECT_TRUE(bitwise_equal(model.parameters(), back.model.parameters()));
  EXPECT_EQ(back.model.config(), c);
  EXPECT_EQ(back.model.vocab().tokens(), model.vocab().tokens());
  EXPECT_EQ(back.model.intents().labels(), model.intents().labels());
  EXPECT_EQ(back.metadata, sample_metadata());
}

TEST(Checkpoint, DecodingUnchangedAfterReload) {
  const auto model = fresh_model(31);
  std::stringstream ss(saved(model));
  const auto back = load_checkpoint<double>(ss);
  for (const auto& s : toy_set(10, 12)) {
    const auto a = greedy_decode(model, s, 10);
    const auto b = greedy_decode(back.model, s, 10);
    EXPECT_EQ(a.tokens, b.tokens);
    EXPECT_EQ(a.log_prob, b.log_prob);
  }
}

TEST(Checkpoint, FileRoundTrip) {
  const auto model = fresh_model(8);
  const auto path = std::filesystem::temp_directory_path() / "trigcopy_ckpt_test.bin";
  save_checkpoint(model, sample_metadata(), path);
  const auto back = load_checkpoint<double>(path);
  EXPECT_TRUE(bitwise_equal(model.parameters(), back.model.parameters()));
  std::filesystem::remove(path);
  EXPECT_THROW(load_checkpoint<double>(path), CheckpointError);
}

TEST(Checkpoint, FloatCheckpointLoadsAtEitherPrecision) {
  const Model<float> model(toy_config(), toy_vocab(), toy_intents(), 5);
  std::stringstream ss;
  save_checkpoint(model, {}, ss);
  const std::string bytes = ss.str();
  std::stringstream as_float(bytes), as_double(bytes);
  const auto f = load_checkpoint<float>(as_float);
  const auto d = load_checkpoint<double>(as_double);
  for (ParamId id = 0; id < model.parameters().size(); ++id) {
    EXPECT_TRUE(f.model.parameters()[id].value == model.parameters()[id].value);
    EXPECT_TRUE(d.model.parameters()[id].value == model.parameters()[id].value.cast<double>());
  }
}

TEST(Checkpoint, TruncationIsDetectedEverywhere) {
  const std::string bytes = saved(fresh_model());
  for (std::size_t cut : {std::size_t{0}, std::size_t{5}, std::size_t{10}, std::size_t{19}, std::size_t{40},
                          bytes.size() / 2, bytes.size() - 1}) {
    std::stringstream ss(bytes.substr(0, cut));
    EXPECT_THROW(load_checkpoint<double>(ss), CheckpointError) << "cut at " << cut;
  }
  std::stringstream extra(bytes + "x");
  EXPECT_THROW(load_checkpoint<double>(extra), CheckpointError);
}

TEST(Checkpoint, VersionMismatchIsNamed) {
  std::string bytes = saved(fresh_model());
  bytes[8] = 9;  // first byte of the little-endian version field
  std::stringstream ss(bytes);
  try {
    load_checkpoint<double>(ss);
    FAIL() << "expected CheckpointError";
  } catch (const CheckpointError& e) {
    EXPECT_NE(std::string(e.what()).find("version 9"), std::string::npos);
  }
}

TEST(Checkpoint, BadMagicRejected) {
  std::string bytes = saved(fresh_model());
  bytes[0] = 'X';
  std::stringstream ss(bytes);
  EXPECT_THROW(load_checkpoint<double>(ss), CheckpointError);
}

TEST(ModelConfigJson, RoundTripAndUnknownKeys) {
  for (const char* preset : {"M1", "M2", "M3", "M4", "M4'", "M5", "M6", "M7"}) {
    const auto c = model_preset(preset);
    EXPECT_EQ(model_config_from_json(to_json(c)), c) << preset;
  }
  EXPECT_THROW(model_config_from_json({{"hidden_size", 3}}), std::invalid_argument);
  EXPECT_EQ(model_config_from_json(nlohmann::json::object()), ModelConfig{});
}

}  // namespace
}  // namespace trigcopy
