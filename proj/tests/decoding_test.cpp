#include "trigcopy/decoding/decode.hpp"

#include "support/beam_oracle.hpp"
#include "support/toy.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <map>
#include <random>

namespace trigcopy {
namespace {

using testing::brute_force_best;
using testing::kNegInf;
using testing::Prefix;
using testing::prefix_expander;
using testing::PrefixState;
using testing::random_table;
using testing::Table;
using testing::random_toy_sample;
using testing::toy_config;
using testing::toy_intents;
using testing::toy_sample;
using testing::toy_vocab;

// Ids: 0..3 reserved, EOS = 2. Word tokens use ids 4 and 5.
constexpr TokenId kX = 4;
constexpr TokenId kY = 5;
constexpr TokenId kEos = Vocabulary::kEos;

std::vector<double> dist(std::initializer_list<std::pair<TokenId, double>> entries, std::size_t size = 6) {
  std::vector<double> p(size, 0.0);
  for (auto [id, v] : entries) p[static_cast<std::size_t>(id)] = v;
  return p;
}

// Greedy takes x (0.55) but every continuation of x is weak; y, x, EOS has probability 0.405.
std::vector<double> trap_table(const Prefix& p) {
  if (p.empty()) return dist({{kX, 0.55}, {kY, 0.45}});
  if (p.size() == 1 && p[0] == kX) return dist({{kX, 0.34}, {kY, 0.33}, {kEos, 0.33}});
  if (p.size() == 1 && p[0] == kY) return dist({{kX, 0.9}, {kY, 0.05}, {kEos, 0.05}});
  return dist({{kEos, 1.0}});
}

TEST(BeamSearch, GreedyTrapIsEscapedWithWidthTwo) {
  const Table table = trap_table;
  const auto expand = prefix_expander(table);
  const auto greedy = greedy_search(PrefixState{}, Vocabulary::kSos, expand, 10);
  EXPECT_EQ(greedy.tokens, (Prefix{kX, kX, kEos}));
  EXPECT_NEAR(std::exp(greedy.log_prob), 0.55 * 0.34, 1e-12);

  SearchOptions options;
  options.beam_width = 2;
  options.max_len = 10;
  const auto beam = beam_search(PrefixState{}, Vocabulary::kSos, expand, options);
  const auto oracle = brute_force_best(table, 3, false);
  EXPECT_EQ(oracle.tokens, (Prefix{kY, kX, kEos}));
  EXPECT_EQ(beam.front().tokens, oracle.tokens);
  EXPECT_NEAR(beam.front().log_prob, oracle.log_prob, 1e-12);
  EXPECT_GT(beam.front().log_prob, greedy.log_prob);
}

TEST(BeamSearch, FullWidthMatchesExhaustiveEnumeration) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const Table table = random_table(seed);
    for (Index max_len = 1; max_len <= 4; ++max_len) {
      for (bool normalize : {false, true}) {
        SearchOptions options;
        options.beam_width = 5 * 5 * 5 * 5;
        options.max_len = max_len;
        options.length_normalize = normalize;
        const auto beam = beam_search(PrefixState{}, Vocabulary::kSos, prefix_expander(table), options);
        const auto oracle = brute_force_best(table, max_len, normalize);
        ASSERT_EQ(beam.front().tokens, oracle.tokens) << "seed " << seed << " max_len " << max_len;
        EXPECT_NEAR(beam.front().score, oracle.score, 1e-12);
      }
    }
  }
}

TEST(BeamSearch, HypothesesAreRankedAndWellFormed) {
  const Table table = random_table(99);
  SearchOptions options;
  options.beam_width = 4;
  options.max_len = 6;
  const auto pool = beam_search(PrefixState{}, Vocabulary::kSos, prefix_expander(table), options);
  ASSERT_FALSE(pool.empty());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto& s = pool[i];
    if (i > 0) EXPECT_GE(pool[i - 1].score, s.score);
    EXPECT_LE(s.log_prob, 0.0);
    // EOS appears only as the final token of a finished hypothesis.
    for (std::size_t t = 0; t + 1 < s.tokens.size(); ++t) EXPECT_NE(s.tokens[t], kEos);
    EXPECT_EQ(s.finished, s.tokens.back() == kEos);
    if (!s.finished) EXPECT_EQ(static_cast<Index>(s.tokens.size()), options.max_len);
    EXPECT_NEAR(s.score, s.log_prob / static_cast<double>(s.tokens.size()), 1e-12);
  }
}

TEST(BeamSearch, PlainBeamKeepsAtMostWidthHypotheses) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SearchOptions options;
    options.beam_width = 3;
    options.max_len = 5;
    options.include_greedy = false;
    EXPECT_LE(beam_search(PrefixState{}, Vocabulary::kSos, prefix_expander(random_table(seed)), options).size(), 3u);
    options.include_greedy = true;
    EXPECT_LE(beam_search(PrefixState{}, Vocabulary::kSos, prefix_expander(random_table(seed)), options).size(), 4u);
  }
}

TEST(BeamSearch, TiesGoToLowestId) {
  const Table flat = [](const Prefix& p) {
    if (p.size() < 2) return dist({{kX, 0.5}, {kY, 0.5}});
    return dist({{kEos, 1.0}});
  };
  const auto greedy = greedy_search(PrefixState{}, Vocabulary::kSos, prefix_expander(flat), 10);
  EXPECT_EQ(greedy.tokens, (Prefix{kX, kX, kEos}));
  SearchOptions options;
  options.beam_width = 1;
  const auto beam = beam_search(PrefixState{}, Vocabulary::kSos, prefix_expander(flat), options);
  EXPECT_EQ(beam.front().tokens, greedy.tokens);
}

TEST(BeamSearch, MaxLenOneYieldsOneToken) {
  const Table table = random_table(5);
  EXPECT_EQ(greedy_search(PrefixState{}, Vocabulary::kSos, prefix_expander(table), 1).tokens.size(), 1u);
  SearchOptions options;
  options.max_len = 1;
  for (const auto& s : beam_search(PrefixState{}, Vocabulary::kSos, prefix_expander(table), options)) {
    EXPECT_EQ(s.tokens.size(), 1u);
  }
}

TEST(BeamSearch, InvalidOptionsRejected) {
  const Table table = random_table(5);
  SearchOptions options;
  options.beam_width = 0;
  EXPECT_THROW(beam_search(PrefixState{}, Vocabulary::kSos, prefix_expander(table), options), std::invalid_argument);
  EXPECT_THROW(greedy_search(PrefixState{}, Vocabulary::kSos, prefix_expander(table), 0), std::invalid_argument);
}

Model<double> random_model(std::uint64_t seed, bool copy = true) {
  auto c = toy_config();
  c.use_copy = copy;
  c.attention = seed % 3 == 0 ? AttentionKind::kLuong : AttentionKind::kBahdanau;
  return Model<double>(c, toy_vocab(), toy_intents(), seed);
}

TEST(Decode, WidthOneEqualsGreedyOnRandomModels) {
  std::mt19937_64 rng(2024);
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto model = random_model(seed, seed % 4 != 0);
    const auto sample = random_toy_sample(rng);
    const auto greedy = greedy_decode(model, sample, 12);
    const auto beam = beam_decode(model, sample, 1, 12);
    ASSERT_EQ(beam.size(), 1u);
    ASSERT_EQ(beam.front().ids, greedy.ids) << "seed " << seed;
    EXPECT_EQ(beam.front().tokens, greedy.tokens);
    EXPECT_NEAR(beam.front().log_prob, greedy.log_prob, 1e-9);
  }
}

TEST(Decode, BeamTopScoreAtLeastGreedy) {
  std::mt19937_64 rng(7);
  int worse = 0;
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    const auto model = random_model(seed);
    const auto sample = random_toy_sample(rng);
    const auto greedy = greedy_decode(model, sample, 12);
    const auto beam = beam_decode(model, sample, 3, 12);
    if (beam.front().score < greedy.score - 1e-12) ++worse;
  }
  EXPECT_EQ(worse, 0);
}

TEST(Decode, OutputsResolveCopiesAndAvoidUnk) {
  std::mt19937_64 rng(11);
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto model = random_model(seed);
    const auto sample = random_toy_sample(rng);
    const auto ext = ExtendedVocabulary(model.vocab(), sample);
    for (const auto& g : beam_decode(model, sample, 3, 10)) {
      EXPECT_EQ(g.tokens, ext.resolve(g.ids));
      for (TokenId id : g.ids) {
        EXPECT_NE(id, Vocabulary::kUnk);
        EXPECT_NE(id, Vocabulary::kPad);
        EXPECT_NE(id, Vocabulary::kSos);
        EXPECT_NE(id, Vocabulary::kEos);
      }
    }
  }
}

TEST(Decode, MaxLenOne) {
  const auto model = random_model(3);
  EXPECT_LE(greedy_decode(model, toy_sample(), 1).ids.size(), 1u);
  for (const auto& g : beam_decode(model, toy_sample(), 3, 1)) EXPECT_LE(g.ids.size(), 1u);
}

TEST(Decode, DispatchFollowsConfiguredWidth) {
  auto c = toy_config();
  c.beam_width = 1;
  const Model<double> m1(c, toy_vocab(), toy_intents(), 4);
  EXPECT_EQ(decode(m1, toy_sample()).ids, greedy_decode(m1, toy_sample()).ids);
  c.beam_width = 3;
  const Model<double> m3(c, toy_vocab(), toy_intents(), 4);
  EXPECT_EQ(decode(m3, toy_sample()).ids, beam_decode(m3, toy_sample(), 3).front().ids);
}

}  // namespace
}  // namespace trigcopy
