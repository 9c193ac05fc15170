#include "trigcopy/data/triggers.hpp"
#include "trigcopy/sweep/sweep.hpp"

#include "support/toy.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

namespace trigcopy {
namespace {

std::vector<SweepRow> rows_from(const std::vector<double>& ratios, const std::vector<double>& zero,
                                const std::vector<double>& plus) {
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    SweepRow r;
    r.ratio = ratios[i];
    r.zero_k = zero[i];
    r.plus_k = plus[i];
    rows.push_back(r);
  }
  return rows;
}

TEST(WeightedMean, AffineIdentityPerRow) {
  auto rows = rows_from({0, 0.5, 1}, {60, 50, 40}, {70, 80, 90});
  const auto half = weighted_mean_curve(rows, 50);
  EXPECT_DOUBLE_EQ(half[0], 65.0);
  EXPECT_DOUBLE_EQ(rows[1].mu_prime, 65.0);
  const auto zero = weighted_mean_curve(rows, 0);
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_DOUBLE_EQ(zero[i], rows[i].zero_k);
  const auto full = weighted_mean_curve(rows, 100);
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_DOUBLE_EQ(full[i], rows[i].plus_k);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 100);
  for (int k = 0; k < 100; ++k) {
    const double w = u(rng);
    weighted_mean_curve(rows, w);
    for (const auto& r : rows) EXPECT_DOUBLE_EQ(r.mu_prime, (w / 100) * r.plus_k + (1 - w / 100) * r.zero_k);
  }
}

TEST(WeightedMean, WeightOutsideRangeIsContractError) {
  auto rows = rows_from({0}, {1}, {2});
  EXPECT_THROW(weighted_mean_curve(rows, -0.1), ContractError);
  EXPECT_THROW(weighted_mean_curve(rows, 100.5), ContractError);
}

std::vector<SweepRow> curve(const std::vector<double>& ratios, const std::function<double(double)>& f) {
  std::vector<SweepRow> rows;
  for (double r : ratios) {
    SweepRow row;
    row.ratio = r;
    row.mu_prime = f(r);
    rows.push_back(row);
  }
  return rows;
}

TEST(ArgmaxRatio, TieBreakAndUnimodalPeak) {
  const std::vector<double> grid = {0.0, 0.25, 0.5, 0.75, 1.0};
  EXPECT_EQ(argmax_ratio(curve(grid, [](double) { return 42.0; })), 0.0);
  const auto peak = curve(grid, [](double r) { return 70 - 40 * (r - 0.5) * (r - 0.5); });
  // Oracle: enumerate the grid.
  double best = -1, at = -1;
  for (const auto& row : peak) {
    if (row.mu_prime > best) best = row.mu_prime, at = row.ratio;
  }
  EXPECT_EQ(at, 0.5);
  EXPECT_EQ(argmax_ratio(peak), 0.5);
}

TEST(ArgmaxRatio, InvariantUnderPositiveAffineTransform) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 100);
  for (int k = 0; k < 200; ++k) {
    auto rows = curve({0, 0.2, 0.4, 0.6, 0.8, 1.0}, [&](double) { return std::round(u(rng) / 10); });
    const double before = argmax_ratio(rows);
    const double a = 0.1 + u(rng), b = u(rng) - 50;
    for (auto& r : rows) r.mu_prime = a * r.mu_prime + b;
    EXPECT_EQ(argmax_ratio(rows), before);
  }
}

TEST(ArgmaxRatio, FailedRowsIgnored) {
  auto rows = curve({0, 0.5, 1}, [](double r) { return r; });
  rows[2].failed = true;
  EXPECT_EQ(argmax_ratio(rows), 0.5);
  rows[0].failed = rows[1].failed = true;
  EXPECT_THROW(argmax_ratio(rows), std::invalid_argument);
}

TEST(SweepConfig, Validation) {
  SweepConfig c;
  EXPECT_NO_THROW(c.validate());
  c.grid = {0.5, 0.25};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.grid = {0.0, 1.5};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.weight = 101;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.seeds.clear();
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

std::vector<DataSample> toy_set(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<DataSample> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(testing::random_toy_sample(rng));
  return out;
}

SweepConfig toy_sweep() {
  SweepConfig c;
  c.grid = {0.0, 1.0};
  c.model = testing::toy_config();
  c.model.use_pretrained_embeddings = false;
  c.train.batch_size = 4;
  c.train.epochs = 2;
  c.train.learning_rate = 0.01;
  c.max_len = 8;
  c.metric = Metric::kRougeL;
  return c;
}

TEST(EvalExtremes, OneSampleAndSymmetry) {
  const auto data = toy_set(6, 3);
  const auto model = make_model<double>(testing::toy_config(), data, 2);
  const std::vector<DataSample> one = {data[0]};
  const auto pair = eval_extremes(model, one, Metric::kRougeL, 8);
  EXPECT_TRUE(std::isfinite(pair.zero_k));
  EXPECT_TRUE(std::isfinite(pair.plus_k));
  EXPECT_GE(pair.zero_k, 0.0);
  EXPECT_LE(pair.plus_k, 100.0);
  // The pair is (stripped, triggered); evaluating the variants the other way round swaps it.
  const auto zero = evaluate_model(model, strip_triggers(data), 8);
  const auto plus = evaluate_model(model, trigger_all(data), 8);
  const auto forward = aggregate_pair(zero, plus, Metric::kRougeL);
  const auto swapped = aggregate_pair(plus, zero, Metric::kRougeL);
  EXPECT_EQ(forward.zero_k, swapped.plus_k);
  EXPECT_EQ(forward.plus_k, swapped.zero_k);
  EXPECT_EQ(eval_extremes(model, data, Metric::kRougeL, 8).zero_k, forward.zero_k);
  EXPECT_THROW(eval_extremes(model, {}, Metric::kRougeL, 8), std::invalid_argument);
}

TEST(RunSweep, SmallestGridWithCacheReplay) {
  const auto train_set = toy_set(12, 4);
  const auto validation = toy_set(4, 5);
  const auto test = toy_set(5, 6);
  auto config = toy_sweep();
  const auto dir = std::filesystem::temp_directory_path() / "trigcopy_sweep_test";
  std::filesystem::remove_all(dir);
  config.cache_dir = dir;
  std::size_t callbacks = 0;
  const auto first = run_sweep<double>(config, train_set, validation, test, [&](const SweepRow&) { ++callbacks; });
  EXPECT_EQ(callbacks, 2u);
  ASSERT_EQ(first.rows.size(), 2u);
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) files += entry.path().extension() == ".ckpt";
  EXPECT_EQ(files, 2u);
  EXPECT_TRUE(first.best_ratio == 0.0 || first.best_ratio == 1.0);
  for (const auto& r : first.rows) {
    EXPECT_FALSE(r.failed) << r.error;
    EXPECT_DOUBLE_EQ(r.mu_prime, 0.5 * r.plus_k + 0.5 * r.zero_k);
  }
  const auto stamp = std::filesystem::last_write_time(first.rows[0].checkpoints[0]);

  // With an empty training split, only cached checkpoints can produce rows.
  const auto second = run_sweep<double>(config, {}, validation, test);
  ASSERT_EQ(second.rows.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_FALSE(second.rows[i].failed) << second.rows[i].error;
    EXPECT_EQ(second.rows[i].zero_k, first.rows[i].zero_k);
    EXPECT_EQ(second.rows[i].plus_k, first.rows[i].plus_k);
  }
  EXPECT_EQ(second.best_ratio, first.best_ratio);
  EXPECT_EQ(std::filesystem::last_write_time(first.rows[0].checkpoints[0]), stamp);
  std::filesystem::remove_all(dir);
}

TEST(RunSweep, DeterministicWithoutCache) {
  const auto train_set = toy_set(10, 7);
  const auto test = toy_set(4, 8);
  const auto config = toy_sweep();
  const auto a = run_sweep<double>(config, train_set, train_set, test);
  const auto b = run_sweep<double>(config, train_set, train_set, test);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].zero_k, b.rows[i].zero_k);
    EXPECT_EQ(a.rows[i].plus_k, b.rows[i].plus_k);
  }
}

TEST(RunSweep, MultiSeedAndBisect) {
  const auto train_set = toy_set(8, 9);
  const auto test = toy_set(3, 10);
  auto config = toy_sweep();
  config.grid = {0.0, 0.5, 1.0};
  config.train.epochs = 1;
  config.seeds = {1, 2};
  config.bisect = true;
  const auto result = run_sweep<double>(config, train_set, train_set, test);
  ASSERT_EQ(result.rows.size(), result.best_ratio == 0.5 ? 5u : 4u);
  for (std::size_t i = 1; i < result.rows.size(); ++i) EXPECT_LT(result.rows[i - 1].ratio, result.rows[i].ratio);
  // Seed average: the 0.0 row equals the mean of its two single-seed runs.
  double zero = 0;
  for (std::uint64_t seed : {1, 2}) {
    auto single = config;
    single.grid = {0.0};
    single.seeds = {seed};
    single.bisect = false;
    zero += run_sweep<double>(single, train_set, train_set, test).rows[0].zero_k;
  }
  EXPECT_NEAR(result.rows[0].zero_k, zero / 2, 1e-9);
}

TEST(RunSweep, FailedRunsAreMarked) {
  auto broken = toy_set(6, 11);
  broken[2].values.clear();
  broken[2].fields.clear();
  const auto result = run_sweep<double>(toy_sweep(), broken, broken, toy_set(2, 12));
  ASSERT_EQ(result.rows.size(), 2u);
  for (const auto& r : result.rows) {
    EXPECT_TRUE(r.failed);
    EXPECT_FALSE(r.error.empty());
  }
  EXPECT_TRUE(std::isnan(result.best_ratio));
  std::ostringstream csv;
  write_sweep_csv(csv, result);
  EXPECT_EQ(csv.str(), "r_K,metric_0K,metric_+K,mu_prime,is_argmax\n0,,,,0\n1,,,,0\n");
}

TEST(SweepCsv, ColumnsAndArgmaxFlag) {
  SweepResult result;
  result.rows = rows_from({0, 0.5}, {60, 62}, {70, 80});
  weighted_mean_curve(result.rows, 50);
  result.best_ratio = argmax_ratio(result.rows);
  std::ostringstream csv;
  write_sweep_csv(csv, result);
  EXPECT_EQ(csv.str(), "r_K,metric_0K,metric_+K,mu_prime,is_argmax\n0,60,70,65,0\n0.5,62,80,71,1\n");
}

}  // namespace
}  // namespace trigcopy
