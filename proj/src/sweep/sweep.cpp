#include "trigcopy/sweep/sweep.hpp"

#include "trigcopy/data/triggers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace trigcopy {
namespace {

std::string ratio_tag(double ratio) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.4f", ratio);
  return buffer;
}

}  // namespace

void SweepConfig::validate() const {
  if (grid.empty()) throw std::invalid_argument("sweep grid must not be empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0 && grid[i] <= 1)) throw std::invalid_argument("sweep grid values must lie in [0, 1]");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw std::invalid_argument("sweep grid must be strictly increasing");
  }
  if (!(weight >= 0 && weight <= 100)) throw std::invalid_argument("sweep weight must lie in [0, 100]");
  if (seeds.empty()) throw std::invalid_argument("sweep needs at least one seed");
  model.validate();
  train.validate();
}

template <typename Scalar>
ExtremesPair eval_extremes(const Model<Scalar>& model, const std::vector<DataSample>& test, Metric metric,
                           Index max_len) {
  if (test.empty()) throw std::invalid_argument("eval_extremes: empty test set");
  const auto zero = evaluate_model(model, strip_triggers(test), max_len);
  const auto plus = evaluate_model(model, trigger_all(test), max_len);
  return aggregate_pair(zero, plus, metric);
}

std::vector<double> weighted_mean_curve(std::vector<SweepRow>& rows, double weight) {
  if (!(weight >= 0 && weight <= 100)) {
    throw ContractError("weighted_mean_curve: weight " + std::to_string(weight) + " outside [0, 100]");
  }
  const double w = weight / 100.0;
  std::vector<double> out;
  for (auto& r : rows) {
    r.mu_prime = w * r.plus_k + (1 - w) * r.zero_k;
    out.push_back(r.mu_prime);
  }
  return out;
}

double argmax_ratio(const std::vector<SweepRow>& rows) {
  const SweepRow* best = nullptr;
  for (const auto& r : rows) {
    if (r.failed) continue;
    if (!best || r.mu_prime > best->mu_prime || (r.mu_prime == best->mu_prime && r.ratio < best->ratio)) best = &r;
  }
  if (!best) throw std::invalid_argument("argmax_ratio: no usable rows");
  return best->ratio;
}

template <typename Scalar>
SweepResult run_sweep(const SweepConfig& config, const std::vector<DataSample>& train_set,
                      const std::vector<DataSample>& validation_set, const std::vector<DataSample>& test,
                      const RowCallback& on_row) {
  config.validate();
  if (config.cache_dir) std::filesystem::create_directories(*config.cache_dir);

  auto run_point = [&](double ratio) {
    SweepRow row;
    row.ratio = ratio;
    double zero = 0, plus = 0;
    try {
      for (const auto seed : config.seeds) {
        std::optional<Checkpoint<Scalar>> checkpoint;
        std::filesystem::path path;
        if (config.cache_dir) {
          path = *config.cache_dir / ("ratio_" + ratio_tag(ratio) + "_seed_" + std::to_string(seed) + ".ckpt");
          if (std::filesystem::exists(path)) checkpoint.emplace(load_checkpoint<Scalar>(path));
        }
        if (!checkpoint) {
          TrainConfig tc = config.train;
          tc.trigger_ratio = ratio;
          tc.seed = seed;
          auto model = make_model<Scalar>(config.model, train_set, seed, config.embeddings);
          auto result = train(std::move(model), train_set, validation_set, tc);
          checkpoint.emplace(std::move(result.best));
          if (config.cache_dir) save_checkpoint(checkpoint->model, checkpoint->metadata, path);
        }
        if (!path.empty()) row.checkpoints.push_back(path);
        const auto pair = eval_extremes(checkpoint->model, test, config.metric, config.max_len);
        zero += pair.zero_k;
        plus += pair.plus_k;
      }
      const auto n = static_cast<double>(config.seeds.size());
      row.zero_k = zero / n;
      row.plus_k = plus / n;
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
    return row;
  };

  SweepResult result;
  result.weight = config.weight;
  result.metric = config.metric;
  auto add_row = [&](double ratio) {
    result.rows.push_back(run_point(ratio));
    std::vector<SweepRow> one = {result.rows.back()};
    weighted_mean_curve(one, config.weight);
    result.rows.back().mu_prime = one.front().mu_prime;
    if (on_row) on_row(result.rows.back());
  };
  for (double ratio : config.grid) add_row(ratio);

  if (config.bisect && config.grid.size() > 1) {
    const double peak = argmax_ratio(result.rows);
    const auto it = std::find(config.grid.begin(), config.grid.end(), peak);
    const auto i = static_cast<std::size_t>(it - config.grid.begin());
    if (i > 0) add_row(0.5 * (config.grid[i - 1] + peak));
    if (i + 1 < config.grid.size()) add_row(0.5 * (peak + config.grid[i + 1]));
    std::sort(result.rows.begin(), result.rows.end(),
              [](const SweepRow& a, const SweepRow& b) { return a.ratio < b.ratio; });
  }
  weighted_mean_curve(result.rows, config.weight);
  const bool any_usable = std::any_of(result.rows.begin(), result.rows.end(), [](const SweepRow& r) { return !r.failed; });
  result.best_ratio = any_usable ? argmax_ratio(result.rows) : std::nan("");
  return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "r_K,metric_0K,metric_+K,mu_prime,is_argmax\n";
  for (const auto& r : result.rows) {
    out << r.ratio << ',';
    if (r.failed) {
      out << ",,,0\n";
      continue;
    }
    out << r.zero_k << ',' << r.plus_k << ',' << r.mu_prime << ',' << (r.ratio == result.best_ratio ? 1 : 0) << '\n';
  }
}

#define TRIGCOPY_INSTANTIATE_SWEEP(S)                                                                          \
  template ExtremesPair eval_extremes(const Model<S>&, const std::vector<DataSample>&, Metric, Index);        \
  template SweepResult run_sweep<S>(const SweepConfig&, const std::vector<DataSample>&,                       \
                                    const std::vector<DataSample>&, const std::vector<DataSample>&,           \
                                    const RowCallback&);

TRIGCOPY_INSTANTIATE_SWEEP(double)
TRIGCOPY_INSTANTIATE_SWEEP(float)

}  // namespace trigcopy
