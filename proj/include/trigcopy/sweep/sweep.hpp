#pragma once

#include "trigcopy/metrics/evaluation.hpp"
#include "trigcopy/training/train.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace trigcopy {

struct SweepConfig {
  std::vector<double> grid = {0.0, 0.25, 0.5, 0.75, 1.0};
  /// Heuristic weight w in [0, 100] of the triggered evaluation.
  double weight = 50.0;
  Metric metric = Metric::kBleu;
  ModelConfig model;
  /// Template; trigger_ratio and seed are set per run.
  TrainConfig train;
  std::vector<std::uint64_t> seeds = {1};
  /// After the coarse pass, add the midpoints on both sides of the peak once.
  bool bisect = false;
  /// Checkpoints are stored here and reused when present.
  std::optional<std::filesystem::path> cache_dir;
  std::filesystem::path embeddings;
  Index max_len = kDefaultMaxLen;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct SweepRow {
  double ratio = 0.0;
  double zero_k = 0.0;  // metric with every trigger removed
  double plus_k = 0.0;  // metric with every sample triggered
  double mu_prime = 0.0;
  bool failed = false;
  std::string error;
  std::vector<std::filesystem::path> checkpoints;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // sorted by ratio
  double best_ratio = 0.0;
  double weight = 50.0;
  Metric metric = Metric::kBleu;
};

/// Metric on the test set with all triggers stripped, then with every sample
/// triggered by its first reference's first word.
template <typename Scalar>
ExtremesPair eval_extremes(const Model<Scalar>& model, const std::vector<DataSample>& test, Metric metric,
                           Index max_len = kDefaultMaxLen);

/// mu' = (w/100) * (+K) + (1 - w/100) * (0K) per row, stored and returned.
/// Throws ContractError for w outside [0, 100].
std::vector<double> weighted_mean_curve(std::vector<SweepRow>& rows, double weight);

/// Ratio with the largest mu' among rows that did not fail; ties go to the
/// smallest ratio. Throws std::invalid_argument when no row is usable.
double argmax_ratio(const std::vector<SweepRow>& rows);

using RowCallback = std::function<void(const SweepRow&)>;

/// One training run per grid point and seed (or a cached checkpoint), extremes
/// evaluated on `test`, averaged over seeds. A failed run marks its row.
template <typename Scalar>
SweepResult run_sweep(const SweepConfig& config, const std::vector<DataSample>& train_set,
                      const std::vector<DataSample>& validation_set, const std::vector<DataSample>& test,
                      const RowCallback& on_row = {});

/// Columns: r_K, metric_0K, metric_+K, mu_prime, is_argmax. Failed rows have empty metric cells.
void write_sweep_csv(std::ostream& out, const SweepResult& result);

}  // namespace trigcopy
