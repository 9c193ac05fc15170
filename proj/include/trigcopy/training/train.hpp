#pragma once

#include "trigcopy/data/embeddings.hpp"
#include "trigcopy/training/checkpoint.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <vector>

namespace trigcopy {

struct TrainConfig {
  Index batch_size = 64;
  Index epochs = 18;
  double learning_rate = 0.001;
  /// Applies the model's dropout rate during training.
  bool dropout = false;
  std::uint64_t seed = 1;
  /// Fraction of training (and validation) samples given a C4 trigger.
  double trigger_ratio = 0.0;
  /// Stop once the epoch's training loss falls below this value.
  std::optional<double> stop_below;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Dropout defaults to on for intent-bearing (Custom-style) data only.
TrainConfig default_train_config(bool custom_data);

struct EpochRecord {
  Index epoch = 0;
  double train_loss = 0.0;
  double validation_loss = 0.0;
  double seconds = 0.0;
};

/// Non-finite loss or gradient; names the epoch and 1-based batch index.
class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& message, Index epoch, Index batch);
  [[nodiscard]] Index epoch() const { return epoch_; }
  [[nodiscard]] Index batch() const { return batch_; }

 private:
  Index epoch_;
  Index batch_;
};

template <typename Scalar>
struct TrainResult {
  Checkpoint<Scalar> best;
  std::vector<EpochRecord> history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Vocabulary and intents come from the training split only (after trigger
/// augmentation, so triggers seen in training are in V). Pretrained rows are
/// loaded when the config asks for them and a table is given.
template <typename Scalar>
Model<Scalar> make_model(const ModelConfig& config, const std::vector<DataSample>& train, std::uint64_t seed,
                         const std::filesystem::path& embeddings = {});

/// Teacher-forced token-mean NLL of one sample.
template <typename Scalar>
Var<Scalar> nll_loss(Graph<Scalar>& graph, const Model<Scalar>& model, const DataSample& sample);

/// Mean per-sample loss without gradients, in batches.
template <typename Scalar>
double mean_loss(const Model<Scalar>& model, const std::vector<DataSample>& samples, Index batch_size = 64);

/// Both splits are expanded to one sample per reference and augmented with
/// triggers at `trigger_ratio` once. Adam with a constant learning rate, one
/// validation pass per epoch; the result holds the parameters of the epoch
/// with the lowest validation loss (earliest on ties).
template <typename Scalar>
TrainResult<Scalar> train(Model<Scalar> model, const std::vector<DataSample>& train_set,
                          const std::vector<DataSample>& validation_set, const TrainConfig& config,
                          const EpochCallback& on_epoch = {});

/// Trigger augmentation exactly as train() applies it to each split.
std::vector<DataSample> prepare_split(const std::vector<DataSample>& samples, double trigger_ratio,
                                      std::uint64_t seed);

/// One JSON object per line: epoch, train_loss, validation_loss, seconds.
/// read_history skips lines without an epoch (header records).
void write_history(std::ostream& out, const std::vector<EpochRecord>& history);
std::vector<EpochRecord> read_history(std::istream& in);

}  // namespace trigcopy
