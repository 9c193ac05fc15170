#include "trigcopy/training/train.hpp"

#include "trigcopy/data/triggers.hpp"
#include "trigcopy/numerics/adam.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

namespace trigcopy {
namespace {

// Independent streams fanned out from the run seed.
constexpr std::uint64_t kShuffleStream = 0x5348554646ull;
constexpr std::uint64_t kDropoutStream = 0x44524f50ull;
constexpr std::uint64_t kValidationStream = 0x56414cull;

std::vector<const DataSample*> batch_of(const std::vector<DataSample>& samples, const std::vector<std::size_t>& order,
                                        std::size_t begin, std::size_t end) {
  std::vector<const DataSample*> batch;
  for (std::size_t i = begin; i < end; ++i) batch.push_back(&samples[order[i]]);
  return batch;
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("batch_size must be at least 1");
  if (epochs < 1) throw std::invalid_argument("epochs must be at least 1");
  if (!(learning_rate > 0)) throw std::invalid_argument("learning_rate must be positive");
  if (!(trigger_ratio >= 0 && trigger_ratio <= 1)) throw std::invalid_argument("trigger_ratio must lie in [0, 1]");
}

TrainConfig default_train_config(bool custom_data) {
  TrainConfig c;
  c.dropout = custom_data;
  return c;
}

TrainingError::TrainingError(const std::string& message, Index epoch, Index batch)
    : std::runtime_error("epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch) + ": " + message),
      epoch_(epoch),
      batch_(batch) {}

std::vector<DataSample> prepare_split(const std::vector<DataSample>& samples, double trigger_ratio,
                                      std::uint64_t seed) {
  return augment_with_triggers(expand_references(samples), trigger_ratio, seed);
}

template <typename Scalar>
Model<Scalar> make_model(const ModelConfig& config, const std::vector<DataSample>& train, std::uint64_t seed,
                         const std::filesystem::path& embeddings) {
  if (train.empty()) throw std::invalid_argument("make_model: empty training split");
  Model<Scalar> model(config, build_vocab(train), build_intents(train), seed);
  if (config.use_pretrained_embeddings && !embeddings.empty()) {
    EmbeddingOptions options;
    options.dimension = config.word_embedding;
    options.seed = seed;
    options.random_bound = config.init_bound;
    model.load_pretrained(load_embeddings(embeddings, model.vocab(), options));
  }
  return model;
}

template <typename Scalar>
Var<Scalar> nll_loss(Graph<Scalar>& graph, const Model<Scalar>& model, const DataSample& sample) {
  return model.loss(graph, sample);
}

template <typename Scalar>
double mean_loss(const Model<Scalar>& model, const std::vector<DataSample>& samples, Index batch_size) {
  if (samples.empty()) throw std::invalid_argument("mean_loss: no samples");
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  double total = 0;
  const auto step = static_cast<std::size_t>(std::max<Index>(1, batch_size));
  for (std::size_t begin = 0; begin < samples.size(); begin += step) {
    const std::size_t end = std::min(samples.size(), begin + step);
    const auto batch = batch_of(samples, order, begin, end);
    Graph<Scalar> graph(false);
    const auto loss = model.loss(graph, std::span<const DataSample* const>(batch));
    total += static_cast<double>(loss.value()(0, 0)) * static_cast<double>(end - begin);
  }
  return total / static_cast<double>(samples.size());
}

template <typename Scalar>
TrainResult<Scalar> train(Model<Scalar> model, const std::vector<DataSample>& train_set,
                          const std::vector<DataSample>& validation_set, const TrainConfig& config,
                          const EpochCallback& on_epoch) {
  config.validate();
  if (train_set.empty()) throw std::invalid_argument("train: empty training split");
  if (validation_set.empty()) throw std::invalid_argument("train: empty validation split");
  const auto train_samples = prepare_split(train_set, config.trigger_ratio, config.seed);
  const auto validation_samples = prepare_split(validation_set, config.trigger_ratio, config.seed ^ kValidationStream);

  std::mt19937_64 shuffle_rng(config.seed ^ kShuffleStream);
  std::mt19937_64 dropout_rng(config.seed ^ kDropoutStream);
  AdamOptions adam_options;
  adam_options.learning_rate = config.learning_rate;
  AdamState<Scalar> adam(model.parameters(), adam_options);

  std::vector<std::size_t> order(train_samples.size());
  std::iota(order.begin(), order.end(), 0);
  const auto step = static_cast<std::size_t>(config.batch_size);

  TrainResult<Scalar> result{{Model<Scalar>(model.config(), model.vocab(), model.intents(), model.parameters()), {}}, {}};
  double best = std::numeric_limits<double>::infinity();

  for (Index epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double total = 0;
    Index batch_index = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += step) {
      ++batch_index;
      const std::size_t end = std::min(order.size(), begin + step);
      const auto batch = batch_of(train_samples, order, begin, end);
      Graph<Scalar> graph(true);
      Gradients<Scalar> grads;
      double value = 0;
      try {
        const auto loss = model.loss(graph, std::span<const DataSample* const>(batch),
                                     config.dropout ? &dropout_rng : nullptr);
        value = static_cast<double>(loss.value()(0, 0));
        grads = graph.backward(loss, model.parameters());
      } catch (const NumericError& e) {
        throw TrainingError(std::string("non-finite loss (") + e.what() + ")", epoch, batch_index);
      }
      if (!std::isfinite(value)) throw TrainingError("non-finite loss", epoch, batch_index);
      if (!grads.all_finite()) throw TrainingError("non-finite gradient", epoch, batch_index);
      adam.step(model.parameters(), grads);
      total += value * static_cast<double>(end - begin);
    }
    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = total / static_cast<double>(order.size());
    try {
      record.validation_loss = mean_loss(model, validation_samples, config.batch_size);
    } catch (const NumericError& e) {
      throw TrainingError(std::string("non-finite validation loss (") + e.what() + ")", epoch, 0);
    }
    record.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.history.push_back(record);
    if (record.validation_loss < best) {
      best = record.validation_loss;
      result.best.model.parameters() = model.parameters();
      result.best.metadata.epoch = epoch;
      result.best.metadata.validation_loss = record.validation_loss;
    }
    if (on_epoch) on_epoch(record);
    if (config.stop_below && record.train_loss < *config.stop_below) break;
  }
  result.best.metadata.seed = config.seed;
  result.best.metadata.trigger_ratio = config.trigger_ratio;
  return result;
}

void write_history(std::ostream& out, const std::vector<EpochRecord>& history) {
  for (const auto& r : history) {
    out << nlohmann::json{{"epoch", r.epoch},
                          {"train_loss", r.train_loss},
                          {"validation_loss", r.validation_loss},
                          {"seconds", r.seconds}}
               .dump()
        << '\n';
  }
}

std::vector<EpochRecord> read_history(std::istream& in) {
  std::vector<EpochRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    if (!j.contains("epoch")) continue;  // header records such as the run configuration
    out.push_back({j.at("epoch").get<Index>(), j.at("train_loss").get<double>(), j.at("validation_loss").get<double>(),
                   j.value("seconds", 0.0)});
  }
  return out;
}

#define TRIGCOPY_INSTANTIATE_TRAIN(S)                                                                            \
  template Model<S> make_model(const ModelConfig&, const std::vector<DataSample>&, std::uint64_t,               \
                               const std::filesystem::path&);                                                   \
  template Var<S> nll_loss(Graph<S>&, const Model<S>&, const DataSample&);                                      \
  template double mean_loss(const Model<S>&, const std::vector<DataSample>&, Index);                            \
  template TrainResult<S> train(Model<S>, const std::vector<DataSample>&, const std::vector<DataSample>&,        \
                                const TrainConfig&, const EpochCallback&);

TRIGCOPY_INSTANTIATE_TRAIN(double)
TRIGCOPY_INSTANTIATE_TRAIN(float)

}  // namespace trigcopy
