#pragma once

#include "trigcopy/model/model.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

namespace trigcopy {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainingMetadata {
  std::int64_t epoch = 0;
  double validation_loss = 0.0;
  std::uint64_t seed = 0;
  double trigger_ratio = 0.0;
  /// Resolved run configuration, echoed verbatim.
  nlohmann::json run_config = nlohmann::json::object();

  friend bool operator==(const TrainingMetadata&, const TrainingMetadata&) = default;
};

template <typename Scalar>
struct Checkpoint {
  Model<Scalar> model;
  TrainingMetadata metadata;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

nlohmann::json to_json(const ModelConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
ModelConfig model_config_from_json(const nlohmann::json& j);

/// Layout: 8-byte magic, u32 version, u32 scalar width, u64 manifest length,
/// JSON manifest (config, vocabulary, intents, metadata, tensor shapes), then
/// every tensor as raw little-endian row-major values.
template <typename Scalar>
void save_checkpoint(const Model<Scalar>& model, const TrainingMetadata& metadata, std::ostream& out);
template <typename Scalar>
void save_checkpoint(const Model<Scalar>& model, const TrainingMetadata& metadata, const std::filesystem::path& path);

/// Tensors stored at another precision are converted. Throws CheckpointError.
template <typename Scalar>
Checkpoint<Scalar> load_checkpoint(std::istream& in);
template <typename Scalar>
Checkpoint<Scalar> load_checkpoint(const std::filesystem::path& path);

}  // namespace trigcopy
