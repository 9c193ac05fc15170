#include "trigcopy/training/checkpoint.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>

namespace trigcopy {
namespace {

constexpr std::array<char, 8> kMagic = {'T', 'R', 'G', 'C', 'K', 'P', 'T', '\n'};

template <typename T>
void write_le(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T read_le(std::istream& in, const char* what) {
  std::array<char, sizeof(T)> bytes;
  if (!in.read(bytes.data(), bytes.size())) throw CheckpointError(std::string("truncated checkpoint while reading ") + what);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

template <typename Stored, typename Scalar>
void read_tensor(std::istream& in, Tensor<Scalar>& t, const std::string& name) {
  for (Index i = 0; i < t.size(); ++i) {
    t.data()[i] = static_cast<Scalar>(read_le<Stored>(in, name.c_str()));
  }
}

}  // namespace

nlohmann::json to_json(const ModelConfig& c) {
  return {
      {"field_embedding", c.field_embedding},
      {"intent_embedding", c.intent_embedding},
      {"word_embedding", c.word_embedding},
      {"encoder_hidden", c.encoder_hidden},
      {"attention_depth", c.attention_depth},
      {"decoder_hidden", c.decoder_hidden},
      {"readout", c.readout},
      {"maxout_pool", c.maxout_pool},
      {"dropout", c.dropout},
      {"init_bound", c.init_bound},
      {"use_bilstm", c.use_bilstm},
      {"use_pretrained_embeddings", c.use_pretrained_embeddings},
      {"attention", std::string(attention_name(c.attention))},
      {"use_copy", c.use_copy},
      {"use_intent", c.use_intent},
      {"beam_width", c.beam_width},
  };
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "field_embedding") c.field_embedding = value.get<Index>();
    else if (key == "intent_embedding") c.intent_embedding = value.get<Index>();
    else if (key == "word_embedding") c.word_embedding = value.get<Index>();
    else if (key == "encoder_hidden") c.encoder_hidden = value.get<Index>();
    else if (key == "attention_depth") c.attention_depth = value.get<Index>();
    else if (key == "decoder_hidden") c.decoder_hidden = value.get<Index>();
    else if (key == "readout") c.readout = value.get<Index>();
    else if (key == "maxout_pool") c.maxout_pool = value.get<Index>();
    else if (key == "dropout") c.dropout = value.get<double>();
    else if (key == "init_bound") c.init_bound = value.get<double>();
    else if (key == "use_bilstm") c.use_bilstm = value.get<bool>();
    else if (key == "use_pretrained_embeddings") c.use_pretrained_embeddings = value.get<bool>();
    else if (key == "attention") c.attention = parse_attention(value.get<std::string>());
    else if (key == "use_copy") c.use_copy = value.get<bool>();
    else if (key == "use_intent") c.use_intent = value.get<bool>();
    else if (key == "beam_width") c.beam_width = value.get<Index>();
    else throw std::invalid_argument("unknown model config key '" + key + "'");
  }
  c.validate();
  return c;
}

template <typename Scalar>
void save_checkpoint(const Model<Scalar>& model, const TrainingMetadata& metadata, std::ostream& out) {
  nlohmann::json tensors = nlohmann::json::array();
  for (const auto& p : model.parameters()) tensors.push_back({{"name", p.name}, {"rows", p.value.rows()}, {"cols", p.value.cols()}});
  const nlohmann::json manifest = {
      {"config", to_json(model.config())},
      {"vocabulary", model.vocab().tokens()},
      {"intents", model.intents().labels()},
      {"metadata",
       {{"epoch", metadata.epoch},
        {"validation_loss", metadata.validation_loss},
        {"seed", metadata.seed},
        {"trigger_ratio", metadata.trigger_ratio},
        {"run_config", metadata.run_config}}},
      {"tensors", tensors},
  };
  const std::string text = manifest.dump();
  out.write(kMagic.data(), kMagic.size());
  write_le<std::uint32_t>(out, kCheckpointVersion);
  write_le<std::uint32_t>(out, sizeof(Scalar));
  write_le<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& p : model.parameters()) {
    for (Index i = 0; i < p.value.size(); ++i) write_le<Scalar>(out, p.value.data()[i]);
  }
  if (!out) throw CheckpointError("failed to write checkpoint");
}

template <typename Scalar>
void save_checkpoint(const Model<Scalar>& model, const TrainingMetadata& metadata, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot open '" + path.string() + "' for writing");
  save_checkpoint(model, metadata, out);
}

template <typename Scalar>
Checkpoint<Scalar> load_checkpoint(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size())) throw CheckpointError("truncated checkpoint while reading magic");
  if (magic != kMagic) throw CheckpointError("not a checkpoint file (bad magic)");
  const auto version = read_le<std::uint32_t>(in, "version");
  if (version != kCheckpointVersion) {
    throw CheckpointError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  }
  const auto width = read_le<std::uint32_t>(in, "scalar width");
  if (width != 4 && width != 8) throw CheckpointError("unsupported scalar width " + std::to_string(width));
  const auto length = read_le<std::uint64_t>(in, "manifest length");
  std::string text(length, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(length))) throw CheckpointError("truncated checkpoint while reading manifest");

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("corrupt checkpoint manifest: ") + e.what());
  }
  try {
    const ModelConfig config = model_config_from_json(manifest.at("config"));
    Vocabulary vocab;
    const auto tokens = manifest.at("vocabulary").get<std::vector<std::string>>();
    for (std::size_t i = Vocabulary::kReserved; i < tokens.size(); ++i) vocab.add(tokens[i]);
    if (vocab.tokens() != tokens) throw CheckpointError("vocabulary in checkpoint is inconsistent");
    IntentSet intents;
    const auto labels = manifest.at("intents").get<std::vector<std::string>>();
    for (std::size_t i = 1; i < labels.size(); ++i) intents.add(labels[i]);

    ParameterSet<Scalar> params;
    for (const auto& t : manifest.at("tensors")) {
      const auto name = t.at("name").get<std::string>();
      Tensor<Scalar> value(t.at("rows").get<Index>(), t.at("cols").get<Index>());
      if (width == 8) read_tensor<double>(in, value, name);
      else read_tensor<float>(in, value, name);
      params.add(name, std::move(value));
    }
    if (in.peek() != std::char_traits<char>::eof()) throw CheckpointError("trailing bytes after the last tensor");

    const auto& m = manifest.at("metadata");
    TrainingMetadata metadata;
    metadata.epoch = m.at("epoch").get<std::int64_t>();
    metadata.validation_loss = m.at("validation_loss").get<double>();
    metadata.seed = m.at("seed").get<std::uint64_t>();
    metadata.trigger_ratio = m.at("trigger_ratio").get<double>();
    metadata.run_config = m.at("run_config");
    return {Model<Scalar>(config, std::move(vocab), std::move(intents), std::move(params)), std::move(metadata)};
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("corrupt checkpoint manifest: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(std::string("checkpoint does not match the model layout: ") + e.what());
  }
}

template <typename Scalar>
Checkpoint<Scalar> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint '" + path.string() + "'");
  return load_checkpoint<Scalar>(in);
}

#define TRIGCOPY_INSTANTIATE_CHECKPOINT(S)                                                    \
  template void save_checkpoint(const Model<S>&, const TrainingMetadata&, std::ostream&);    \
  template void save_checkpoint(const Model<S>&, const TrainingMetadata&,                    \
                                const std::filesystem::path&);                               \
  template Checkpoint<S> load_checkpoint<S>(std::istream&);                                  \
  template Checkpoint<S> load_checkpoint<S>(const std::filesystem::path&);

TRIGCOPY_INSTANTIATE_CHECKPOINT(double)
TRIGCOPY_INSTANTIATE_CHECKPOINT(float)

}  // namespace trigcopy
