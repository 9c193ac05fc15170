#include "trigcopy/model/config.hpp"

#include "trigcopy/data/tokenizer.hpp"

#include <stdexcept>

namespace trigcopy {

AttentionKind parse_attention(std::string_view name) {
  const std::string lower = to_lower(name);
  if (lower == "none") return AttentionKind::kNone;
  if (lower == "bahdanau") return AttentionKind::kBahdanau;
  if (lower == "luong") return AttentionKind::kLuong;
  throw std::invalid_argument("unknown attention kind '" + std::string(name) + "' (expected none, bahdanau or luong)");
}

std::string_view attention_name(AttentionKind kind) {
  switch (kind) {
    case AttentionKind::kNone: return "none";
    case AttentionKind::kBahdanau: return "bahdanau";
    case AttentionKind::kLuong: return "luong";
  }
  return "unknown";
}

void ModelConfig::validate() const {
  auto positive = [](Index v, const char* name) {
    if (v <= 0) throw std::invalid_argument(std::string("model config: ") + name + " must be positive");
  };
  positive(field_embedding, "field_embedding");
  positive(intent_embedding, "intent_embedding");
  positive(word_embedding, "word_embedding");
  positive(encoder_hidden, "encoder_hidden");
  positive(attention_depth, "attention_depth");
  positive(decoder_hidden, "decoder_hidden");
  positive(readout, "readout");
  positive(maxout_pool, "maxout_pool");
  positive(beam_width, "beam_width");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("model config: dropout must lie in [0, 1)");
  if (!(init_bound > 0.0)) throw std::invalid_argument("model config: init_bound must be positive");
}

ModelConfig model_preset(std::string_view name) {
  std::string key = to_lower(name);
  ModelConfig c;
  c.use_bilstm = false;
  c.use_pretrained_embeddings = false;
  c.attention = AttentionKind::kNone;
  c.use_copy = false;
  c.use_intent = false;
  c.beam_width = 1;
  const bool luong = key == "m4'" || key == "m4luong" || key == "m4-luong";
  if (luong) key = "m4";
  if (key.size() != 2 || key[0] != 'm' || key[1] < '1' || key[1] > '7') {
    throw std::invalid_argument("unknown model preset '" + std::string(name) + "' (expected M1..M7 or M4')");
  }
  const int level = key[1] - '0';
  if (level >= 2) c.use_bilstm = true;
  if (level >= 3) c.use_pretrained_embeddings = true;
  if (level >= 4) c.attention = luong ? AttentionKind::kLuong : AttentionKind::kBahdanau;
  if (level >= 5) c.use_copy = true;
  if (level >= 6) c.use_intent = true;
  if (level >= 7) c.beam_width = 3;
  return c;
}

}  // namespace trigcopy
