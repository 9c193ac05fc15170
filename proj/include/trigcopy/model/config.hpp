#pragma once

#include "trigcopy/numerics/tensor.hpp"

#include <string>
#include <string_view>

namespace trigcopy {

enum class AttentionKind { kNone, kBahdanau, kLuong };

AttentionKind parse_attention(std::string_view name);
std::string_view attention_name(AttentionKind kind);

struct ModelConfig {
  Index field_embedding = 16;
  Index intent_embedding = 16;
  /// Shared by values, triggers and decoder inputs.
  Index word_embedding = 50;
  /// Per direction; a unidirectional encoder uses twice this.
  Index encoder_hidden = 128;
  /// Width of every memory slot.
  Index attention_depth = 256;
  Index decoder_hidden = 256;
  /// Output width of the maxout readout feeding the generate head.
  Index readout = 768;
  Index maxout_pool = 2;
  double dropout = 0.2;
  double init_bound = 0.08;

  bool use_bilstm = true;
  bool use_pretrained_embeddings = true;
  AttentionKind attention = AttentionKind::kBahdanau;
  bool use_copy = true;
  bool use_intent = true;
  Index beam_width = 3;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Ablation rows M1..M7 and M4' (Luong attention). Accepts "M4'" or "M4luong".
ModelConfig model_preset(std::string_view name);

}  // namespace trigcopy
