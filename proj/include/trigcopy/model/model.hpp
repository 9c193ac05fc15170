#pragma once

#include "trigcopy/data/embeddings.hpp"
#include "trigcopy/data/sample.hpp"
#include "trigcopy/data/vocabulary.hpp"
#include "trigcopy/model/config.hpp"
#include "trigcopy/model/extended_vocabulary.hpp"
#include "trigcopy/numerics/graph.hpp"
#include "trigcopy/numerics/parameters.hpp"

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <vector>

namespace trigcopy {

/// Encoder output for one sample. Slot 0 holds the trigger/intent encoding,
/// slots 1..N the projected per-position field/value encodings.
template <typename Scalar>
struct EncodedMemory {
  Tensor<Scalar> slots;          // (N+1) x attention_depth
  Tensor<Scalar> keys;           // slots * W2^T, additive attention only
  Tensor<Scalar> copy_keys;      // 2N x decoder_hidden, tanh transform per copy position
  Tensor<Scalar> initial_state;  // 1 x decoder_hidden
  ExtendedVocabulary extended;

  [[nodiscard]] Index length() const { return slots.rows() - 1; }
};

/// One decoder step for one hypothesis. The initial step (before any token)
/// carries only the state and an empty copy distribution.
template <typename Scalar>
struct DecoderStep {
  TokenId input = Vocabulary::kSos;
  Tensor<Scalar> state;               // s_t, 1 x D
  Tensor<Scalar> cell;                // 1 x D
  Tensor<Scalar> context;             // c_t, 1 x A
  Tensor<Scalar> attention;           // alpha_t, 1 x (N+1); empty without attention
  Tensor<Scalar> selective_read;      // 1 x A
  Tensor<Scalar> generate_scores;     // 1 x |V|
  Tensor<Scalar> copy_scores;         // 1 x 2N; empty without copy
  Tensor<Scalar> copy_probabilities;  // 1 x 2N, exp(copy score) / Z
  /// Over the extended vocabulary; generate and copy mass already summed.
  std::vector<Scalar> probabilities;
};

template <typename Scalar>
struct Attention {
  Tensor<Scalar> context;
  Tensor<Scalar> weights;
};

template <typename Scalar>
class Model {
 public:
  Model(ModelConfig config, Vocabulary vocab, IntentSet intents, std::uint64_t seed);
  /// Adopts stored parameters; names and shapes must match the layout of `config`.
  Model(ModelConfig config, Vocabulary vocab, IntentSet intents, ParameterSet<Scalar> params);

  Model(Model&&) noexcept = default;
  Model& operator=(Model&&) noexcept = default;

  [[nodiscard]] const ModelConfig& config() const { return config_; }
  [[nodiscard]] const Vocabulary& vocab() const { return *vocab_; }
  [[nodiscard]] const IntentSet& intents() const { return *intents_; }
  [[nodiscard]] ParameterSet<Scalar>& parameters() { return params_; }
  [[nodiscard]] const ParameterSet<Scalar>& parameters() const { return params_; }

  /// Copies pretrained rows into the shared word-embedding table.
  void load_pretrained(const EmbeddingTable& table);

  /// Teacher-forced NLL on references[0] + EOS: token mean per sample, then
  /// mean over the batch. A dropout generator turns on training mode.
  Var<Scalar> loss(Graph<Scalar>& graph, std::span<const DataSample* const> batch,
                   std::mt19937_64* dropout_rng = nullptr) const;
  /// Single-sample convenience form of loss().
  Var<Scalar> loss(Graph<Scalar>& graph, const DataSample& sample, std::mt19937_64* dropout_rng = nullptr) const;

  /// Throws std::invalid_argument for an empty or misaligned sample.
  [[nodiscard]] EncodedMemory<Scalar> encode(const DataSample& sample) const;
  [[nodiscard]] DecoderStep<Scalar> initial_step(const EncodedMemory<Scalar>& memory) const;
  [[nodiscard]] DecoderStep<Scalar> decode_step(const EncodedMemory<Scalar>& memory, const DecoderStep<Scalar>& prev,
                                                TokenId y_prev) const;
  /// Batched form: one row per hypothesis, sharing the memory.
  [[nodiscard]] std::vector<DecoderStep<Scalar>> decode_steps(const EncodedMemory<Scalar>& memory,
                                                              std::span<const DecoderStep<Scalar>* const> prev,
                                                              std::span<const TokenId> y_prev) const;

  /// Attentive read from s_prev (1 x D) over the memory slots.
  [[nodiscard]] Attention<Scalar> attend(const Tensor<Scalar>& s_prev, const EncodedMemory<Scalar>& memory) const;
  /// Memory-slot average over the copy positions holding y_prev, weighted by
  /// prev_copy_probs renormalized over those positions; zero if none match.
  [[nodiscard]] Tensor<Scalar> selective_read(TokenId y_prev, const Tensor<Scalar>& prev_copy_probs,
                                              const EncodedMemory<Scalar>& memory) const;

  /// Decode-time candidates: everything except PAD, SOS and (with copy) UNK.
  [[nodiscard]] bool is_candidate(TokenId id) const;

 private:
  struct Lstm {
    ParamId wx = 0, wh = 0, b = 0;
    Index hidden = 0;
  };
  struct Layout {
    ParamId word = 0, field = 0, intent = 0;
    Lstm field_fwd, field_bwd, value_fwd, value_bwd;
    ParamId ei_w = 0, ei_b = 0, mem_w = 0, mem_b = 0, init_w = 0, init_b = 0;
    ParamId att_w1 = 0, att_w2 = 0, att_v = 0, att_luong = 0;
    Lstm decoder;
    ParamId copy_field_w = 0, copy_field_b = 0, copy_value_w = 0, copy_value_b = 0;
    ParamId readout_w = 0, readout_b = 0, out_w = 0, out_b = 0;
  };
  struct Bound;
  struct StepVars;

  void build_layout(std::mt19937_64& rng);
  Bound encode_batch(Graph<Scalar>& g, std::span<const DataSample* const> batch, std::mt19937_64* rng) const;
  Bound bind(Graph<Scalar>& g, const EncodedMemory<Scalar>& memory, Index rows) const;
  StepVars step(Graph<Scalar>& g, const Bound& memory, const Var<Scalar>& input, const Var<Scalar>& s_prev,
                const Var<Scalar>& cell_prev, const Var<Scalar>& prev_copy_scores, const Tensor<Scalar>& match,
                std::mt19937_64* rng) const;
  Var<Scalar> generate_logits(Graph<Scalar>& g, const Var<Scalar>& state, const Var<Scalar>& context,
                              const Var<Scalar>& input) const;
  std::vector<Var<Scalar>> run_lstm(Graph<Scalar>& g, const Lstm& cell, const Var<Scalar>& inputs, Index steps,
                                    Index batch, const std::vector<Tensor<Scalar>>& masks, bool reverse,
                                    Var<Scalar>& final_state) const;
  Var<Scalar> p(Graph<Scalar>& g, ParamId id) const { return g.parameter(params_, id); }

  ModelConfig config_;
  std::unique_ptr<Vocabulary> vocab_;
  std::unique_ptr<IntentSet> intents_;
  ParameterSet<Scalar> params_;
  Layout ids_;
};

}  // namespace trigcopy
