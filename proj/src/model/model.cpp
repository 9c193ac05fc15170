#include "trigcopy/model/model.hpp"

#include "trigcopy/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace trigcopy {
namespace {

// Added to scores of padded slots; finite so the graph's finiteness check holds.
template <typename Scalar>
constexpr Scalar kMasked = Scalar(-1e30);

template <typename Scalar>
Tensor<Scalar> stack_rows(const std::vector<const Tensor<Scalar>*>& rows) {
  Tensor<Scalar> out(static_cast<Index>(rows.size()), rows.front()->cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Index>(r)) = *rows[r];
  return out;
}

// Repeats every row `times` times consecutively: row m becomes rows m*times .. m*times+times-1.
template <typename Scalar>
Tensor<Scalar> tile_slots(const Tensor<Scalar>& slots, Index times) {
  Tensor<Scalar> out(slots.rows() * times, slots.cols());
  for (Index m = 0; m < slots.rows(); ++m) out.middleRows(m * times, times).rowwise() = slots.row(m);
  return out;
}

}  // namespace

template <typename Scalar>
struct Model<Scalar>::Bound {
  Index batch = 0;
  Index length = 0;  // padded N
  Var<Scalar> slots;      // (N+1)*B x A
  Var<Scalar> source;     // N*B x A, slots 1..N
  Var<Scalar> keys;       // additive attention keys
  Var<Scalar> copy_keys;  // 2N*B x D
  Var<Scalar> initial_state;
  Tensor<Scalar> slot_mask;  // B x (N+1)
  Tensor<Scalar> copy_mask;  // B x 2N
  Tensor<Scalar> copy_bias;  // 0 or kMasked
  bool padded = false;
};

template <typename Scalar>
struct Model<Scalar>::StepVars {
  Var<Scalar> state, cell, head_state, context, attention, selective_read, copy_scores;
};

template <typename Scalar>
Model<Scalar>::Model(ModelConfig config, Vocabulary vocab, IntentSet intents, std::uint64_t seed)
    : config_(std::move(config)),
      vocab_(std::make_unique<Vocabulary>(std::move(vocab))),
      intents_(std::make_unique<IntentSet>(std::move(intents))) {
  config_.validate();
  std::mt19937_64 rng(seed);
  build_layout(rng);
}

template <typename Scalar>
Model<Scalar>::Model(ModelConfig config, Vocabulary vocab, IntentSet intents, ParameterSet<Scalar> params)
    : config_(std::move(config)),
      vocab_(std::make_unique<Vocabulary>(std::move(vocab))),
      intents_(std::make_unique<IntentSet>(std::move(intents))) {
  config_.validate();
  std::mt19937_64 rng(0);
  build_layout(rng);
  if (params.size() != params_.size()) {
    throw std::invalid_argument("stored parameters: expected " + std::to_string(params_.size()) + " tensors, got " +
                                std::to_string(params.size()));
  }
  for (ParamId id = 0; id < params_.size(); ++id) {
    const auto& want = params_[id];
    const auto& got = params[id];
    if (want.name != got.name || want.value.rows() != got.value.rows() || want.value.cols() != got.value.cols()) {
      throw std::invalid_argument("stored parameter " + std::to_string(id) + " is " + got.name + " " +
                                  shape_string(got.value) + ", expected " + want.name + " " + shape_string(want.value));
    }
  }
  params_ = std::move(params);
}

template <typename Scalar>
void Model<Scalar>::build_layout(std::mt19937_64& rng) {
  const auto& c = config_;
  const auto bound = static_cast<Scalar>(c.init_bound);
  auto add = [&](const std::string& name, Index rows, Index cols) {
    return params_.add_uniform(name, rows, cols, bound, rng);
  };
  auto lstm = [&](const std::string& name, Index input, Index hidden) {
    Lstm l;
    l.hidden = hidden;
    l.wx = add(name + ".wx", 4 * hidden, input);
    l.wh = add(name + ".wh", 4 * hidden, hidden);
    l.b = add(name + ".b", 1, 4 * hidden);
    return l;
  };
  const Index V = vocab_->size();
  const Index A = c.attention_depth;
  const Index D = c.decoder_hidden;
  const Index E = c.word_embedding;

  ids_.word = add("embed.word", V, E);
  ids_.field = add("embed.field", V, c.field_embedding);
  ids_.intent = add("embed.intent", intents_->size(), c.intent_embedding);

  const Index enc = c.use_bilstm ? c.encoder_hidden : 2 * c.encoder_hidden;
  ids_.field_fwd = lstm("encoder.field.fwd", c.field_embedding, enc);
  ids_.value_fwd = lstm("encoder.value.fwd", E, enc);
  if (c.use_bilstm) {
    ids_.field_bwd = lstm("encoder.field.bwd", c.field_embedding, enc);
    ids_.value_bwd = lstm("encoder.value.bwd", E, enc);
  }
  const Index per_position = 4 * c.encoder_hidden;

  ids_.ei_w = add("memory.intent_trigger.w", A, E + c.intent_embedding);
  ids_.ei_b = add("memory.intent_trigger.b", 1, A);
  ids_.mem_w = add("memory.source.w", A, per_position);
  ids_.mem_b = add("memory.source.b", 1, A);
  ids_.init_w = add("decoder.init.w", D, per_position + A);
  ids_.init_b = add("decoder.init.b", 1, D);

  if (c.attention == AttentionKind::kBahdanau) {
    ids_.att_w1 = add("attention.w1", A, D);
    ids_.att_w2 = add("attention.w2", A, A);
    ids_.att_v = add("attention.v", 1, A);
  } else if (c.attention == AttentionKind::kLuong) {
    ids_.att_luong = add("attention.luong", A, D);
  }

  Index input = E;
  if (c.attention != AttentionKind::kNone) input += A;
  if (c.use_copy) input += A;
  ids_.decoder = lstm("decoder.cell", input, D);

  if (c.use_copy) {
    ids_.copy_field_w = add("copy.field.w", D, A);
    ids_.copy_field_b = add("copy.field.b", 1, D);
    ids_.copy_value_w = add("copy.value.w", D, A);
    ids_.copy_value_b = add("copy.value.b", 1, D);
  }
  const Index readout_in = D + (c.attention != AttentionKind::kNone ? A : 0) + E;
  ids_.readout_w = add("generate.readout.w", c.readout * c.maxout_pool, readout_in);
  ids_.readout_b = add("generate.readout.b", 1, c.readout * c.maxout_pool);
  ids_.out_w = add("generate.out.w", V, c.readout);
  ids_.out_b = add("generate.out.b", 1, V);
}

template <typename Scalar>
void Model<Scalar>::load_pretrained(const EmbeddingTable& table) {
  auto& word = params_[ids_.word].value;
  if (table.vectors.rows() != word.rows() || table.vectors.cols() != word.cols()) {
    throw DimensionError("pretrained embeddings " + shape_string(table.vectors) + " do not match " +
                         shape_string(word));
  }
  for (Index r = 0; r < word.rows(); ++r) {
    if (table.pretrained[static_cast<std::size_t>(r)]) word.row(r) = table.vectors.row(r).template cast<Scalar>();
  }
}

template <typename Scalar>
bool Model<Scalar>::is_candidate(TokenId id) const {
  if (id == Vocabulary::kPad || id == Vocabulary::kSos) return false;
  if (config_.use_copy && id == Vocabulary::kUnk) return false;
  return true;
}

template <typename Scalar>
std::vector<Var<Scalar>> Model<Scalar>::run_lstm(Graph<Scalar>& g, const Lstm& cell, const Var<Scalar>& inputs,
                                                 Index steps, Index batch, const std::vector<Tensor<Scalar>>& masks,
                                                 bool reverse, Var<Scalar>& final_state) const {
  const Index H = cell.hidden;
  // Input projections for every step at once; rows are time-major.
  const Var<Scalar> pre = add_row(matmul_nt(inputs, p(g, cell.wx)), p(g, cell.b));
  const Var<Scalar> wh = p(g, cell.wh);
  Var<Scalar> h = g.constant(Tensor<Scalar>::Zero(batch, H));
  Var<Scalar> c = h;
  std::vector<Var<Scalar>> outputs(static_cast<std::size_t>(steps));
  for (Index k = 0; k < steps; ++k) {
    const Index t = reverse ? steps - 1 - k : k;
    const Var<Scalar> gates = slice_rows(pre, t * batch, batch) + matmul_nt(h, wh);
    const Var<Scalar> i = sigmoid(slice_cols(gates, 0, H));
    const Var<Scalar> f = sigmoid(slice_cols(gates, H, H));
    const Var<Scalar> u = tanh(slice_cols(gates, 2 * H, H));
    const Var<Scalar> o = sigmoid(slice_cols(gates, 3 * H, H));
    Var<Scalar> c_new = cwise_product(f, c) + cwise_product(i, u);
    Var<Scalar> h_new = cwise_product(o, tanh(c_new));
    const auto& mask = masks[static_cast<std::size_t>(t)];
    if (mask.minCoeff() == 0) {
      // Padded rows keep their state so each row's final state is its own last position.
      c_new = select_rows(c_new, c, mask);
      h_new = select_rows(h_new, h, mask);
    }
    c = c_new;
    h = h_new;
    outputs[static_cast<std::size_t>(t)] = h;
  }
  final_state = h;
  return outputs;
}

template <typename Scalar>
typename Model<Scalar>::Bound Model<Scalar>::encode_batch(Graph<Scalar>& g, std::span<const DataSample* const> batch,
                                                          std::mt19937_64* rng) const {
  const auto& c = config_;
  const Index B = static_cast<Index>(batch.size());
  if (B == 0) throw std::invalid_argument("encode: empty batch");
  Index N = 0;
  for (const auto* s : batch) {
    if (s->values.empty()) throw std::invalid_argument("encode: sample has no field/value pairs");
    if (s->fields.size() != s->values.size()) throw std::invalid_argument("encode: fields and values misaligned");
    N = std::max<Index>(N, static_cast<Index>(s->values.size()));
  }
  const Scalar rate = rng ? static_cast<Scalar>(c.dropout) : Scalar(0);
  auto drop = [&](const Var<Scalar>& x) { return rate > 0 ? dropout(x, rate, *rng) : x; };

  std::vector<Index> field_ids(static_cast<std::size_t>(N * B), Vocabulary::kPad);
  std::vector<Index> value_ids(field_ids.size(), Vocabulary::kPad);
  std::vector<Tensor<Scalar>> masks(static_cast<std::size_t>(N), Tensor<Scalar>::Zero(B, 1));
  Bound m;
  m.batch = B;
  m.length = N;
  m.slot_mask = Tensor<Scalar>::Zero(B, N + 1);
  m.copy_mask = Tensor<Scalar>::Zero(B, 2 * N);
  std::vector<Index> trigger_ids(static_cast<std::size_t>(B)), intent_ids(static_cast<std::size_t>(B));
  for (Index b = 0; b < B; ++b) {
    const auto& s = *batch[static_cast<std::size_t>(b)];
    const Index n = static_cast<Index>(s.values.size());
    for (Index t = 0; t < n; ++t) {
      field_ids[static_cast<std::size_t>(t * B + b)] = vocab_->id(s.fields[static_cast<std::size_t>(t)]);
      value_ids[static_cast<std::size_t>(t * B + b)] = vocab_->id(s.values[static_cast<std::size_t>(t)]);
      masks[static_cast<std::size_t>(t)](b, 0) = 1;
      m.slot_mask(b, t + 1) = 1;
      m.copy_mask(b, t) = 1;
      m.copy_mask(b, N + t) = 1;
    }
    m.slot_mask(b, 0) = 1;
    m.padded = m.padded || n < N;
    trigger_ids[static_cast<std::size_t>(b)] = s.has_trigger() ? vocab_->id(s.trigger) : Vocabulary::kSos;
    intent_ids[static_cast<std::size_t>(b)] = intents_->id(s.intent);
  }
  m.copy_bias = ((Scalar(1) - m.copy_mask.array()) * kMasked<Scalar>).matrix();

  const Var<Scalar> fields = drop(gather_rows(p(g, ids_.field), std::span<const Index>(field_ids)));
  const Var<Scalar> values = drop(gather_rows(p(g, ids_.word), std::span<const Index>(value_ids)));

  std::vector<Var<Scalar>> columns;
  std::vector<Var<Scalar>> finals;
  auto encode_stream = [&](const Var<Scalar>& inputs, const Lstm& fwd, const Lstm& bwd) {
    Var<Scalar> final_fwd, final_bwd;
    auto out_fwd = run_lstm(g, fwd, inputs, N, B, masks, false, final_fwd);
    columns.push_back(vconcat<Scalar>(std::span<const Var<Scalar>>(out_fwd)));
    finals.push_back(final_fwd);
    if (c.use_bilstm) {
      auto out_bwd = run_lstm(g, bwd, inputs, N, B, masks, true, final_bwd);
      columns.push_back(vconcat<Scalar>(std::span<const Var<Scalar>>(out_bwd)));
      finals.push_back(final_bwd);
    }
  };
  encode_stream(fields, ids_.field_fwd, ids_.field_bwd);
  encode_stream(values, ids_.value_fwd, ids_.value_bwd);

  const Var<Scalar> per_position = hconcat<Scalar>(std::span<const Var<Scalar>>(columns));
  m.source = add_row(matmul_nt(per_position, p(g, ids_.mem_w)), p(g, ids_.mem_b));

  const Var<Scalar> trigger = drop(gather_rows(p(g, ids_.word), std::span<const Index>(trigger_ids)));
  const Var<Scalar> intent = c.use_intent
                                 ? drop(gather_rows(p(g, ids_.intent), std::span<const Index>(intent_ids)))
                                 : g.constant(Tensor<Scalar>::Zero(B, c.intent_embedding));
  const Var<Scalar> h_ei = add_row(matmul_nt(hconcat({trigger, intent}), p(g, ids_.ei_w)), p(g, ids_.ei_b));
  m.slots = vconcat({h_ei, m.source});

  finals.push_back(h_ei);
  m.initial_state = tanh(add_row(matmul_nt(hconcat<Scalar>(std::span<const Var<Scalar>>(finals)), p(g, ids_.init_w)),
                                 p(g, ids_.init_b)));
  if (c.attention == AttentionKind::kBahdanau) m.keys = matmul_nt(m.slots, p(g, ids_.att_w2));
  if (c.use_copy) {
    const Var<Scalar> copy_fields = tanh(add_row(matmul_nt(m.source, p(g, ids_.copy_field_w)), p(g, ids_.copy_field_b)));
    const Var<Scalar> copy_values = tanh(add_row(matmul_nt(m.source, p(g, ids_.copy_value_w)), p(g, ids_.copy_value_b)));
    m.copy_keys = vconcat({copy_fields, copy_values});
  }
  return m;
}

template <typename Scalar>
typename Model<Scalar>::Bound Model<Scalar>::bind(Graph<Scalar>& g, const EncodedMemory<Scalar>& memory,
                                                  Index rows) const {
  Bound m;
  m.batch = rows;
  m.length = memory.length();
  m.slots = g.constant(tile_slots(memory.slots, rows));
  m.source = g.constant(tile_slots<Scalar>(memory.slots.bottomRows(m.length), rows));
  if (memory.keys.size() > 0) m.keys = g.constant(tile_slots(memory.keys, rows));
  if (memory.copy_keys.size() > 0) m.copy_keys = g.constant(tile_slots(memory.copy_keys, rows));
  m.slot_mask = Tensor<Scalar>::Ones(rows, m.length + 1);
  m.copy_mask = Tensor<Scalar>::Ones(rows, 2 * m.length);
  m.copy_bias = Tensor<Scalar>::Zero(rows, 2 * m.length);
  return m;
}

template <typename Scalar>
typename Model<Scalar>::StepVars Model<Scalar>::step(Graph<Scalar>& g, const Bound& m, const Var<Scalar>& input,
                                                     const Var<Scalar>& s_prev, const Var<Scalar>& cell_prev,
                                                     const Var<Scalar>& prev_copy_scores, const Tensor<Scalar>& match,
                                                     std::mt19937_64* rng) const {
  const auto& c = config_;
  StepVars out;
  std::vector<Var<Scalar>> x = {input};
  if (c.attention != AttentionKind::kNone) {
    Var<Scalar> scores;
    if (c.attention == AttentionKind::kBahdanau) {
      scores = additive_slot_scores(m.keys, matmul_nt(s_prev, p(g, ids_.att_w1)), p(g, ids_.att_v));
    } else {
      scores = slot_dot(m.slots, matmul_nt(s_prev, p(g, ids_.att_luong)));
    }
    out.attention = masked_row_softmax(scores, m.slot_mask);
    out.context = slot_weighted_sum(out.attention, m.slots);
    x.push_back(out.context);
  }
  if (c.use_copy) {
    if (prev_copy_scores.valid() && match.size() > 0 && match.maxCoeff() > 0) {
      const Var<Scalar> w = masked_row_softmax(prev_copy_scores, match);
      const Var<Scalar> per_slot = slice_cols(w, 0, m.length) + slice_cols(w, m.length, m.length);
      out.selective_read = slot_weighted_sum(per_slot, m.source);
    } else {
      out.selective_read = g.constant(Tensor<Scalar>::Zero(m.batch, c.attention_depth));
    }
    x.push_back(out.selective_read);
  }
  const Lstm& cell = ids_.decoder;
  const Index H = cell.hidden;
  const Var<Scalar> gates = add_row(
      matmul_nt(hconcat<Scalar>(std::span<const Var<Scalar>>(x)), p(g, cell.wx)) + matmul_nt(s_prev, p(g, cell.wh)),
      p(g, cell.b));
  const Var<Scalar> i = sigmoid(slice_cols(gates, 0, H));
  const Var<Scalar> f = sigmoid(slice_cols(gates, H, H));
  const Var<Scalar> u = tanh(slice_cols(gates, 2 * H, H));
  const Var<Scalar> o = sigmoid(slice_cols(gates, 3 * H, H));
  out.cell = cwise_product(f, cell_prev) + cwise_product(i, u);
  out.state = cwise_product(o, tanh(out.cell));
  const Scalar rate = rng ? static_cast<Scalar>(c.dropout) : Scalar(0);
  out.head_state = rate > 0 ? dropout(out.state, rate, *rng) : out.state;
  if (c.use_copy) {
    out.copy_scores = slot_dot(m.copy_keys, out.head_state);
    if (m.padded) out.copy_scores = out.copy_scores + g.constant(m.copy_bias);
  }
  return out;
}

template <typename Scalar>
Var<Scalar> Model<Scalar>::generate_logits(Graph<Scalar>& g, const Var<Scalar>& state, const Var<Scalar>& context,
                                           const Var<Scalar>& input) const {
  const Var<Scalar> features = context.valid() ? hconcat({state, context, input}) : hconcat({state, input});
  const Var<Scalar> readout =
      maxout(add_row(matmul_nt(features, p(g, ids_.readout_w)), p(g, ids_.readout_b)), config_.maxout_pool);
  return add_row(matmul_nt(readout, p(g, ids_.out_w)), p(g, ids_.out_b));
}

template <typename Scalar>
Var<Scalar> Model<Scalar>::loss(Graph<Scalar>& g, std::span<const DataSample* const> batch,
                                std::mt19937_64* rng) const {
  const Bound m = encode_batch(g, batch, rng);
  const Index B = m.batch;
  const Index N = m.length;
  const Index V = vocab_->size();
  const Scalar rate = rng ? static_cast<Scalar>(config_.dropout) : Scalar(0);

  // Gold sequences in extended ids (reference + EOS) and the copy-position ids per sample.
  std::vector<std::vector<TokenId>> targets;
  std::vector<std::vector<TokenId>> positions;
  Index T = 0;
  for (const auto* s : batch) {
    if (s->references.empty() || s->references.front().empty()) {
      throw std::invalid_argument("loss: sample without a non-empty reference");
    }
    ExtendedVocabulary ext(*vocab_, *s);
    std::vector<TokenId> ids;
    for (const auto& tok : s->references.front()) {
      TokenId id = ext.id(tok);
      if (!config_.use_copy && id >= V) id = Vocabulary::kUnk;
      ids.push_back(id);
    }
    ids.push_back(Vocabulary::kEos);
    T = std::max<Index>(T, static_cast<Index>(ids.size()));
    targets.push_back(std::move(ids));
    positions.push_back(ext.position_ids());
  }

  std::vector<std::vector<Index>> columns(static_cast<std::size_t>(T * B));
  Tensor<Scalar> weights = Tensor<Scalar>::Zero(T * B, 1);
  std::vector<Index> inputs(static_cast<std::size_t>(T * B), Vocabulary::kPad);
  for (Index b = 0; b < B; ++b) {
    const auto& ids = targets[static_cast<std::size_t>(b)];
    const auto& pos = positions[static_cast<std::size_t>(b)];
    const Index len = static_cast<Index>(ids.size());
    const Index n = static_cast<Index>(pos.size()) / 2;
    for (Index t = 0; t < T; ++t) {
      auto& cols = columns[static_cast<std::size_t>(t * B + b)];
      if (t >= len) {
        cols.push_back(Vocabulary::kPad);
        continue;
      }
      const TokenId y = ids[static_cast<std::size_t>(t)];
      weights(t * B + b, 0) = Scalar(1) / static_cast<Scalar>(len * B);
      // Teacher forcing; source-only words are fed back as UNK.
      const TokenId prev = t == 0 ? Vocabulary::kSos : ids[static_cast<std::size_t>(t - 1)];
      inputs[static_cast<std::size_t>(t * B + b)] = prev < V ? prev : Vocabulary::kUnk;
      if (y < V) cols.push_back(y);
      if (config_.use_copy) {
        for (Index j = 0; j < 2 * n; ++j) {
          if (pos[static_cast<std::size_t>(j)] == y) cols.push_back(V + (j < n ? j : N + (j - n)));
        }
      }
      if (cols.empty()) cols.push_back(Vocabulary::kUnk);
    }
  }

  const Var<Scalar> all_inputs = gather_rows(p(g, ids_.word), std::span<const Index>(inputs));
  const Var<Scalar> embedded = rate > 0 ? dropout(all_inputs, rate, *rng) : all_inputs;

  std::vector<Var<Scalar>> head_states, contexts, copy_scores;
  Var<Scalar> s = m.initial_state;
  Var<Scalar> cell = g.constant(Tensor<Scalar>::Zero(B, config_.decoder_hidden));
  Var<Scalar> prev_copy;
  for (Index t = 0; t < T; ++t) {
    Tensor<Scalar> match;
    if (config_.use_copy && t > 0) {
      match = Tensor<Scalar>::Zero(B, 2 * N);
      for (Index b = 0; b < B; ++b) {
        const auto& ids = targets[static_cast<std::size_t>(b)];
        if (t >= static_cast<Index>(ids.size())) continue;
        const TokenId y_prev = ids[static_cast<std::size_t>(t - 1)];
        if (y_prev == Vocabulary::kUnk) continue;
        const auto& pos = positions[static_cast<std::size_t>(b)];
        const Index n = static_cast<Index>(pos.size()) / 2;
        for (Index j = 0; j < 2 * n; ++j) {
          if (pos[static_cast<std::size_t>(j)] == y_prev) match(b, j < n ? j : N + (j - n)) = 1;
        }
      }
    }
    const StepVars out = step(g, m, slice_rows(embedded, t * B, B), s, cell, prev_copy, match, rng);
    s = out.state;
    cell = out.cell;
    prev_copy = out.copy_scores;
    head_states.push_back(out.head_state);
    if (out.context.valid()) contexts.push_back(out.context);
    if (out.copy_scores.valid()) copy_scores.push_back(out.copy_scores);
  }

  const Var<Scalar> states = vconcat<Scalar>(std::span<const Var<Scalar>>(head_states));
  const Var<Scalar> context =
      contexts.empty() ? Var<Scalar>() : vconcat<Scalar>(std::span<const Var<Scalar>>(contexts));
  Var<Scalar> scores = generate_logits(g, states, context, embedded);
  if (config_.use_copy) scores = hconcat({scores, vconcat<Scalar>(std::span<const Var<Scalar>>(copy_scores))});
  const Var<Scalar> nll = row_logsumexp(scores) - row_logsumexp_subset(scores, columns);
  return sum(cwise_product(nll, g.constant(std::move(weights))));
}

template <typename Scalar>
Var<Scalar> Model<Scalar>::loss(Graph<Scalar>& g, const DataSample& sample, std::mt19937_64* rng) const {
  const DataSample* one[] = {&sample};
  return loss(g, std::span<const DataSample* const>(one), rng);
}

template <typename Scalar>
EncodedMemory<Scalar> Model<Scalar>::encode(const DataSample& sample) const {
  sample.validate();
  Graph<Scalar> g(false);
  const DataSample* one[] = {&sample};
  const Bound m = encode_batch(g, std::span<const DataSample* const>(one), nullptr);
  EncodedMemory<Scalar> out{m.slots.value(), m.keys.valid() ? m.keys.value() : Tensor<Scalar>(),
                            m.copy_keys.valid() ? m.copy_keys.value() : Tensor<Scalar>(), m.initial_state.value(),
                            ExtendedVocabulary(*vocab_, sample)};
  return out;
}

template <typename Scalar>
DecoderStep<Scalar> Model<Scalar>::initial_step(const EncodedMemory<Scalar>& memory) const {
  DecoderStep<Scalar> s;
  s.state = memory.initial_state;
  s.cell = Tensor<Scalar>::Zero(1, config_.decoder_hidden);
  return s;
}

template <typename Scalar>
DecoderStep<Scalar> Model<Scalar>::decode_step(const EncodedMemory<Scalar>& memory, const DecoderStep<Scalar>& prev,
                                               TokenId y_prev) const {
  const DecoderStep<Scalar>* one[] = {&prev};
  const TokenId ids[] = {y_prev};
  return std::move(decode_steps(memory, std::span<const DecoderStep<Scalar>* const>(one),
                                std::span<const TokenId>(ids))
                       .front());
}

template <typename Scalar>
std::vector<DecoderStep<Scalar>> Model<Scalar>::decode_steps(const EncodedMemory<Scalar>& memory,
                                                             std::span<const DecoderStep<Scalar>* const> prev,
                                                             std::span<const TokenId> y_prev) const {
  const Index rows = static_cast<Index>(prev.size());
  if (rows == 0 || prev.size() != y_prev.size()) throw ContractError("decode_steps: one previous token per row");
  const auto& ext = memory.extended;
  const Index V = vocab_->size();
  const Index N = memory.length();
  const auto& pos = ext.position_ids();

  Graph<Scalar> g(false);
  const Bound m = bind(g, memory, rows);
  std::vector<Index> input_ids;
  std::vector<const Tensor<Scalar>*> states, cells, copies;
  bool have_copy = config_.use_copy;
  Tensor<Scalar> match = config_.use_copy ? Tensor<Scalar>::Zero(rows, 2 * N) : Tensor<Scalar>();
  for (Index r = 0; r < rows; ++r) {
    const TokenId y = y_prev[static_cast<std::size_t>(r)];
    if (y < 0 || y >= ext.size()) {
      throw ContractError("decode_step: previous token id " + std::to_string(y) + " outside extended vocabulary");
    }
    const auto& pr = *prev[static_cast<std::size_t>(r)];
    input_ids.push_back(ext.input_id(y));
    states.push_back(&pr.state);
    cells.push_back(&pr.cell);
    copies.push_back(&pr.copy_scores);
    if (pr.copy_scores.size() == 0) have_copy = false;
    if (config_.use_copy && y != Vocabulary::kUnk) {
      for (Index j = 0; j < 2 * N; ++j) {
        if (pos[static_cast<std::size_t>(j)] == y) match(r, j) = 1;
      }
    }
  }
  const Var<Scalar> input = gather_rows(p(g, ids_.word), std::span<const Index>(input_ids));
  const Var<Scalar> prev_copy = have_copy ? g.constant(stack_rows(copies)) : Var<Scalar>();
  const StepVars out =
      step(g, m, input, g.constant(stack_rows(states)), g.constant(stack_rows(cells)), prev_copy, match, nullptr);
  const Tensor<Scalar>& gen = generate_logits(g, out.state, out.context, input).value();

  std::vector<DecoderStep<Scalar>> steps(static_cast<std::size_t>(rows));
  for (Index r = 0; r < rows; ++r) {
    auto& s = steps[static_cast<std::size_t>(r)];
    s.input = y_prev[static_cast<std::size_t>(r)];
    s.state = out.state.value().row(r);
    s.cell = out.cell.value().row(r);
    s.generate_scores = gen.row(r);
    if (out.context.valid()) {
      s.context = out.context.value().row(r);
      s.attention = out.attention.value().row(r);
    } else {
      s.context = Tensor<Scalar>::Zero(1, config_.attention_depth);
    }
    s.selective_read = out.selective_read.valid() ? Tensor<Scalar>(out.selective_read.value().row(r))
                                                  : Tensor<Scalar>::Zero(1, config_.attention_depth);
    Scalar peak = s.generate_scores.maxCoeff();
    if (config_.use_copy) {
      s.copy_scores = out.copy_scores.value().row(r);
      peak = std::max(peak, s.copy_scores.maxCoeff());
    }
    // Joint normalizer Z over generate and copy scores.
    Scalar z = (s.generate_scores.array() - peak).exp().sum();
    if (config_.use_copy) z += (s.copy_scores.array() - peak).exp().sum();
    const Scalar log_z = peak + std::log(z);
    s.probabilities.assign(static_cast<std::size_t>(config_.use_copy ? ext.size() : V), Scalar(0));
    for (Index v = 0; v < V; ++v) s.probabilities[static_cast<std::size_t>(v)] = std::exp(s.generate_scores(0, v) - log_z);
    if (config_.use_copy) {
      s.copy_probabilities = (s.copy_scores.array() - log_z).exp().matrix();
      for (Index j = 0; j < 2 * N; ++j) {
        s.probabilities[static_cast<std::size_t>(pos[static_cast<std::size_t>(j)])] += s.copy_probabilities(0, j);
      }
    }
  }
  return steps;
}

template <typename Scalar>
Attention<Scalar> Model<Scalar>::attend(const Tensor<Scalar>& s_prev, const EncodedMemory<Scalar>& memory) const {
  if (config_.attention == AttentionKind::kNone) {
    return {Tensor<Scalar>::Zero(1, config_.attention_depth), Tensor<Scalar>()};
  }
  Graph<Scalar> g(false);
  const Bound m = bind(g, memory, 1);
  const Var<Scalar> s = g.constant(s_prev);
  Var<Scalar> scores;
  if (config_.attention == AttentionKind::kBahdanau) {
    scores = additive_slot_scores(m.keys, matmul_nt(s, p(g, ids_.att_w1)), p(g, ids_.att_v));
  } else {
    scores = slot_dot(m.slots, matmul_nt(s, p(g, ids_.att_luong)));
  }
  const Var<Scalar> alpha = masked_row_softmax(scores, m.slot_mask);
  return {slot_weighted_sum(alpha, m.slots).value(), alpha.value()};
}

template <typename Scalar>
Tensor<Scalar> Model<Scalar>::selective_read(TokenId y_prev, const Tensor<Scalar>& prev_copy_probs,
                                             const EncodedMemory<Scalar>& memory) const {
  const Index N = memory.length();
  Tensor<Scalar> out = Tensor<Scalar>::Zero(1, memory.slots.cols());
  if (prev_copy_probs.size() == 0 || y_prev == Vocabulary::kUnk) return out;
  if (prev_copy_probs.size() != 2 * N) throw DimensionError("selective_read: one probability per copy position");
  const auto& pos = memory.extended.position_ids();
  Scalar total = 0;
  for (Index j = 0; j < 2 * N; ++j) {
    if (pos[static_cast<std::size_t>(j)] == y_prev) total += prev_copy_probs(j);
  }
  if (total <= 0) return out;
  for (Index j = 0; j < 2 * N; ++j) {
    if (pos[static_cast<std::size_t>(j)] == y_prev) out += (prev_copy_probs(j) / total) * memory.slots.row(1 + j % N);
  }
  return out;
}

template class Model<double>;
template class Model<float>;

}  // namespace trigcopy
