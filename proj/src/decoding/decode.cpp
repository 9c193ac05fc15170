#include "trigcopy/decoding/decode.hpp"

#include <cmath>
#include <limits>

namespace trigcopy {
namespace {

template <typename Scalar>
ExpandFn<DecoderStep<Scalar>> expander(const Model<Scalar>& model, const EncodedMemory<Scalar>& memory) {
  return [&model, &memory](std::span<const DecoderStep<Scalar>* const> states, std::span<const TokenId> last) {
    auto steps = model.decode_steps(memory, states, last);
    std::vector<Expansion<DecoderStep<Scalar>>> out;
    out.reserve(steps.size());
    for (auto& s : steps) {
      std::vector<double> lp(s.probabilities.size());
      for (std::size_t v = 0; v < lp.size(); ++v) {
        const double p = static_cast<double>(s.probabilities[v]);
        lp[v] = model.is_candidate(static_cast<TokenId>(v)) && p > 0 ? std::log(p)
                                                                     : -std::numeric_limits<double>::infinity();
      }
      out.push_back({std::move(s), std::move(lp)});
    }
    return out;
  };
}

Generation to_generation(const ScoredSequence& seq, const ExtendedVocabulary& ext) {
  Generation g;
  g.ids = seq.tokens;
  if (!g.ids.empty() && g.ids.back() == Vocabulary::kEos) g.ids.pop_back();
  g.tokens = ext.resolve(g.ids);
  g.log_prob = seq.log_prob;
  g.score = seq.score;
  g.finished = seq.finished;
  return g;
}

}  // namespace

template <typename Scalar>
Generation greedy_decode(const Model<Scalar>& model, const DataSample& sample, Index max_len) {
  const auto memory = model.encode(sample);
  const auto seq = greedy_search<DecoderStep<Scalar>>(model.initial_step(memory), Vocabulary::kSos,
                                                      expander(model, memory), max_len);
  return to_generation(seq, memory.extended);
}

template <typename Scalar>
std::vector<Generation> beam_decode(const Model<Scalar>& model, const DataSample& sample, Index beam_width,
                                    Index max_len, Index top_k, bool length_normalize) {
  const auto memory = model.encode(sample);
  SearchOptions options;
  options.beam_width = beam_width;
  options.max_len = max_len;
  options.length_normalize = length_normalize;
  const auto pool = beam_search<DecoderStep<Scalar>>(model.initial_step(memory), Vocabulary::kSos,
                                                     expander(model, memory), options);
  const std::size_t k = top_k > 0 ? static_cast<std::size_t>(top_k) : static_cast<std::size_t>(beam_width);
  std::vector<Generation> out;
  for (std::size_t i = 0; i < pool.size() && i < k; ++i) out.push_back(to_generation(pool[i], memory.extended));
  return out;
}

template <typename Scalar>
Generation decode(const Model<Scalar>& model, const DataSample& sample, Index max_len) {
  if (model.config().beam_width <= 1) return greedy_decode(model, sample, max_len);
  return beam_decode(model, sample, model.config().beam_width, max_len, 1).front();
}

#define TRIGCOPY_INSTANTIATE_DECODE(S)                                                                         \
  template Generation greedy_decode(const Model<S>&, const DataSample&, Index);                                \
  template std::vector<Generation> beam_decode(const Model<S>&, const DataSample&, Index, Index, Index, bool); \
  template Generation decode(const Model<S>&, const DataSample&, Index);

TRIGCOPY_INSTANTIATE_DECODE(double)
TRIGCOPY_INSTANTIATE_DECODE(float)

}  // namespace trigcopy
