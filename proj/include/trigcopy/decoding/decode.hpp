#pragma once

#include "trigcopy/decoding/beam_search.hpp"
#include "trigcopy/model/model.hpp"

#include <string>
#include <vector>

namespace trigcopy {

struct Generation {
  std::vector<TokenId> ids;         // extended ids, EOS stripped
  std::vector<std::string> tokens;  // surface tokens, copied words verbatim
  double log_prob = 0.0;
  double score = 0.0;
  bool finished = false;
};

inline constexpr Index kDefaultMaxLen = 60;

template <typename Scalar>
Generation greedy_decode(const Model<Scalar>& model, const DataSample& sample, Index max_len = kDefaultMaxLen);

/// Top `top_k` hypotheses (default: all `beam_width` of them), best first.
template <typename Scalar>
std::vector<Generation> beam_decode(const Model<Scalar>& model, const DataSample& sample, Index beam_width,
                                    Index max_len = kDefaultMaxLen, Index top_k = 0, bool length_normalize = true);

/// Greedy when the model's beam width is 1, else the beam's top hypothesis.
template <typename Scalar>
Generation decode(const Model<Scalar>& model, const DataSample& sample, Index max_len = kDefaultMaxLen);

}  // namespace trigcopy
