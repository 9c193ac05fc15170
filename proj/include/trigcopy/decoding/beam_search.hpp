#pragma once

#include "trigcopy/data/vocabulary.hpp"
#include "trigcopy/numerics/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace trigcopy {

struct SearchOptions {
  Index beam_width = 3;
  Index max_len = 60;
  /// Rank finished hypotheses by log-probability per token instead of the sum.
  bool length_normalize = true;
  TokenId eos = Vocabulary::kEos;
  /// Let the greedy path compete in the final ranking, so the top hypothesis
  /// never scores below greedy decoding.
  bool include_greedy = true;
};

struct ScoredSequence {
  std::vector<TokenId> tokens;  // ends with EOS when finished
  double log_prob = 0.0;
  double score = 0.0;
  bool finished = false;
};

/// One expansion: the successor state and log-probabilities over token ids.
/// Excluded tokens carry -infinity.
template <typename State>
struct Expansion {
  State state;
  std::vector<double> log_probs;
};

template <typename State>
using ExpandFn = std::function<std::vector<Expansion<State>>(std::span<const State* const> states,
                                                             std::span<const TokenId> last_tokens)>;

namespace detail {

inline double ranking_score(const ScoredSequence& s, bool normalize) {
  return normalize ? s.log_prob / static_cast<double>(std::max<std::size_t>(1, s.tokens.size())) : s.log_prob;
}

inline void rank(std::vector<ScoredSequence>& pool, bool normalize) {
  for (auto& s : pool) s.score = ranking_score(s, normalize);
  std::stable_sort(pool.begin(), pool.end(), [](const ScoredSequence& a, const ScoredSequence& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
    return a.tokens < b.tokens;
  });
}

}  // namespace detail

/// Argmax per step with the lowest id winning ties; stops after EOS or max_len tokens.
template <typename State>
ScoredSequence greedy_search(State initial, TokenId start, const ExpandFn<State>& expand, Index max_len,
                             TokenId eos = Vocabulary::kEos, bool length_normalize = true) {
  if (max_len < 1) throw std::invalid_argument("greedy_search: max_len must be at least 1");
  ScoredSequence seq;
  State state = std::move(initial);
  TokenId last = start;
  for (Index t = 0; t < max_len; ++t) {
    const State* states[] = {&state};
    const TokenId lasts[] = {last};
    auto expansions = expand(std::span<const State* const>(states), std::span<const TokenId>(lasts));
    const auto& lp = expansions.front().log_probs;
    std::size_t best = lp.size();
    for (std::size_t v = 0; v < lp.size(); ++v) {
      if (lp[v] == -std::numeric_limits<double>::infinity()) continue;
      if (best == lp.size() || lp[v] > lp[best]) best = v;
    }
    if (best == lp.size()) throw std::logic_error("greedy_search: no candidate token");
    seq.tokens.push_back(static_cast<TokenId>(best));
    seq.log_prob += lp[best];
    state = std::move(expansions.front().state);
    last = static_cast<TokenId>(best);
    if (last == eos) {
      seq.finished = true;
      break;
    }
  }
  seq.score = detail::ranking_score(seq, length_normalize);
  return seq;
}

/// Beam search. Each step keeps the best extensions by total log-probability
/// (ties: parent rank, then lowest token id); extensions ending in EOS leave
/// the beam as finished hypotheses and keep their slot, so the beam shrinks. Hypotheses alive at
/// max_len are returned unfinished. Results are ranked best first and may
/// hold one more entry than the width when the greedy path was pruned.
template <typename State>
std::vector<ScoredSequence> beam_search(State initial, TokenId start, const ExpandFn<State>& expand,
                                        const SearchOptions& options) {
  if (options.beam_width < 1) throw std::invalid_argument("beam_search: beam width must be at least 1");
  if (options.max_len < 1) throw std::invalid_argument("beam_search: max_len must be at least 1");
  struct Live {
    ScoredSequence seq;
    State state;
    TokenId last;
  };
  State initial_copy = initial;
  std::vector<Live> live;
  live.push_back({ScoredSequence{}, std::move(initial), start});
  std::vector<ScoredSequence> pool;
  const auto width = static_cast<std::size_t>(options.beam_width);

  for (Index t = 0; t < options.max_len && !live.empty() && pool.size() < width; ++t) {
    std::vector<const State*> states;
    std::vector<TokenId> last;
    for (const auto& l : live) {
      states.push_back(&l.state);
      last.push_back(l.last);
    }
    auto expansions = expand(std::span<const State* const>(states), std::span<const TokenId>(last));
    if (expansions.size() != live.size()) throw std::logic_error("beam_search: one expansion per hypothesis expected");

    struct Candidate {
      double total;
      std::size_t parent;
      TokenId token;
    };
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < live.size(); ++i) {
      const auto& lp = expansions[i].log_probs;
      for (std::size_t v = 0; v < lp.size(); ++v) {
        if (lp[v] == -std::numeric_limits<double>::infinity()) continue;
        candidates.push_back({live[i].seq.log_prob + lp[v], i, static_cast<TokenId>(v)});
      }
    }
    const std::size_t keep = std::min(width - pool.size(), candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                      [](const Candidate& a, const Candidate& b) {
                        if (a.total != b.total) return a.total > b.total;
                        if (a.parent != b.parent) return a.parent < b.parent;
                        return a.token < b.token;
                      });
    std::vector<Live> next;
    for (std::size_t k = 0; k < keep; ++k) {
      const auto& c = candidates[k];
      ScoredSequence seq = live[c.parent].seq;
      seq.tokens.push_back(c.token);
      seq.log_prob = c.total;
      if (c.token == options.eos) {
        seq.finished = true;
        pool.push_back(std::move(seq));
      } else {
        next.push_back({std::move(seq), expansions[c.parent].state, c.token});
      }
    }
    live = std::move(next);
  }
  for (auto& l : live) pool.push_back(std::move(l.seq));
  if (options.include_greedy && options.beam_width > 1) {
    auto greedy = greedy_search<State>(std::move(initial_copy), start, expand, options.max_len, options.eos);
    const bool present = std::any_of(pool.begin(), pool.end(),
                                     [&](const ScoredSequence& s) { return s.tokens == greedy.tokens; });
    if (!present) pool.push_back(std::move(greedy));
  }
  detail::rank(pool, options.length_normalize);
  return pool;
}

}  // namespace trigcopy
