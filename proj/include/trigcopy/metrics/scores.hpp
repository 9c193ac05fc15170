#pragma once

#include "trigcopy/data/sample.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace trigcopy {

/// A candidate with its references, the unit every scorer consumes.
struct Segment {
  TokenSequence candidate;
  std::vector<TokenSequence> references;
};

/// Sufficient statistics of corpus BLEU-4.
struct BleuStats {
  std::array<std::int64_t, 4> matches{};  // clipped n-gram matches
  std::array<std::int64_t, 4> totals{};   // candidate n-grams
  std::int64_t candidate_length = 0;
  std::int64_t reference_length = 0;  // closest reference length, shorter on ties

  BleuStats& operator+=(const BleuStats& other);
};

BleuStats bleu_stats(const TokenSequence& candidate, const std::vector<TokenSequence>& references);
/// Percentage; 0 when any n-gram precision is zero (no smoothing).
double bleu_from_stats(const BleuStats& stats);
/// Corpus BLEU-4 in percent. Throws std::invalid_argument on an empty set.
double bleu_corpus(std::span<const Segment> segments);

std::size_t lcs_length(const TokenSequence& a, const TokenSequence& b);
/// Best LCS F1 over the references, in [0, 1].
double rouge_l_segment(const TokenSequence& candidate, const std::vector<TokenSequence>& references);
/// Mean segment ROUGE-L F1 in percent.
double rouge_l_f1(std::span<const Segment> segments);

struct MeteorParams {
  double alpha = 0.9;
  double beta = 3.0;
  double gamma = 0.5;
  bool stem = true;
};

struct MeteorAlignment {
  std::size_t matches = 0;
  std::size_t chunks = 0;
};

/// Exact matches first, then stem matches among the words left over. Within
/// a stage each candidate word, left to right, takes the leftmost free
/// reference word it matches.
MeteorAlignment meteor_align(const TokenSequence& candidate, const TokenSequence& reference, bool stem = true);
/// Best score over the references, in [0, 1].
double meteor_segment(const TokenSequence& candidate, const std::vector<TokenSequence>& references,
                      const MeteorParams& params = {});
/// Mean segment METEOR in percent.
double meteor(std::span<const Segment> segments, const MeteorParams& params = {});

enum class Metric { kBleu, kRougeL, kMeteor };
Metric parse_metric(std::string_view name);
std::string_view metric_name(Metric metric);
double score(Metric metric, std::span<const Segment> segments);

}  // namespace trigcopy
