#include "trigcopy/metrics/scores.hpp"

#include "trigcopy/metrics/stemmer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <stdexcept>

namespace trigcopy {
namespace {

using NgramCounts = std::map<std::vector<std::string>, std::int64_t>;

NgramCounts ngrams(const TokenSequence& tokens, std::size_t n) {
  NgramCounts counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

void require_non_empty(std::span<const Segment> segments, const char* what) {
  if (segments.empty()) throw std::invalid_argument(std::string(what) + ": no segments");
}

}  // namespace

BleuStats& BleuStats::operator+=(const BleuStats& other) {
  for (std::size_t n = 0; n < 4; ++n) {
    matches[n] += other.matches[n];
    totals[n] += other.totals[n];
  }
  candidate_length += other.candidate_length;
  reference_length += other.reference_length;
  return *this;
}

BleuStats bleu_stats(const TokenSequence& candidate, const std::vector<TokenSequence>& references) {
  if (references.empty()) throw std::invalid_argument("bleu: segment without references");
  BleuStats s;
  s.candidate_length = static_cast<std::int64_t>(candidate.size());
  const auto c = s.candidate_length;
  std::int64_t best = static_cast<std::int64_t>(references.front().size());
  for (const auto& r : references) {
    const auto len = static_cast<std::int64_t>(r.size());
    if (std::abs(len - c) < std::abs(best - c) || (std::abs(len - c) == std::abs(best - c) && len < best)) best = len;
  }
  s.reference_length = best;
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto cand = ngrams(candidate, n);
    NgramCounts max_ref;
    for (const auto& r : references) {
      for (const auto& [gram, count] : ngrams(r, n)) max_ref[gram] = std::max(max_ref[gram], count);
    }
    for (const auto& [gram, count] : cand) {
      const auto it = max_ref.find(gram);
      s.matches[n - 1] += std::min(count, it == max_ref.end() ? 0 : it->second);
      s.totals[n - 1] += count;
    }
  }
  return s;
}

double bleu_from_stats(const BleuStats& s) {
  double log_sum = 0;
  for (std::size_t n = 0; n < 4; ++n) {
    if (s.matches[n] == 0 || s.totals[n] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(s.matches[n]) / static_cast<double>(s.totals[n]));
  }
  const double c = static_cast<double>(s.candidate_length);
  const double r = static_cast<double>(s.reference_length);
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return 100.0 * bp * std::exp(log_sum / 4.0);
}

double bleu_corpus(std::span<const Segment> segments) {
  require_non_empty(segments, "bleu_corpus");
  BleuStats total;
  for (const auto& s : segments) total += bleu_stats(s.candidate, s.references);
  return bleu_from_stats(total);
}

std::size_t lcs_length(const TokenSequence& a, const TokenSequence& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l_segment(const TokenSequence& candidate, const std::vector<TokenSequence>& references) {
  double best = 0;
  for (const auto& r : references) {
    const double lcs = static_cast<double>(lcs_length(candidate, r));
    if (lcs == 0) continue;
    const double p = lcs / static_cast<double>(candidate.size());
    const double rec = lcs / static_cast<double>(r.size());
    best = std::max(best, 2 * p * rec / (p + rec));
  }
  return best;
}

double rouge_l_f1(std::span<const Segment> segments) {
  require_non_empty(segments, "rouge_l_f1");
  double sum = 0;
  for (const auto& s : segments) sum += rouge_l_segment(s.candidate, s.references);
  return 100.0 * sum / static_cast<double>(segments.size());
}

MeteorAlignment meteor_align(const TokenSequence& candidate, const TokenSequence& reference, bool stem) {
  constexpr std::size_t kFree = static_cast<std::size_t>(-1);
  std::vector<std::size_t> target(candidate.size(), kFree);
  std::vector<bool> used(reference.size(), false);
  auto stage = [&](auto&& key) {
    for (std::size_t i = 0; i < candidate.size(); ++i) {
      if (target[i] != kFree) continue;
      const auto k = key(candidate[i]);
      for (std::size_t j = 0; j < reference.size(); ++j) {
        if (!used[j] && key(reference[j]) == k) {
          target[i] = j;
          used[j] = true;
          break;
        }
      }
    }
  };
  stage([](const std::string& w) { return w; });
  if (stem) stage([](const std::string& w) { return porter_stem(w); });

  MeteorAlignment a;
  std::size_t prev = kFree;
  bool in_chunk = false;
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    if (target[i] == kFree) {
      in_chunk = false;
      continue;
    }
    ++a.matches;
    if (!in_chunk || prev == kFree || target[i] != prev + 1) ++a.chunks;
    prev = target[i];
    in_chunk = true;
  }
  return a;
}

double meteor_segment(const TokenSequence& candidate, const std::vector<TokenSequence>& references,
                      const MeteorParams& params) {
  double best = 0;
  for (const auto& r : references) {
    const auto a = meteor_align(candidate, r, params.stem);
    if (a.matches == 0) continue;
    const double m = static_cast<double>(a.matches);
    const double p = m / static_cast<double>(candidate.size());
    const double rec = m / static_cast<double>(r.size());
    const double fmean = p * rec / (params.alpha * p + (1 - params.alpha) * rec);
    const double penalty = params.gamma * std::pow(static_cast<double>(a.chunks) / m, params.beta);
    best = std::max(best, fmean * (1 - penalty));
  }
  return best;
}

double meteor(std::span<const Segment> segments, const MeteorParams& params) {
  require_non_empty(segments, "meteor");
  double sum = 0;
  for (const auto& s : segments) sum += meteor_segment(s.candidate, s.references, params);
  return 100.0 * sum / static_cast<double>(segments.size());
}

Metric parse_metric(std::string_view name) {
  if (name == "bleu") return Metric::kBleu;
  if (name == "rouge_l" || name == "rouge-l" || name == "rougel") return Metric::kRougeL;
  if (name == "meteor") return Metric::kMeteor;
  throw std::invalid_argument("unknown metric '" + std::string(name) + "' (expected bleu, rouge_l or meteor)");
}

std::string_view metric_name(Metric metric) {
  switch (metric) {
    case Metric::kBleu: return "bleu";
    case Metric::kRougeL: return "rouge_l";
    case Metric::kMeteor: return "meteor";
  }
  return "bleu";
}

double score(Metric metric, std::span<const Segment> segments) {
  switch (metric) {
    case Metric::kBleu: return bleu_corpus(segments);
    case Metric::kRougeL: return rouge_l_f1(segments);
    case Metric::kMeteor: return meteor(segments);
  }
  return 0.0;
}

}  // namespace trigcopy
