#include "trigcopy/data/triggers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace trigcopy {
namespace {

const std::string& leading_token(const DataSample& sample) {
  if (sample.references.empty() || sample.references.front().empty()) {
    throw std::invalid_argument("trigger augmentation needs a non-empty reference");
  }
  return sample.references.front().front();
}

}  // namespace

std::vector<DataSample> augment_with_triggers(std::vector<DataSample> samples, double ratio, std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw std::invalid_argument("trigger ratio must lie in [0, 1]");
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto triggered = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(samples.size())));
  for (auto& s : samples) s.trigger = std::string(Vocabulary::kSosToken);
  for (std::size_t i = 0; i < triggered; ++i) {
    auto& s = samples[order[i]];
    s.trigger = leading_token(s);
  }
  return samples;
}

std::vector<DataSample> strip_triggers(std::vector<DataSample> samples) {
  for (auto& s : samples) s.trigger = std::string(Vocabulary::kSosToken);
  return samples;
}

std::vector<DataSample> trigger_all(std::vector<DataSample> samples) {
  for (auto& s : samples) s.trigger = leading_token(s);
  return samples;
}

}  // namespace trigcopy
