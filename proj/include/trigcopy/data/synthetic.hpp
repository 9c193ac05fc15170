#pragma once

#include "trigcopy/data/sample.hpp"

#include <cstdint>
#include <vector>

namespace trigcopy {

/// Restaurant meaning representations over the eight E2E attributes with
/// template references of varied opening words. Each sample carries
/// `references_per_sample` distinct references.
std::vector<DataSample> synthetic_e2e(std::size_t count, std::uint64_t seed, std::size_t references_per_sample = 1);

/// Messaging records over the six custom intents and their populated-field
/// combinations; ACT intents produce markup, SHARE intents produce text.
std::vector<DataSample> synthetic_custom(std::size_t count, std::uint64_t seed,
                                         std::size_t references_per_sample = 1);

}  // namespace trigcopy
