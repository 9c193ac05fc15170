#pragma once

#include "trigcopy/data/sample.hpp"

#include <cstdint>
#include <vector>

namespace trigcopy {

/// Exactly round(ratio * n) samples, picked by a seeded shuffle, get the first
/// token of references[0] as trigger; all others get the SOS placeholder.
std::vector<DataSample> augment_with_triggers(std::vector<DataSample> samples, double ratio, std::uint64_t seed);

/// Every trigger replaced by SOS.
std::vector<DataSample> strip_triggers(std::vector<DataSample> samples);

/// Every sample triggered with the first token of references[0].
std::vector<DataSample> trigger_all(std::vector<DataSample> samples);

}  // namespace trigcopy
