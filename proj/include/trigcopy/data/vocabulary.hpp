#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace trigcopy {

using TokenId = std::int64_t;

struct DataSample;

/// Token <-> id map with four reserved ids. Built from the training split only.
class Vocabulary {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kSos = 1;
  static constexpr TokenId kEos = 2;
  static constexpr TokenId kUnk = 3;
  static constexpr TokenId kReserved = 4;

  static constexpr std::string_view kPadToken = "<pad>";
  static constexpr std::string_view kSosToken = "<sos>";
  static constexpr std::string_view kEosToken = "<eos>";
  static constexpr std::string_view kUnkToken = "<unk>";

  Vocabulary();

  /// Adds a token if absent and returns its id.
  TokenId add(std::string_view token);

  /// UNK for unknown tokens.
  [[nodiscard]] TokenId id(std::string_view token) const;
  [[nodiscard]] bool contains(std::string_view token) const;
  [[nodiscard]] const std::string& token(TokenId id) const;
  [[nodiscard]] TokenId size() const { return static_cast<TokenId>(tokens_.size()); }
  /// Size without the reserved tokens.
  [[nodiscard]] TokenId regular_size() const { return size() - kReserved; }
  [[nodiscard]] const std::vector<std::string>& tokens() const { return tokens_; }

  static bool is_reserved(std::string_view token);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
};

/// Every token of training fields, values, references, intent surface tokens
/// and non-placeholder triggers, in first-occurrence order.
Vocabulary build_vocab(std::span<const DataSample> train_samples);

/// Intent labels. Id 0 is the reserved unknown-intent slot that unseen labels map to.
class IntentSet {
 public:
  static constexpr std::int64_t kUnknown = 0;
  static constexpr std::string_view kUnknownLabel = "<unk-intent>";
  /// Constant label used for datasets without intents.
  static constexpr std::string_view kDummyLabel = "I0";

  IntentSet();
  explicit IntentSet(std::span<const std::string> labels);

  std::int64_t add(std::string_view label);
  [[nodiscard]] std::int64_t id(std::string_view label) const;
  [[nodiscard]] bool contains(std::string_view label) const;
  [[nodiscard]] const std::string& label(std::int64_t id) const { return labels_.at(static_cast<std::size_t>(id)); }
  [[nodiscard]] std::int64_t size() const { return static_cast<std::int64_t>(labels_.size()); }
  [[nodiscard]] const std::vector<std::string>& labels() const { return labels_; }
  /// Known labels without the reserved slot, comma separated.
  [[nodiscard]] std::string describe() const;

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::int64_t> ids_;
};

IntentSet build_intents(std::span<const DataSample> train_samples);

}  // namespace trigcopy
