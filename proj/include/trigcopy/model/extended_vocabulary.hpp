#pragma once

#include "trigcopy/data/sample.hpp"
#include "trigcopy/data/vocabulary.hpp"
#include "trigcopy/numerics/tensor.hpp"

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace trigcopy {

/// V followed by the source words outside V. Copy positions are the N field
/// tokens followed by the N value tokens of the sample.
class ExtendedVocabulary {
 public:
  ExtendedVocabulary(const Vocabulary& base, const DataSample& sample);

  [[nodiscard]] const Vocabulary& base() const { return *base_; }
  [[nodiscard]] TokenId size() const { return base_->size() + static_cast<TokenId>(oov_.size()); }
  /// V id, else the extended id of a source word, else UNK.
  [[nodiscard]] TokenId id(std::string_view token) const;
  /// Throws ContractError for ids outside [0, size()).
  [[nodiscard]] const std::string& token(TokenId id) const;
  /// Unique source words in first-occurrence order over copy positions.
  [[nodiscard]] const std::vector<std::string>& source_words() const { return source_words_; }
  [[nodiscard]] Index copy_positions() const { return static_cast<Index>(position_ids_.size()); }
  /// Extended id of the token at each copy position.
  [[nodiscard]] const std::vector<TokenId>& position_ids() const { return position_ids_; }
  [[nodiscard]] bool in_source(TokenId id) const;
  /// Id to feed back into the decoder: the id itself for V, UNK for source-only words.
  [[nodiscard]] TokenId input_id(TokenId id) const { return id < base_->size() ? id : Vocabulary::kUnk; }

  /// Maps extended ids to surface tokens (copied words verbatim).
  [[nodiscard]] std::vector<std::string> resolve(std::span<const TokenId> ids) const;

 private:
  const Vocabulary* base_;
  std::vector<std::string> oov_;
  std::unordered_map<std::string, TokenId> oov_ids_;
  std::vector<std::string> source_words_;
  std::vector<TokenId> position_ids_;
};

/// Free-function form of ExtendedVocabulary::resolve.
std::vector<std::string> resolve_copies(std::span<const TokenId> ids, const ExtendedVocabulary& extended);

}  // namespace trigcopy
