#include "trigcopy/model/extended_vocabulary.hpp"

#include <algorithm>
#include <unordered_set>

namespace trigcopy {

ExtendedVocabulary::ExtendedVocabulary(const Vocabulary& base, const DataSample& sample) : base_(&base) {
  std::unordered_set<std::string> seen;
  auto visit = [&](const std::string& token) {
    if (seen.insert(token).second) source_words_.push_back(token);
    TokenId id = base.contains(token) ? base.id(token) : -1;
    if (id < 0) {
      auto [it, inserted] = oov_ids_.try_emplace(token, base.size() + static_cast<TokenId>(oov_.size()));
      if (inserted) oov_.push_back(token);
      id = it->second;
    }
    position_ids_.push_back(id);
  };
  for (const auto& f : sample.fields) visit(f);
  for (const auto& v : sample.values) visit(v);
}

TokenId ExtendedVocabulary::id(std::string_view token) const {
  if (base_->contains(token)) return base_->id(token);
  auto it = oov_ids_.find(std::string(token));
  return it == oov_ids_.end() ? Vocabulary::kUnk : it->second;
}

const std::string& ExtendedVocabulary::token(TokenId id) const {
  if (id < 0 || id >= size()) {
    throw ContractError("extended id " + std::to_string(id) + " outside [0, " + std::to_string(size()) + ")");
  }
  if (id < base_->size()) return base_->token(id);
  return oov_[static_cast<std::size_t>(id - base_->size())];
}

bool ExtendedVocabulary::in_source(TokenId id) const {
  return std::find(position_ids_.begin(), position_ids_.end(), id) != position_ids_.end();
}

std::vector<std::string> ExtendedVocabulary::resolve(std::span<const TokenId> ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (TokenId id : ids) out.push_back(token(id));
  return out;
}

std::vector<std::string> resolve_copies(std::span<const TokenId> ids, const ExtendedVocabulary& extended) {
  return extended.resolve(ids);
}

}  // namespace trigcopy
