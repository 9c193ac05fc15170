#include "trigcopy/data/vocabulary.hpp"

#include "trigcopy/data/sample.hpp"
#include "trigcopy/data/tokenizer.hpp"

#include <stdexcept>

namespace trigcopy {

Vocabulary::Vocabulary() {
  for (auto token : {kPadToken, kSosToken, kEosToken, kUnkToken}) add(token);
}

TokenId Vocabulary::add(std::string_view token) {
  if (token.empty()) throw std::invalid_argument("Vocabulary::add: empty token");
  auto [it, inserted] = ids_.try_emplace(std::string(token), size());
  if (inserted) tokens_.emplace_back(token);
  return it->second;
}

TokenId Vocabulary::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const { return ids_.contains(std::string(token)); }

const std::string& Vocabulary::token(TokenId id) const {
  if (id < 0 || id >= size()) throw std::out_of_range("Vocabulary::token: id " + std::to_string(id));
  return tokens_[static_cast<std::size_t>(id)];
}

bool Vocabulary::is_reserved(std::string_view token) {
  return token == kPadToken || token == kSosToken || token == kEosToken || token == kUnkToken;
}

Vocabulary build_vocab(std::span<const DataSample> train_samples) {
  Vocabulary vocab;
  for (const auto& sample : train_samples) {
    for (const auto& t : tokenize(sample.intent)) vocab.add(t);
    for (const auto& t : sample.fields) vocab.add(t);
    for (const auto& t : sample.values) vocab.add(t);
    for (const auto& ref : sample.references) {
      for (const auto& t : ref) vocab.add(t);
    }
    if (sample.has_trigger()) vocab.add(sample.trigger);
  }
  return vocab;
}

IntentSet::IntentSet() { add(kUnknownLabel); }

IntentSet::IntentSet(std::span<const std::string> labels) : IntentSet() {
  for (const auto& l : labels) add(l);
}

std::int64_t IntentSet::add(std::string_view label) {
  auto [it, inserted] = ids_.try_emplace(std::string(label), size());
  if (inserted) labels_.emplace_back(label);
  return it->second;
}

std::int64_t IntentSet::id(std::string_view label) const {
  auto it = ids_.find(std::string(label));
  return it == ids_.end() ? kUnknown : it->second;
}

bool IntentSet::contains(std::string_view label) const { return ids_.contains(std::string(label)); }

std::string IntentSet::describe() const {
  std::string out;
  for (std::size_t i = 1; i < labels_.size(); ++i) {
    if (i > 1) out += ", ";
    out += labels_[i];
  }
  return out;
}

IntentSet build_intents(std::span<const DataSample> train_samples) {
  IntentSet intents;
  for (const auto& s : train_samples) intents.add(s.intent);
  return intents;
}

}  // namespace trigcopy
