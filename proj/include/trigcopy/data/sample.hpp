#pragma once

#include "trigcopy/data/vocabulary.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace trigcopy {

using TokenSequence = std::vector<std::string>;

/// One record: optional trigger, intent, aligned field/value token sequences
/// and one or more tokenized references.
struct DataSample {
  std::string trigger = std::string(Vocabulary::kSosToken);
  std::string intent = std::string(IntentSet::kDummyLabel);
  TokenSequence fields;
  TokenSequence values;
  std::vector<TokenSequence> references;

  [[nodiscard]] std::size_t length() const { return values.size(); }
  [[nodiscard]] bool has_trigger() const { return trigger != Vocabulary::kSosToken; }
  /// The populated-field combination key: intent plus distinct field names in order.
  [[nodiscard]] std::string signature() const;
  /// Throws std::invalid_argument if alignment or reference invariants fail.
  void validate() const;

  friend bool operator==(const DataSample&, const DataSample&) = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}
  [[nodiscard]] std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// One (input, target) pair per reference; the target becomes the only reference.
std::vector<DataSample> expand_references(const std::vector<DataSample>& samples);

/// Merges samples with identical trigger, intent, fields and values into one
/// multi-reference sample, keeping first-occurrence order.
std::vector<DataSample> group_references(const std::vector<DataSample>& samples);

}  // namespace trigcopy
