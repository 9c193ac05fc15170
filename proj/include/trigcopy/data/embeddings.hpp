#pragma once

#include "trigcopy/data/vocabulary.hpp"
#include "trigcopy/numerics/tensor.hpp"

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

namespace trigcopy {

class EmbeddingFormatError : public std::runtime_error {
 public:
  EmbeddingFormatError(const std::string& message, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  [[nodiscard]] std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// One row per vocabulary id. Rows without a pretrained vector are seeded
/// uniform(-bound, bound); `pretrained[id]` marks the ones read from file.
struct EmbeddingTable {
  Index dimension = 50;
  Tensord vectors;
  std::vector<bool> pretrained;
  /// Fraction of non-reserved vocabulary tokens found in the file.
  double coverage = 0.0;
};

struct EmbeddingOptions {
  Index dimension = 50;
  std::uint64_t seed = 17;
  double random_bound = 0.08;
};

EmbeddingTable load_embeddings(std::istream& in, const Vocabulary& vocab, const EmbeddingOptions& options = {});
EmbeddingTable load_embeddings(const std::filesystem::path& path, const Vocabulary& vocab,
                               const EmbeddingOptions& options = {});

/// Writes `token v1 ... vd` lines for every non-reserved vocabulary row.
void write_embeddings(std::ostream& out, const Vocabulary& vocab, const Tensord& vectors);

}  // namespace trigcopy
