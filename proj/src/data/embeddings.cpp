#include "trigcopy/data/embeddings.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

namespace trigcopy {

EmbeddingTable load_embeddings(std::istream& in, const Vocabulary& vocab, const EmbeddingOptions& options) {
  if (options.dimension <= 0) throw std::invalid_argument("embedding dimension must be positive");
  EmbeddingTable table;
  table.dimension = options.dimension;
  table.vectors.resize(vocab.size(), options.dimension);
  table.pretrained.assign(static_cast<std::size_t>(vocab.size()), false);

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> uniform(-options.random_bound, options.random_bound);
  for (Index r = 0; r < table.vectors.rows(); ++r) {
    for (Index c = 0; c < table.vectors.cols(); ++c) table.vectors(r, c) = uniform(rng);
  }
  table.vectors.row(Vocabulary::kPad).setZero();

  std::string line;
  std::size_t number = 0;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::istringstream fields(line);
    std::string token;
    fields >> token;
    values.clear();
    std::string number_text;
    while (fields >> number_text) {
      double v = 0;
      const auto* end = number_text.data() + number_text.size();
      const auto [ptr, ec] = std::from_chars(number_text.data(), end, v);
      if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
        throw EmbeddingFormatError("non-numeric vector entry '" + number_text + "'", number);
      }
      values.push_back(v);
    }
    if (static_cast<Index>(values.size()) != options.dimension) {
      throw EmbeddingFormatError("expected " + std::to_string(options.dimension) + " values for '" + token +
                                     "', found " + std::to_string(values.size()),
                                 number);
    }
    if (!vocab.contains(token) || Vocabulary::is_reserved(token)) continue;
    const TokenId id = vocab.id(token);
    for (Index c = 0; c < options.dimension; ++c) table.vectors(id, c) = values[static_cast<std::size_t>(c)];
    table.pretrained[static_cast<std::size_t>(id)] = true;
  }

  std::size_t found = 0;
  for (TokenId id = Vocabulary::kReserved; id < vocab.size(); ++id) found += table.pretrained[static_cast<std::size_t>(id)];
  table.coverage = vocab.regular_size() > 0 ? static_cast<double>(found) / static_cast<double>(vocab.regular_size()) : 0.0;
  return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, const Vocabulary& vocab,
                               const EmbeddingOptions& options) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open embedding file " + path.string());
  return load_embeddings(in, vocab, options);
}

void write_embeddings(std::ostream& out, const Vocabulary& vocab, const Tensord& vectors) {
  if (vectors.rows() != vocab.size()) throw DimensionError("write_embeddings: one row per vocabulary id expected");
  out.precision(17);
  for (TokenId id = Vocabulary::kReserved; id < vocab.size(); ++id) {
    out << vocab.token(id);
    for (Index c = 0; c < vectors.cols(); ++c) out << ' ' << vectors(id, c);
    out << '\n';
  }
}

}  // namespace trigcopy
