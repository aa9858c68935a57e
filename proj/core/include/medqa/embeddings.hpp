#pragma once

#include <cstdint>
#include <istream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "medqa/linalg.hpp"
#include "medqa/text.hpp"

namespace medqa {

/// Raised by the text loaders; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Frozen word vectors. Unknown words map to a pseudo-random vector derived
/// from the word and `oov_seed`, so every lookup is deterministic.
class EmbeddingTable {
 public:
  static constexpr double kOovRange = 0.25;

  explicit EmbeddingTable(std::size_t dim, std::uint64_t oov_seed = 0);

  std::size_t dim() const { return dim_; }
  std::uint64_t oov_seed() const { return oov_seed_; }
  std::size_t size() const { return entries_.size(); }

  /// Inserts unless present; returns false for a duplicate (first one wins).
  bool insert(const std::string& word, Vector vector);
  bool contains(const std::string& word) const { return entries_.count(word) != 0; }

  /// Stored vector, or the OOV vector for unknown words.
  Vector lookup(const std::string& word) const;
  Vector oov_vector(const std::string& word) const;
  /// Stored words in lexicographic order.
  std::vector<std::string> words() const;

 private:
  std::size_t dim_;
  std::uint64_t oov_seed_;
  std::unordered_map<std::string, Vector> entries_;
};

/// Reads `word v1 ... v_dim` lines, with an optional leading `count dim` header.
EmbeddingTable load_vectors(std::istream& source, std::size_t expected_dim,
                            std::uint64_t oov_seed = 0);
EmbeddingTable load_vectors_file(const std::string& path, std::size_t expected_dim,
                                 std::uint64_t oov_seed = 0);

/// Writes a `count dim` header then one `word v1 ... v_dim` line per word,
/// sorted by word, with round-trip precision.
void write_vectors(const EmbeddingTable& table, std::ostream& out);

/// Fixed-length embedded sentence; mask[t] marks real tokens.
struct EmbeddedSequence {
  std::vector<Vector> vectors;
  std::vector<bool> mask;

  std::size_t real_count() const;
};

/// Keeps the first `max_len` tokens and right-pads with zero vectors.
EmbeddedSequence embed_sequence(const EmbeddingTable& table, const TokenSequence& seq,
                                std::size_t max_len);

}  // namespace medqa
