#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "medqa/embeddings.hpp"
#include "medqa/hbam.hpp"

namespace medqa {

enum class PairSide { left, right };

/// A question that tokenizes to nothing cannot be encoded.
class EmptyQuestionError : public std::invalid_argument {
 public:
  explicit EmptyQuestionError(PairSide side)
      : std::invalid_argument(side == PairSide::left ? "left question has no tokens"
                                                     : "right question has no tokens"),
        side_(side) {}

  PairSide side() const { return side_; }

 private:
  PairSide side_;
};

/// exp(-||a - b||_1), in (0, 1].
double manhattan_similarity(const Vector& a, const Vector& b);

struct PairScore {
  double similarity = 0.0;
  SentenceEncoding left;
  SentenceEncoding right;
};

/// Tokenizes, embeds and encodes `text`. Throws EmptyQuestionError(side) on no tokens.
SentenceEncoding encode_text(const HbamParameters& params, const EmbeddingTable& table,
                             const std::string& text, std::size_t max_len,
                             PairSide side = PairSide::left);

/// Both sides go through the same parameters.
PairScore score_pair(const HbamParameters& params, const EmbeddingTable& table,
                     const std::string& q1, const std::string& q2, std::size_t max_len);

struct RankedCandidate {
  std::size_t index = 0;
  double similarity = 0.0;

  friend bool operator==(const RankedCandidate&, const RankedCandidate&) = default;
};

/// Top-k by similarity, descending; ties go to the lower index. Candidates that
/// tokenize to nothing score 0.
std::vector<RankedCandidate> rank_against_corpus(const HbamParameters& params,
                                                 const EmbeddingTable& table,
                                                 const std::string& query,
                                                 const std::vector<std::string>& candidates,
                                                 std::size_t k, std::size_t max_len);

/// Pooled encodings of a fixed candidate list, computed once and reused per query.
class EncodedCorpus {
 public:
  EncodedCorpus(const HbamParameters& params, const EmbeddingTable& table,
                const std::vector<std::string>& candidates, std::size_t max_len);

  std::size_t size() const { return pooled_.size(); }

  std::vector<RankedCandidate> rank(const HbamParameters& params, const EmbeddingTable& table,
                                    const std::string& query, std::size_t k) const;

 private:
  std::size_t max_len_;
  std::vector<Vector> pooled_;  // empty Vector for candidates without tokens
};

/// Sorts descending by similarity with index tie-break and keeps the first k.
std::vector<RankedCandidate> top_k(std::vector<RankedCandidate> scored, std::size_t k);

}  // namespace medqa
