#include "medqa/similarity.hpp"

#include <algorithm>
#include <cmath>

namespace medqa {

double manhattan_similarity(const Vector& a, const Vector& b) {
  return std::exp(-l1_distance(a, b));
}

SentenceEncoding encode_text(const HbamParameters& params, const EmbeddingTable& table,
                             const std::string& text, std::size_t max_len, PairSide side) {
  const auto tokens = tokenize(text);
  if (tokens.empty()) throw EmptyQuestionError(side);
  return encode(params, embed_sequence(table, tokens, max_len));
}

PairScore score_pair(const HbamParameters& params, const EmbeddingTable& table,
                     const std::string& q1, const std::string& q2, std::size_t max_len) {
  PairScore score;
  score.left = encode_text(params, table, q1, max_len, PairSide::left);
  score.right = encode_text(params, table, q2, max_len, PairSide::right);
  score.similarity = manhattan_similarity(score.left.pooled, score.right.pooled);
  return score;
}

std::vector<RankedCandidate> top_k(std::vector<RankedCandidate> scored, std::size_t k) {
  std::sort(scored.begin(), scored.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.index < b.index;
  });
  if (scored.size() > k) scored.resize(k);
  return scored;
}

std::vector<RankedCandidate> rank_against_corpus(const HbamParameters& params,
                                                 const EmbeddingTable& table,
                                                 const std::string& query,
                                                 const std::vector<std::string>& candidates,
                                                 std::size_t k, std::size_t max_len) {
  if (k == 0) throw std::invalid_argument("rank_against_corpus: k must be >= 1");
  if (candidates.empty()) throw std::invalid_argument("rank_against_corpus: no candidates");
  const EncodedCorpus corpus(params, table, candidates, max_len);
  return corpus.rank(params, table, query, k);
}

EncodedCorpus::EncodedCorpus(const HbamParameters& params, const EmbeddingTable& table,
                             const std::vector<std::string>& candidates, std::size_t max_len)
    : max_len_(max_len) {
  pooled_.reserve(candidates.size());
  for (const auto& text : candidates) {
    const auto tokens = tokenize(text);
    if (tokens.empty()) {
      pooled_.emplace_back();
      continue;
    }
    pooled_.push_back(encode(params, embed_sequence(table, tokens, max_len)).pooled);
  }
}

std::vector<RankedCandidate> EncodedCorpus::rank(const HbamParameters& params,
                                                 const EmbeddingTable& table,
                                                 const std::string& query, std::size_t k) const {
  if (k == 0) throw std::invalid_argument("rank: k must be >= 1");
  const Vector q = encode_text(params, table, query, max_len_).pooled;
  std::vector<RankedCandidate> scored;
  scored.reserve(pooled_.size());
  for (std::size_t i = 0; i < pooled_.size(); ++i) {
    const double sim = pooled_[i].empty() ? 0.0 : manhattan_similarity(q, pooled_[i]);
    scored.push_back({i, sim});
  }
  return top_k(std::move(scored), k);
}

}  // namespace medqa
