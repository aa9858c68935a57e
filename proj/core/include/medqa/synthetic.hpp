#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "medqa/corpus.hpp"
#include "medqa/embeddings.hpp"

namespace medqa {

/// Small paraphrase corpus with hand-shaped word vectors. Synonyms share a
/// concept vector plus noise, so duplicate pairs are learnable from the
/// embeddings alone. Non-duplicates always differ in their condition.
struct ToyCorpusOptions {
  std::size_t n_pairs = 200;  // must be even; half are duplicates
  std::size_t dim = 32;
  std::uint64_t seed = 7;
  double synonym_noise = 0.1;
};

struct ToyCorpus {
  EmbeddingTable table;
  std::vector<QuoraRow> rows;
};

ToyCorpus make_toy_corpus(const ToyCorpusOptions& options = {});

}  // namespace medqa
