#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "medqa/embeddings.hpp"
#include "medqa/text.hpp"

using namespace medqa;

namespace {

std::vector<std::string> tokens(std::string_view text) { return tokenize(text).tokens; }

}  // namespace

TEST(Tokenize, QuestionFromCorpus) {
  EXPECT_EQ(tokens("How do you treat a cat with a cold?"),
            (std::vector<std::string>{"how", "do", "you", "treat", "a", "cat", "with", "a", "cold"}));
}

TEST(Tokenize, EmptyText) { EXPECT_TRUE(tokenize("").empty()); }

TEST(Tokenize, PunctuationAndCase) {
  EXPECT_EQ(tokens("high-blood  PRESSURE!"),
            (std::vector<std::string>{"high", "blood", "pressure"}));
}

TEST(Tokenize, ApostrophesStayInsideTokens) {
  EXPECT_EQ(tokens("What's Crohn's disease?"),
            (std::vector<std::string>{"what's", "crohn's", "disease"}));
}

TEST(Tokenize, SpansLocateTokens) {
  const std::string text = "  Fever, COUGH";
  const auto seq = tokenize(text);
  ASSERT_EQ(seq.size(), 2u);
  EXPECT_EQ(seq.spans[0], (ByteSpan{2, 7}));
  EXPECT_EQ(seq.spans[1], (ByteSpan{9, 14}));
  EXPECT_EQ(seq.source_text, text);
}

TEST(Tokenize, TokensAreLowercaseNonEmptyWithoutWhitespace) {
  std::mt19937_64 rng(17);
  const std::string alphabet = "aZ9' \t\n-?!.\xc3\xa9";
  for (int trial = 0; trial < 500; ++trial) {
    std::string text;
    for (int i = 0; i < 40; ++i) text += alphabet[rng() % alphabet.size()];
    for (const auto& t : tokenize(text).tokens) {
      EXPECT_FALSE(t.empty());
      for (char c : t) {
        EXPECT_FALSE(std::isspace(static_cast<unsigned char>(c)));
        EXPECT_FALSE(c >= 'A' && c <= 'Z');
      }
    }
  }
}

TEST(NormalizePhrase, JoinsTokens) {
  EXPECT_EQ(normalize_phrase("  High   Blood-Pressure "), "high blood pressure");
  EXPECT_EQ(normalize_phrase("?!"), "");
}

TEST(LoadVectors, TwoWords) {
  std::istringstream in("cat 1 0 0\ndog 0 1 0\n");
  const auto table = load_vectors(in, 3);
  EXPECT_EQ(table.size(), 2u);
  EXPECT_EQ(table.lookup("dog"), (Vector{0, 1, 0}));
}

TEST(LoadVectors, OptionalHeader) {
  std::istringstream in("2 3\ncat 1 0 0\ndog 0 1 0\n");
  EXPECT_EQ(load_vectors(in, 3).size(), 2u);
  std::istringstream wrong("2 4\ncat 1 0 0\n");
  EXPECT_THROW(load_vectors(wrong, 3), ParseError);
}

TEST(LoadVectors, WrongComponentCountNamesLine) {
  std::istringstream in("cat 1 0\n");
  try {
    load_vectors(in, 3);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
  }
  std::istringstream later("cat 1 0 0\ndog 0 1\n");
  try {
    load_vectors(later, 3);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(LoadVectors, NonNumericComponentRejected) {
  std::istringstream in("cat 1 x 0\n");
  EXPECT_THROW(load_vectors(in, 3), ParseError);
}

TEST(LoadVectors, DuplicateKeepsFirst) {
  std::istringstream in("flu 1 2 3\nflu 4 5 6\n");
  const auto table = load_vectors(in, 3);
  EXPECT_EQ(table.size(), 1u);
  EXPECT_EQ(table.lookup("flu"), (Vector{1, 2, 3}));
}

TEST(LoadVectors, MissingFileNamesPath) {
  try {
    load_vectors_file("/nonexistent/vectors.txt", 3);
    FAIL() << "expected failure";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/vectors.txt"), std::string::npos);
  }
}

TEST(WriteVectors, RoundTripsBitExact) {
  EmbeddingTable table(3, 9);
  table.insert("b", Vector{0.1, -2.5e-17, 1.0 / 3.0});
  table.insert("a", Vector{1e300, -0.0, 7});
  std::stringstream buf;
  write_vectors(table, buf);
  const auto back = load_vectors(buf, 3, 9);
  EXPECT_EQ(back.words(), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(back.lookup("a"), table.lookup("a"));
  EXPECT_EQ(back.lookup("b"), table.lookup("b"));
}

TEST(EmbedSequence, PadsKnownTokens) {
  EmbeddingTable table(2);
  table.insert("a", Vector{1, 2});
  table.insert("b", Vector{3, 4});
  table.insert("c", Vector{5, 6});
  const auto e = embed_sequence(table, tokenize("a b c"), 10);
  ASSERT_EQ(e.vectors.size(), 10u);
  EXPECT_EQ(e.vectors[2], (Vector{5, 6}));
  for (std::size_t t = 3; t < 10; ++t) EXPECT_EQ(e.vectors[t], (Vector{0, 0}));
  EXPECT_EQ(e.mask, (std::vector<bool>{true, true, true, false, false, false, false, false, false,
                                       false}));
}

TEST(EmbedSequence, TruncatesToFirstTokens) {
  EmbeddingTable table(1);
  for (int i = 0; i < 12; ++i) table.insert("w" + std::to_string(i), Vector{double(i)});
  std::string text;
  for (int i = 0; i < 12; ++i) text += "w" + std::to_string(i) + " ";
  const auto e = embed_sequence(table, tokenize(text), 10);
  EXPECT_EQ(e.real_count(), 10u);
  EXPECT_EQ(e.vectors[9], (Vector{9.0}));
}

TEST(EmbedSequence, OovIsDeterministicAndBounded) {
  EmbeddingTable table(8, 42);
  const auto a = embed_sequence(table, tokenize("qweasd"), 1);
  const auto b = embed_sequence(table, tokenize("qweasd"), 1);
  EXPECT_EQ(a.vectors[0], b.vectors[0]);
  for (double v : a.vectors[0]) {
    EXPECT_GE(v, -EmbeddingTable::kOovRange);
    EXPECT_LE(v, EmbeddingTable::kOovRange);
  }
  EXPECT_NE(table.oov_vector("qweasd"), table.oov_vector("qweasf"));
  EXPECT_NE(EmbeddingTable(8, 43).oov_vector("qweasd"), table.oov_vector("qweasd"));
}

TEST(EmbedSequence, LengthAndMaskProperties) {
  std::mt19937_64 rng(23);
  EmbeddingTable table(4, 1);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n_tokens = rng() % 15;
    const std::size_t max_len = 1 + rng() % 12;
    std::string text;
    for (std::size_t i = 0; i < n_tokens; ++i) text += "tok" + std::to_string(rng() % 50) + " ";
    const auto e = embed_sequence(table, tokenize(text), max_len);
    ASSERT_EQ(e.vectors.size(), max_len);
    ASSERT_EQ(e.mask.size(), max_len);
    EXPECT_EQ(e.real_count(), std::min(n_tokens, max_len));
    for (std::size_t t = 0; t < max_len; ++t) {
      if (!e.mask[t]) EXPECT_EQ(e.vectors[t], Vector(4));
      EXPECT_EQ(e.vectors[t].size(), 4u);
    }
  }
}

TEST(EmbeddingTable, RejectsWrongDimension) {
  EmbeddingTable table(3);
  EXPECT_THROW(table.insert("x", Vector{1, 2}), ShapeError);
}
