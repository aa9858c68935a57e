#include "medqa/text.hpp"

#include <algorithm>
#include <array>

namespace medqa {

bool is_alnum_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

namespace {

bool is_token_byte(unsigned char c) { return is_alnum_byte(c) || c == '\''; }

char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

}  // namespace

std::string to_lower_ascii(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(), lower);
  return out;
}

TokenSequence tokenize(std::string_view text) {
  TokenSequence seq;
  seq.source_text = std::string(text);
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_token_byte(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < text.size() && is_token_byte(static_cast<unsigned char>(text[i]))) ++i;
    seq.tokens.push_back(to_lower_ascii(text.substr(start, i - start)));
    seq.spans.push_back({start, i});
  }
  return seq;
}

std::string normalize_phrase(std::string_view text) {
  const auto seq = tokenize(text);
  std::string out;
  for (const auto& tok : seq.tokens) {
    if (!out.empty()) out += ' ';
    out += tok;
  }
  return out;
}

bool is_stopword(std::string_view token) {
  static constexpr std::array<std::string_view, 72> kStopwords = {
      "a",     "about", "am",    "an",    "and",   "are",    "as",     "at",    "be",
      "been",  "but",   "by",    "can",   "could", "did",    "do",     "does",  "for",
      "from",  "get",   "give",  "had",   "has",   "have",   "having", "he",    "her",
      "his",   "how",   "i",     "i'm",   "if",    "in",     "into",   "is",    "it",
      "its",   "me",    "my",    "of",    "on",    "or",     "our",    "she",   "should",
      "so",    "some",  "that",  "the",   "their", "them",   "there",  "they",  "this",
      "to",    "too",   "was",   "we",    "were",  "what",   "when",   "where", "which",
      "who",   "why",   "will",  "with",  "would", "you",    "your",   "any",   "there's"};
  return std::find(kStopwords.begin(), kStopwords.end(), token) != kStopwords.end();
}

}  // namespace medqa
