#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace medqa {

/// Half-open byte range into a source string.
struct ByteSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  friend bool operator==(const ByteSpan&, const ByteSpan&) = default;
};

struct TokenSequence {
  std::vector<std::string> tokens;  // lowercase, non-empty, no whitespace
  std::vector<ByteSpan> spans;      // spans[i] locates tokens[i] in source_text
  std::string source_text;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
};

/// Letters, digits and bytes of multi-byte UTF-8 sequences.
bool is_alnum_byte(unsigned char c);

/// ASCII lowercase; other bytes pass through so byte offsets are preserved.
std::string to_lower_ascii(std::string_view text);

/// Lowercases and splits on every byte that is not a letter, digit or apostrophe.
TokenSequence tokenize(std::string_view text);

/// Tokens joined by single spaces: the canonical form used for phrase matching.
std::string normalize_phrase(std::string_view text);

/// Common English function words that carry no medical content.
bool is_stopword(std::string_view token);

}  // namespace medqa
