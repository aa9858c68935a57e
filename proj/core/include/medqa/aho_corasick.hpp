#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace medqa {

/// Multi-pattern byte matcher: a trie with failure links built breadth-first,
/// each node's output set merged with the outputs along its failure chain.
class AhoCorasick {
 public:
  struct Hit {
    std::size_t pattern = 0;  // index into patterns()
    std::size_t begin = 0;
    std::size_t end = 0;  // exclusive

    friend bool operator==(const Hit&, const Hit&) = default;
    friend auto operator<=>(const Hit&, const Hit&) = default;
  };

  struct Node {
    std::map<unsigned char, std::size_t> next;
    std::size_t fail = 0;
    std::size_t depth = 0;
    std::vector<std::size_t> outputs;  // pattern indices ending here
  };

  static constexpr std::size_t kRoot = 0;

  /// Throws std::invalid_argument for an empty pattern list or an empty pattern.
  explicit AhoCorasick(std::vector<std::string> patterns);

  /// Every occurrence of every pattern, ordered by end offset.
  std::vector<Hit> scan(std::string_view text) const;

  const std::vector<std::string>& patterns() const { return patterns_; }
  const std::vector<Node>& nodes() const { return nodes_; }

 private:
  std::size_t transition(std::size_t state, unsigned char c) const;

  std::vector<std::string> patterns_;
  std::vector<Node> nodes_;
};

}  // namespace medqa
