#include "medqa/aho_corasick.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace medqa {

AhoCorasick::AhoCorasick(std::vector<std::string> patterns) : patterns_(std::move(patterns)) {
  if (patterns_.empty()) throw std::invalid_argument("aho-corasick: no patterns");
  nodes_.emplace_back();

  for (std::size_t p = 0; p < patterns_.size(); ++p) {
    if (patterns_[p].empty()) throw std::invalid_argument("aho-corasick: empty pattern");
    std::size_t state = kRoot;
    for (unsigned char c : patterns_[p]) {
      auto it = nodes_[state].next.find(c);
      if (it == nodes_[state].next.end()) {
        nodes_.emplace_back();
        nodes_.back().depth = nodes_[state].depth + 1;
        it = nodes_[state].next.emplace(c, nodes_.size() - 1).first;
      }
      state = it->second;
    }
    auto& out = nodes_[state].outputs;
    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
  }

  std::deque<std::size_t> queue;
  for (const auto& [c, child] : nodes_[kRoot].next) {
    nodes_[child].fail = kRoot;
    queue.push_back(child);
  }
  while (!queue.empty()) {
    const std::size_t state = queue.front();
    queue.pop_front();
    for (const auto& [c, child] : nodes_[state].next) {
      std::size_t f = nodes_[state].fail;
      while (f != kRoot && !nodes_[f].next.count(c)) f = nodes_[f].fail;
      const auto it = nodes_[f].next.find(c);
      nodes_[child].fail = (it != nodes_[f].next.end() && it->second != child) ? it->second : kRoot;
      // The failure target is shallower, so its outputs are already merged.
      const auto& inherited = nodes_[nodes_[child].fail].outputs;
      nodes_[child].outputs.insert(nodes_[child].outputs.end(), inherited.begin(),
                                   inherited.end());
      queue.push_back(child);
    }
  }
}

std::size_t AhoCorasick::transition(std::size_t state, unsigned char c) const {
  while (true) {
    const auto& next = nodes_[state].next;
    if (auto it = next.find(c); it != next.end()) return it->second;
    if (state == kRoot) return kRoot;
    state = nodes_[state].fail;
  }
}

std::vector<AhoCorasick::Hit> AhoCorasick::scan(std::string_view text) const {
  std::vector<Hit> hits;
  std::size_t state = kRoot;
  for (std::size_t i = 0; i < text.size(); ++i) {
    state = transition(state, static_cast<unsigned char>(text[i]));
    for (std::size_t p : nodes_[state].outputs) {
      const std::size_t len = patterns_[p].size();
      hits.push_back({p, i + 1 - len, i + 1});
    }
  }
  return hits;
}

}  // namespace medqa
