#pragma once

#include <cstddef>
#include <iosfwd>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "medqa/aho_corasick.hpp"
#include "medqa/embeddings.hpp"
#include "medqa/text.hpp"

namespace medqa {

enum class EntityRole { disease, symptom };
enum class MatchVia { exact, fuzzy };

std::string_view to_string(EntityRole role);
std::string_view to_string(MatchVia via);

/// Disease and symptom keyword sets. Terms are stored lowercase and trimmed; a
/// term may appear in both sets.
struct MedicalDictionary {
  std::set<std::string> diseases;
  std::set<std::string> symptoms;

  /// Normalizes and inserts; blank terms are ignored.
  void add(EntityRole role, std::string_view term);
  bool empty() const { return diseases.empty() && symptoms.empty(); }
  std::vector<EntityRole> roles_of(const std::string& term) const;
  /// Union of both sets, sorted, without duplicates.
  std::vector<std::string> terms() const;
};

/// Reads `[diseases]` / `[symptoms]` sections, one term per line ('#' comments).
MedicalDictionary parse_dictionary(std::istream& in);
MedicalDictionary load_dictionary_file(const std::string& path);
void write_dictionary(const MedicalDictionary& dict, std::ostream& out);

/// Aho-Corasick automaton over every dictionary term; pattern i is terms()[i].
using PatternAutomaton = AhoCorasick;

/// Throws std::invalid_argument for an empty dictionary.
PatternAutomaton build_automaton(const MedicalDictionary& dict);

struct EntityMatch {
  std::string term;
  std::vector<EntityRole> roles;
  ByteSpan span;  // into the original text
  MatchVia via = MatchVia::exact;
  double score = 1.0;  // cosine for fuzzy matches

  bool has_role(EntityRole role) const;
};

/// True when the span is not flanked by a letter or digit on either side.
bool on_token_boundary(std::string_view text, ByteSpan span);

/// Case-insensitive dictionary hits aligned to token boundaries. Overlaps are
/// resolved longest first, then leftmost; the result is ordered by position.
std::vector<EntityMatch> extract_entities(const PatternAutomaton& automaton,
                                          const MedicalDictionary& dict, std::string_view text);

/// Mean-of-word-vector embedding for every dictionary term, built once.
class FuzzyEntityIndex {
 public:
  FuzzyEntityIndex(const EmbeddingTable& table, const MedicalDictionary& dict);

  /// Top-k terms by their best cosine against any non-stopword token of `text`.
  /// Ties go to the lexicographically smaller term.
  std::vector<EntityMatch> search(std::string_view text, std::size_t k) const;

 private:
  const EmbeddingTable* table_;
  const MedicalDictionary* dict_;
  std::vector<std::string> terms_;
  std::vector<Vector> vectors_;
};

std::vector<EntityMatch> fuzzy_entities(const EmbeddingTable& table, const MedicalDictionary& dict,
                                        std::string_view text, std::size_t k);

}  // namespace medqa
