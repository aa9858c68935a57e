#include "medqa/entities.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>

namespace medqa {

namespace {

std::string normalize_term(std::string_view raw) {
  const auto first = raw.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = raw.find_last_not_of(" \t\r");
  return to_lower_ascii(raw.substr(first, last - first + 1));
}

Vector mean_vector(const EmbeddingTable& table, const std::vector<std::string>& tokens) {
  Vector out(table.dim());
  if (tokens.empty()) return out;
  for (const auto& tok : tokens) {
    const Vector v = table.lookup(tok);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += v[i];
  }
  for (auto& x : out) x /= static_cast<double>(tokens.size());
  return out;
}

}  // namespace

std::string_view to_string(EntityRole role) {
  return role == EntityRole::disease ? "disease" : "symptom";
}

std::string_view to_string(MatchVia via) { return via == MatchVia::exact ? "exact" : "fuzzy"; }

void MedicalDictionary::add(EntityRole role, std::string_view term) {
  auto norm = normalize_term(term);
  if (norm.empty()) return;
  (role == EntityRole::disease ? diseases : symptoms).insert(std::move(norm));
}

std::vector<EntityRole> MedicalDictionary::roles_of(const std::string& term) const {
  std::vector<EntityRole> roles;
  if (diseases.count(term)) roles.push_back(EntityRole::disease);
  if (symptoms.count(term)) roles.push_back(EntityRole::symptom);
  return roles;
}

std::vector<std::string> MedicalDictionary::terms() const {
  std::vector<std::string> all;
  std::set_union(diseases.begin(), diseases.end(), symptoms.begin(), symptoms.end(),
                 std::back_inserter(all));
  return all;
}

MedicalDictionary parse_dictionary(std::istream& in) {
  MedicalDictionary dict;
  std::string line;
  std::size_t line_no = 0;
  std::optional<EntityRole> section;
  while (std::getline(in, line)) {
    ++line_no;
    const auto term = normalize_term(line);
    if (term.empty() || term.front() == '#') continue;
    if (term == "[diseases]") {
      section = EntityRole::disease;
    } else if (term == "[symptoms]") {
      section = EntityRole::symptom;
    } else if (term.front() == '[') {
      throw ParseError(line_no, "unknown section " + term);
    } else if (!section) {
      throw ParseError(line_no, "term outside a [diseases] or [symptoms] section");
    } else {
      dict.add(*section, term);
    }
  }
  return dict;
}

MedicalDictionary load_dictionary_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dictionary file: " + path);
  return parse_dictionary(in);
}

void write_dictionary(const MedicalDictionary& dict, std::ostream& out) {
  out << "[diseases]\n";
  for (const auto& t : dict.diseases) out << t << '\n';
  out << "[symptoms]\n";
  for (const auto& t : dict.symptoms) out << t << '\n';
}

PatternAutomaton build_automaton(const MedicalDictionary& dict) {
  if (dict.empty()) throw std::invalid_argument("build_automaton: dictionary is empty");
  return PatternAutomaton(dict.terms());
}

bool EntityMatch::has_role(EntityRole role) const {
  return std::find(roles.begin(), roles.end(), role) != roles.end();
}

bool on_token_boundary(std::string_view text, ByteSpan span) {
  if (span.begin > 0 && is_alnum_byte(static_cast<unsigned char>(text[span.begin - 1]))) {
    return false;
  }
  if (span.end < text.size() && is_alnum_byte(static_cast<unsigned char>(text[span.end]))) {
    return false;
  }
  return true;
}

std::vector<EntityMatch> extract_entities(const PatternAutomaton& automaton,
                                          const MedicalDictionary& dict, std::string_view text) {
  const std::string lowered = to_lower_ascii(text);
  std::vector<AhoCorasick::Hit> hits;
  for (const auto& hit : automaton.scan(lowered)) {
    if (on_token_boundary(lowered, {hit.begin, hit.end})) hits.push_back(hit);
  }
  std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) {
    const auto la = a.end - a.begin;
    const auto lb = b.end - b.begin;
    if (la != lb) return la > lb;
    return a.begin < b.begin;
  });

  std::vector<AhoCorasick::Hit> kept;
  for (const auto& hit : hits) {
    const bool overlaps = std::any_of(kept.begin(), kept.end(), [&](const auto& k) {
      return hit.begin < k.end && k.begin < hit.end;
    });
    if (!overlaps) kept.push_back(hit);
  }
  std::sort(kept.begin(), kept.end(),
            [](const auto& a, const auto& b) { return a.begin < b.begin; });

  std::vector<EntityMatch> out;
  out.reserve(kept.size());
  for (const auto& hit : kept) {
    const auto& term = automaton.patterns()[hit.pattern];
    out.push_back({term, dict.roles_of(term), {hit.begin, hit.end}, MatchVia::exact, 1.0});
  }
  return out;
}

FuzzyEntityIndex::FuzzyEntityIndex(const EmbeddingTable& table, const MedicalDictionary& dict)
    : table_(&table), dict_(&dict), terms_(dict.terms()) {
  vectors_.reserve(terms_.size());
  for (const auto& term : terms_) vectors_.push_back(mean_vector(table, tokenize(term).tokens));
}

std::vector<EntityMatch> FuzzyEntityIndex::search(std::string_view text, std::size_t k) const {
  if (k == 0) throw std::invalid_argument("fuzzy search: k must be >= 1");
  const auto seq = tokenize(text);
  std::vector<std::size_t> content;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (!is_stopword(seq.tokens[i])) content.push_back(i);
  }
  if (content.empty() || terms_.empty()) return {};

  std::vector<Vector> token_vectors;
  token_vectors.reserve(content.size());
  for (std::size_t i : content) token_vectors.push_back(table_->lookup(seq.tokens[i]));

  std::vector<EntityMatch> scored;
  scored.reserve(terms_.size());
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    double best = -2.0;
    std::size_t best_token = 0;
    for (std::size_t j = 0; j < content.size(); ++j) {
      const double c = cosine(vectors_[t], token_vectors[j]);
      if (c > best) {
        best = c;
        best_token = content[j];
      }
    }
    scored.push_back(
        {terms_[t], dict_->roles_of(terms_[t]), seq.spans[best_token], MatchVia::fuzzy, best});
  }
  std::stable_sort(scored.begin(), scored.end(), [](const EntityMatch& a, const EntityMatch& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.term < b.term;
  });
  if (scored.size() > k) scored.resize(k);
  return scored;
}

std::vector<EntityMatch> fuzzy_entities(const EmbeddingTable& table, const MedicalDictionary& dict,
                                        std::string_view text, std::size_t k) {
  return FuzzyEntityIndex(table, dict).search(text, k);
}

}  // namespace medqa
