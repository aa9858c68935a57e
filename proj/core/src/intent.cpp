#include "medqa/intent.hpp"

#include <array>
#include <fstream>
#include <istream>
#include <utility>

#include "medqa/embeddings.hpp"
#include "medqa/text.hpp"

namespace medqa {

namespace {

constexpr std::array<std::pair<Intent, std::string_view>, 7> kNames = {{
    {Intent::Symptom, "Symptom"},
    {Intent::Description, "Description"},
    {Intent::Cause, "Cause"},
    {Intent::Prevention, "Prevention"},
    {Intent::Accompany, "Accompany"},
    {Intent::CureWay, "CureWay"},
    {Intent::Unknown, "Unknown"},
}};

}  // namespace

std::string_view to_string(Intent intent) {
  for (const auto& [i, name] : kNames) {
    if (i == intent) return name;
  }
  return "Unknown";
}

std::optional<Intent> intent_from_string(std::string_view name) {
  const std::string lowered = to_lower_ascii(name);
  for (const auto& [i, n] : kNames) {
    if (to_lower_ascii(n) == lowered) return i;
  }
  return std::nullopt;
}

IntentRules IntentRules::defaults() {
  return {{
      {Intent::Symptom, {"symptom", "symptoms", "sign", "feel like"}},
      {Intent::Description, {"what is", "describe", "tell me about"}},
      {Intent::Cause, {"cause", "causes", "why", "reason"}},
      {Intent::Prevention, {"prevent", "prevention", "avoid"}},
      {Intent::Accompany, {"accompany", "complication", "related disease", "together with"}},
      {Intent::CureWay,
       {"cure", "treat", "treatment", "therapy", "how to heal", "medicine for"}},
  }};
}

IntentRules parse_intent_rules(std::istream& in) {
  IntentRules out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (normalize_phrase(line).empty()) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw ParseError(line_no, "expected 'kind: phrase | ...'");
    std::string kind(line.substr(0, colon));
    kind.erase(0, kind.find_first_not_of(" \t"));
    kind.erase(kind.find_last_not_of(" \t\r") + 1);
    const auto intent = intent_from_string(kind);
    if (!intent || *intent == Intent::Unknown) {
      throw ParseError(line_no, "unknown intent kind '" + kind + "'");
    }
    IntentRule rule{*intent, {}};
    std::string_view rest = std::string_view(line).substr(colon + 1);
    while (true) {
      const auto bar = rest.find('|');
      auto phrase = normalize_phrase(rest.substr(0, bar));
      if (!phrase.empty()) rule.phrases.push_back(std::move(phrase));
      if (bar == std::string_view::npos) break;
      rest.remove_prefix(bar + 1);
    }
    if (rule.phrases.empty()) throw ParseError(line_no, "rule has no phrases");
    out.rules.push_back(std::move(rule));
  }
  return out;
}

IntentRules load_intent_rules_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open intent rules file: " + path);
  return parse_intent_rules(in);
}

Intent classify_intent(const IntentRules& rules, std::string_view text) {
  const std::string haystack = " " + normalize_phrase(text) + " ";
  for (const auto& rule : rules.rules) {
    for (const auto& phrase : rule.phrases) {
      if (haystack.find(" " + phrase + " ") != std::string::npos) return rule.intent;
    }
  }
  return Intent::Unknown;
}

Intent classify_intent(std::string_view text) {
  static const IntentRules kDefaults = IntentRules::defaults();
  return classify_intent(kDefaults, text);
}

}  // namespace medqa
