#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace medqa {

enum class Intent { Symptom, Description, Cause, Prevention, Accompany, CureWay, Unknown };

std::string_view to_string(Intent intent);
std::optional<Intent> intent_from_string(std::string_view name);

/// Ordered keyword rules; the first rule with a matching phrase wins.
struct IntentRule {
  Intent intent;
  std::vector<std::string> phrases;  // normalized: lowercase tokens joined by single spaces
};

struct IntentRules {
  std::vector<IntentRule> rules;

  /// The built-in rule table (symptom, description, cause, prevention,
  /// accompany, cure way).
  static IntentRules defaults();
};

/// Parses `kind: phrase1 | phrase2 | ...` lines; line order is priority.
IntentRules parse_intent_rules(std::istream& in);
IntentRules load_intent_rules_file(const std::string& path);

/// Phrase matching is token-aligned: "sign" matches "a sign of" but not "design".
Intent classify_intent(const IntentRules& rules, std::string_view text);
Intent classify_intent(std::string_view text);

}  // namespace medqa
