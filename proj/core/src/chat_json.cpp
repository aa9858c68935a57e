#include "medqa/chat_json.hpp"

#include <cmath>

namespace medqa {

nlohmann::ordered_json to_json(const ChatAnswer& answer) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["source"] = std::string(to_string(answer.source));
  doc["text"] = answer.text;
  auto alts = ordered_json::array();
  for (const auto& a : answer.alternatives) {
    alts.push_back({{"question", a.question}, {"answer", a.answer}, {"similarity", a.similarity}});
  }
  doc["alternatives"] = std::move(alts);

  ordered_json diag;
  diag["intent"] = std::string(to_string(answer.diagnostics.intent));
  auto entities = ordered_json::array();
  for (const auto& e : answer.diagnostics.entities) {
    auto roles = ordered_json::array();
    for (auto r : e.roles) roles.push_back(std::string(to_string(r)));
    entities.push_back({{"term", e.term},
                        {"roles", std::move(roles)},
                        {"span", {e.span.begin, e.span.end}},
                        {"matched_via", std::string(to_string(e.via))},
                        {"score", e.score}});
  }
  diag["entities"] = std::move(entities);
  diag["kg_items"] = answer.diagnostics.kg_items;
  if (!answer.diagnostics.note.empty()) diag["note"] = answer.diagnostics.note;
  doc["diagnostics"] = std::move(diag);
  return doc;
}

std::vector<std::string> validate_chat_answer(const nlohmann::json& doc, std::size_t top_k) {
  std::vector<std::string> errors;
  auto fail = [&](std::string msg) { errors.push_back(std::move(msg)); };

  if (!doc.is_object()) {
    fail("answer is not an object");
    return errors;
  }
  if (!doc.contains("source") || !doc["source"].is_string()) fail("source must be a string");
  if (!doc.contains("text") || !doc["text"].is_string()) fail("text must be a string");
  if (!doc.contains("alternatives") || !doc["alternatives"].is_array()) {
    fail("alternatives must be an array");
  }
  if (!doc.contains("diagnostics") || !doc["diagnostics"].is_object()) {
    fail("diagnostics must be an object");
  }
  if (!errors.empty()) return errors;

  const std::string source = doc["source"];
  if (source != "kg" && source != "qa" && source != "none") fail("unknown source '" + source + "'");
  if (doc["text"].get<std::string>().empty()) fail("text is empty");

  const auto& alts = doc["alternatives"];
  if (source == "kg" && !alts.empty()) fail("kg answer carries alternatives");
  if (source == "qa" && (alts.empty() || alts.size() > top_k)) {
    fail("qa answer has " + std::to_string(alts.size()) + " alternatives, expected 1.." +
         std::to_string(top_k));
  }
  double prev = INFINITY;
  for (std::size_t i = 0; i < alts.size(); ++i) {
    const auto& a = alts[i];
    const std::string where = "alternatives[" + std::to_string(i) + "]";
    if (!a.is_object() || !a.contains("question") || !a["question"].is_string() ||
        !a.contains("answer") || !a["answer"].is_string() || !a.contains("similarity") ||
        !a["similarity"].is_number()) {
      fail(where + " lacks question/answer/similarity");
      continue;
    }
    const double s = a["similarity"];
    if (!(s >= 0.0 && s <= 1.0)) fail(where + " similarity outside [0, 1]");
    if (s > prev) fail(where + " is more similar than its predecessor");
    prev = s;
  }

  const auto& diag = doc["diagnostics"];
  if (!diag.contains("intent") || !diag["intent"].is_string()) {
    fail("diagnostics.intent must be a string");
  } else if (!intent_from_string(diag["intent"].get<std::string>())) {
    fail("diagnostics.intent is not a known intent");
  }
  if (!diag.contains("entities") || !diag["entities"].is_array()) {
    fail("diagnostics.entities must be an array");
  } else {
    for (const auto& e : diag["entities"]) {
      if (!e.is_object() || !e.contains("term") || !e["term"].is_string() ||
          !e.contains("span") || !e["span"].is_array() || e["span"].size() != 2) {
        fail("malformed entity in diagnostics");
      }
    }
  }
  return errors;
}

}  // namespace medqa
