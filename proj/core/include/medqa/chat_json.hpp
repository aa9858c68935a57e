#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "medqa/router.hpp"

namespace medqa {

/// {"source", "text", "alternatives": [{"question","answer","similarity"}],
///  "diagnostics": {"intent", "entities": [...], "kg_items": [...]}}
nlohmann::ordered_json to_json(const ChatAnswer& answer);

/// Structural and semantic violations of the chat answer contract; empty when
/// valid. Checks: required fields and types, source in {kg, qa, none},
/// kg answers carry no alternatives, qa answers carry 1..top_k alternatives
/// sorted by non-increasing similarity in [0, 1], and a known intent name.
std::vector<std::string> validate_chat_answer(const nlohmann::json& doc, std::size_t top_k);

}  // namespace medqa
