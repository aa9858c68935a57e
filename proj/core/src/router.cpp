#include "medqa/router.hpp"

#include <algorithm>
#include <sstream>

namespace medqa {

namespace {

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += sep;
    out += items[i];
  }
  return out;
}

std::vector<std::string> corpus_questions(const HbamModel& model, const EmbeddingTable& table,
                                          const std::vector<QaRecord>& records) {
  if (table.dim() != model.params.embedding_dim) {
    throw std::invalid_argument("embedding table dim " + std::to_string(table.dim()) +
                                " does not match model embedding_dim " +
                                std::to_string(model.params.embedding_dim));
  }
  std::vector<std::string> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.question);
  return out;
}

/// Tries each candidate entity in order; returns the first found answer.
std::optional<KgAnswer> answer_from_graph(const KnowledgeGraph& graph, Intent intent,
                                          const std::vector<EntityMatch>& entities) {
  for (const auto& e : entities) {
    auto result = answer(graph, intent, e.term);
    if (result.found) return result;
  }
  return std::nullopt;
}

ChatAnswer route_unchecked(const std::string& question, const KgResources& kg,
                           const QaRetriever* corpus, const RouterConfig& config) {
  ChatAnswer out;
  auto& diag = out.diagnostics;

  if (kg.automaton != nullptr && kg.dictionary != nullptr) {
    diag.entities = extract_entities(*kg.automaton, *kg.dictionary, question);
  }
  if (diag.entities.empty() && kg.fuzzy != nullptr) {
    for (auto& m : kg.fuzzy->search(question, config.top_k)) {
      if (m.score >= config.fuzzy_min_cosine) diag.entities.push_back(std::move(m));
    }
  }
  diag.intent = kg.rules != nullptr ? classify_intent(*kg.rules, question) : classify_intent(question);

  if (config.kg_enabled && kg.graph != nullptr && diag.intent != Intent::Unknown &&
      !diag.entities.empty()) {
    if (auto found = answer_from_graph(*kg.graph, diag.intent, diag.entities)) {
      out.source = AnswerSource::kg;
      out.text = render_kg_answer(*found);
      diag.kg_items = found->items;
      return out;
    }
  }

  if (corpus == nullptr || corpus->size() == 0) {
    out.source = AnswerSource::none;
    out.text = diag.intent == Intent::Unknown ? kAskAgainMessage : kNoAnswerMessage;
    return out;
  }

  for (auto& alt : corpus->retrieve(question, config.top_k)) {
    if (alt.similarity >= config.similarity_floor) out.alternatives.push_back(std::move(alt));
  }
  if (out.alternatives.empty()) {
    out.source = AnswerSource::none;
    out.text = kAskAgainMessage;
    return out;
  }
  out.source = AnswerSource::qa;
  out.text = out.alternatives.front().answer;
  return out;
}

}  // namespace

void RouterConfig::validate() const {
  if (top_k == 0) throw std::invalid_argument("top_k must be >= 1");
  if (!(similarity_floor >= 0.0 && similarity_floor <= 1.0)) {
    throw std::invalid_argument("similarity_floor must lie in [0, 1]");
  }
}

std::string_view to_string(AnswerSource source) {
  switch (source) {
    case AnswerSource::kg:
      return "kg";
    case AnswerSource::qa:
      return "qa";
    default:
      return "none";
  }
}

HbamRetriever::HbamRetriever(std::shared_ptr<const HbamModel> model,
                             std::shared_ptr<const EmbeddingTable> table,
                             std::vector<QaRecord> records)
    : model_(std::move(model)),
      table_(std::move(table)),
      records_(std::move(records)),
      encoded_(model_->params, *table_, corpus_questions(*model_, *table_, records_),
               model_->max_seq_length) {}

std::vector<Alternative> HbamRetriever::retrieve(const std::string& question,
                                                 std::size_t k) const {
  if (records_.empty() || tokenize(question).empty()) return {};
  std::vector<Alternative> out;
  for (const auto& ranked : encoded_.rank(model_->params, *table_, question, k)) {
    const auto& rec = records_[ranked.index];
    out.push_back({rec.question, rec.answer, ranked.similarity});
  }
  return out;
}

std::string render_kg_answer(const KgAnswer& answer) {
  const std::string items = join(answer.items, "; ");
  switch (answer.intent) {
    case Intent::Symptom:
      return "The symptoms of " + answer.subject + " include: " + items + ".";
    case Intent::Description:
      return answer.subject + ": " + items;
    case Intent::Cause:
      return "Causes of " + answer.subject + ": " + items;
    case Intent::Prevention:
      return "To prevent " + answer.subject + ": " + items;
    case Intent::Accompany:
      return "Diseases that may accompany " + answer.subject + ": " + items + ".";
    case Intent::CureWay:
      return "Ways to treat " + answer.subject + ": " + items;
    default:
      return items;
  }
}

ChatAnswer route(const std::string& question, const KgResources& kg, const QaRetriever* corpus,
                 const RouterConfig& config) {
  try {
    return route_unchecked(question, kg, corpus, config);
  } catch (const std::exception& e) {
    ChatAnswer out;
    out.source = AnswerSource::none;
    out.text = kNoAnswerMessage;
    out.diagnostics.note = e.what();
    return out;
  }
}

}  // namespace medqa
