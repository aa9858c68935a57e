#pragma once

#include <memory>
#include <string>
#include <vector>

#include "medqa/corpus.hpp"
#include "medqa/embeddings.hpp"
#include "medqa/entities.hpp"
#include "medqa/intent.hpp"
#include "medqa/knowledge_graph.hpp"
#include "medqa/model_io.hpp"
#include "medqa/similarity.hpp"

namespace medqa {

struct RouterConfig {
  std::size_t top_k = 3;
  bool kg_enabled = true;
  double similarity_floor = 0.0;
  /// Fuzzy entity candidates below this cosine are ignored.
  double fuzzy_min_cosine = 0.6;

  void validate() const;
};

enum class AnswerSource { kg, qa, none };
std::string_view to_string(AnswerSource source);

struct Alternative {
  std::string question;
  std::string answer;
  double similarity = 0.0;
};

struct Diagnostics {
  std::vector<EntityMatch> entities;
  Intent intent = Intent::Unknown;
  std::vector<std::string> kg_items;
  std::string note;  // set when routing degraded
};

struct ChatAnswer {
  AnswerSource source = AnswerSource::none;
  std::string text;
  std::vector<Alternative> alternatives;  // empty for kg answers
  Diagnostics diagnostics;
};

inline constexpr const char* kAskAgainMessage =
    "Sorry, I did not understand the question. Could you ask it again in a different way?";
inline constexpr const char* kNoAnswerMessage =
    "Sorry, I could not find an answer to that question.";

/// QA-pair corpus searched when the knowledge graph has no answer.
class QaRetriever {
 public:
  virtual ~QaRetriever() = default;
  virtual std::size_t size() const = 0;
  /// Best k records for `question`, most similar first. Empty if the question
  /// cannot be encoded.
  virtual std::vector<Alternative> retrieve(const std::string& question, std::size_t k) const = 0;
};

/// Ranks corpus questions with the Siamese encoder. Corpus encodings are
/// computed once at construction.
class HbamRetriever : public QaRetriever {
 public:
  HbamRetriever(std::shared_ptr<const HbamModel> model, std::shared_ptr<const EmbeddingTable> table,
                std::vector<QaRecord> records);

  std::size_t size() const override { return records_.size(); }
  std::vector<Alternative> retrieve(const std::string& question, std::size_t k) const override;

  const std::vector<QaRecord>& records() const { return records_; }
  const HbamModel& model() const { return *model_; }

 private:
  std::shared_ptr<const HbamModel> model_;
  std::shared_ptr<const EmbeddingTable> table_;
  std::vector<QaRecord> records_;
  EncodedCorpus encoded_;
};

/// Read-only knowledge-side inputs. `automaton` is null when the dictionary is
/// empty; `fuzzy` is null when no embedding table is available.
struct KgResources {
  const KnowledgeGraph* graph = nullptr;
  const MedicalDictionary* dictionary = nullptr;
  const PatternAutomaton* automaton = nullptr;
  const IntentRules* rules = nullptr;
  const FuzzyEntityIndex* fuzzy = nullptr;
};

/// Human-readable sentence for a found KG answer.
std::string render_kg_answer(const KgAnswer& answer);

/// Knowledge graph first; corpus retrieval when the graph cannot answer.
/// Never throws for any input text: internal failures yield source=none with
/// the cause in diagnostics.note.
ChatAnswer route(const std::string& question, const KgResources& kg, const QaRetriever* corpus,
                 const RouterConfig& config);

}  // namespace medqa
