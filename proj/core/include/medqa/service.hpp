#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "medqa/corpus.hpp"
#include "medqa/embeddings.hpp"
#include "medqa/entities.hpp"
#include "medqa/intent.hpp"
#include "medqa/knowledge_graph.hpp"
#include "medqa/model_io.hpp"
#include "medqa/router.hpp"

namespace medqa {

inline constexpr const char* kServiceVersion = "0.1.0";

struct ServiceInputs {
  KnowledgeGraph graph;
  MedicalDictionary dictionary;
  IntentRules rules = IntentRules::defaults();
  std::shared_ptr<const EmbeddingTable> table;  // optional
  std::shared_ptr<const HbamModel> model;       // optional; needs `table`
  std::vector<QaRecord> records;
  RouterConfig config;
};

/// Immutable view of everything a request needs. Requests hold one snapshot
/// for their whole lifetime; writers publish a new one.
struct ServiceSnapshot {
  std::uint64_t generation = 0;
  std::shared_ptr<const KnowledgeGraph> graph;
  /// Base dictionary plus every disease and symptom name in the graph.
  std::shared_ptr<const MedicalDictionary> dictionary;
  std::shared_ptr<const PatternAutomaton> automaton;  // null for an empty dictionary
  std::shared_ptr<const IntentRules> rules;
  std::shared_ptr<const EmbeddingTable> table;
  std::shared_ptr<const FuzzyEntityIndex> fuzzy;
  std::shared_ptr<const HbamModel> model;
  std::shared_ptr<const std::vector<QaRecord>> records;
  std::shared_ptr<const QaRetriever> corpus;  // null without a model
  RouterConfig config;

  KgResources resources() const;
};

struct ChatResult {
  ChatAnswer answer;
  std::uint64_t generation = 0;
};

/// Thread-safe owner of the current snapshot. Readers never block writers for
/// longer than a pointer copy; writers are serialized and rebuild derived
/// indexes off to the side before publishing.
class ServiceState {
 public:
  explicit ServiceState(ServiceInputs inputs);

  std::shared_ptr<const ServiceSnapshot> snapshot() const;

  ChatResult chat(const std::string& text) const;

  /// Each mutation returns the generation it published. Invalid mutations
  /// throw std::invalid_argument and publish nothing.
  std::uint64_t upsert_entity(EntityKind kind, const std::string& name,
                              std::map<PropertyKey, std::string> properties = {});
  std::uint64_t upsert_relationship(RelationKind kind, const std::string& from,
                                    const std::string& to);
  std::uint64_t swap_model(std::shared_ptr<const HbamModel> model,
                           std::shared_ptr<const EmbeddingTable> table);

 private:
  std::shared_ptr<ServiceSnapshot> build(const ServiceSnapshot& base,
                                         std::shared_ptr<const KnowledgeGraph> graph,
                                         std::shared_ptr<const HbamModel> model,
                                         std::shared_ptr<const EmbeddingTable> table) const;
  void publish(const std::shared_ptr<ServiceSnapshot>& next);

  MedicalDictionary base_dictionary_;
  mutable std::mutex snapshot_mutex_;
  std::mutex writer_mutex_;
  std::shared_ptr<const ServiceSnapshot> current_;
};

/// HTTP/JSON front end over a ServiceState.
///
///   POST /chat               {"text": "..."} -> chat answer
///   GET  /kg/entities        ?kind=disease|symptom|department
///   POST /kg/entities        {"kind", "name", "properties": {...}}
///   POST /kg/relationships   {"kind", "from", "to"}
///   GET  /qa/records         ?offset=0&limit=20
///   GET  /model              model metadata
///   GET  /healthz
class ChatServer {
 public:
  explicit ChatServer(ServiceState& state);
  ~ChatServer();
  ChatServer(const ChatServer&) = delete;
  ChatServer& operator=(const ChatServer&) = delete;

  /// Binds and returns the port (an ephemeral one when `port` is 0); throws on failure.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  void serve();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Blocks SIGINT and SIGTERM, serves on the calling thread and stops the
/// server when either signal arrives. Call before starting any other thread.
void serve_until_signal(ChatServer& server);

}  // namespace medqa
