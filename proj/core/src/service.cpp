#include "medqa/service.hpp"

#include <pthread.h>
#include <signal.h>

#include <atomic>
#include <charconv>
#include <httplib.h>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <thread>

#include "medqa/chat_json.hpp"

namespace medqa {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

MedicalDictionary effective_dictionary(const MedicalDictionary& base, const KnowledgeGraph& graph) {
  MedicalDictionary dict = base;
  for (const auto* e : graph.entities(EntityKind::disease)) dict.add(EntityRole::disease, e->name);
  for (const auto* e : graph.entities(EntityKind::symptom)) dict.add(EntityRole::symptom, e->name);
  return dict;
}

ordered_json entity_json(const Entity& e) {
  ordered_json doc;
  doc["id"] = e.id;
  doc["kind"] = std::string(to_string(e.kind));
  doc["name"] = e.name;
  ordered_json props = ordered_json::object();
  for (const auto& [key, value] : e.properties) props[std::string(to_string(key))] = value;
  doc["properties"] = std::move(props);
  return doc;
}

void reply(httplib::Response& res, int status, const ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& message) {
  reply(res, status, ordered_json{{"error", message}});
}

std::size_t query_size(const httplib::Request& req, const std::string& key, std::size_t fallback) {
  if (!req.has_param(key)) return fallback;
  const std::string value = req.get_param_value(key);
  std::size_t parsed = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), parsed);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw std::invalid_argument(key + " must be a non-negative integer");
  }
  return parsed;
}

json parse_body(const httplib::Request& req) {
  json body = json::parse(req.body, nullptr, /*allow_exceptions=*/false);
  if (body.is_discarded() || !body.is_object()) {
    throw std::invalid_argument("request body must be a JSON object");
  }
  return body;
}

std::string required_string(const json& body, const std::string& key) {
  if (!body.contains(key) || !body[key].is_string()) {
    throw std::invalid_argument("'" + key + "' must be a string");
  }
  return body[key].get<std::string>();
}

}  // namespace

KgResources ServiceSnapshot::resources() const {
  return {graph.get(), dictionary.get(), automaton.get(), rules.get(), fuzzy.get()};
}

ServiceState::ServiceState(ServiceInputs inputs) : base_dictionary_(std::move(inputs.dictionary)) {
  inputs.config.validate();
  if (inputs.model && !inputs.table) {
    throw std::invalid_argument("a model needs an embedding table");
  }
  ServiceSnapshot seed;
  seed.rules = std::make_shared<const IntentRules>(std::move(inputs.rules));
  seed.records = std::make_shared<const std::vector<QaRecord>>(std::move(inputs.records));
  seed.config = inputs.config;
  current_ = build(seed, std::make_shared<const KnowledgeGraph>(std::move(inputs.graph)),
                   std::move(inputs.model), std::move(inputs.table));
}

std::shared_ptr<ServiceSnapshot> ServiceState::build(
    const ServiceSnapshot& base, std::shared_ptr<const KnowledgeGraph> graph,
    std::shared_ptr<const HbamModel> model, std::shared_ptr<const EmbeddingTable> table) const {
  auto next = std::make_shared<ServiceSnapshot>(base);
  next->graph = std::move(graph);
  auto dict = std::make_shared<const MedicalDictionary>(
      effective_dictionary(base_dictionary_, *next->graph));
  next->dictionary = dict;
  next->automaton =
      dict->empty() ? nullptr : std::make_shared<const PatternAutomaton>(build_automaton(*dict));

  const bool retrain_side = model != base.model || table != base.table;
  next->model = std::move(model);
  next->table = std::move(table);
  next->fuzzy = next->table && !dict->empty()
                    ? std::make_shared<const FuzzyEntityIndex>(*next->table, *dict)
                    : nullptr;
  if (retrain_side || !base.corpus) {
    next->corpus = next->model && next->table
                       ? std::make_shared<const HbamRetriever>(next->model, next->table,
                                                               *next->records)
                       : nullptr;
  }
  return next;
}

void ServiceState::publish(const std::shared_ptr<ServiceSnapshot>& next) {
  std::lock_guard lock(snapshot_mutex_);
  next->generation = current_->generation + 1;
  current_ = next;
}

std::shared_ptr<const ServiceSnapshot> ServiceState::snapshot() const {
  std::lock_guard lock(snapshot_mutex_);
  return current_;
}

ChatResult ServiceState::chat(const std::string& text) const {
  const auto snap = snapshot();
  return {route(text, snap->resources(), snap->corpus.get(), snap->config), snap->generation};
}

std::uint64_t ServiceState::upsert_entity(EntityKind kind, const std::string& name,
                                          std::map<PropertyKey, std::string> properties) {
  std::lock_guard writer(writer_mutex_);
  const auto base = snapshot();
  auto graph = std::make_shared<KnowledgeGraph>(*base->graph);
  graph->upsert_entity(kind, name, std::move(properties));
  auto next = build(*base, std::move(graph), base->model, base->table);
  publish(next);
  return next->generation;
}

std::uint64_t ServiceState::upsert_relationship(RelationKind kind, const std::string& from,
                                                const std::string& to) {
  std::lock_guard writer(writer_mutex_);
  const auto base = snapshot();
  auto graph = std::make_shared<KnowledgeGraph>(*base->graph);
  graph->upsert_relationship(kind, from, to);
  auto next = build(*base, std::move(graph), base->model, base->table);
  publish(next);
  return next->generation;
}

std::uint64_t ServiceState::swap_model(std::shared_ptr<const HbamModel> model,
                                       std::shared_ptr<const EmbeddingTable> table) {
  if (!model || !table) throw std::invalid_argument("swap_model needs a model and a table");
  std::lock_guard writer(writer_mutex_);
  const auto base = snapshot();
  auto next = build(*base, base->graph, std::move(model), std::move(table));
  publish(next);
  return next->generation;
}

struct ChatServer::Impl {
  explicit Impl(ServiceState& s) : state(s) {}

  ServiceState& state;
  httplib::Server server;
  std::atomic<bool> bound{false};
};

ChatServer::ChatServer(ServiceState& state) : impl_(std::make_unique<Impl>(state)) {
  auto& svr = impl_->server;
  ServiceState& st = state;
  svr.set_payload_max_length(1 << 20);

  svr.set_exception_handler([](const httplib::Request&, httplib::Response& res,
                               std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const std::invalid_argument& e) {
      reply_error(res, 400, e.what());
    } catch (const std::out_of_range& e) {
      reply_error(res, 400, e.what());
    } catch (const std::exception& e) {
      reply_error(res, 500, e.what());
    }
  });

  svr.Post("/chat", [&st](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const std::string text = required_string(body, "text");
    if (normalize_phrase(text).empty()) {
      reply_error(res, 400, "'text' must contain at least one word");
      return;
    }
    const auto result = st.chat(text);
    auto doc = to_json(result.answer);
    doc["diagnostics"]["snapshot"] = result.generation;
    reply(res, 200, doc);
  });

  svr.Get("/kg/entities", [&st](const httplib::Request& req, httplib::Response& res) {
    std::optional<EntityKind> kind;
    if (req.has_param("kind")) {
      kind = entity_kind_from_string(req.get_param_value("kind"));
      if (!kind) throw std::invalid_argument("unknown entity kind");
    }
    const auto snap = st.snapshot();
    ordered_json list = ordered_json::array();
    for (const auto* e : snap->graph->entities(kind)) list.push_back(entity_json(*e));
    reply(res, 200, ordered_json{{"generation", snap->generation}, {"entities", std::move(list)}});
  });

  svr.Post("/kg/entities", [&st](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const auto kind = entity_kind_from_string(required_string(body, "kind"));
    if (!kind) throw std::invalid_argument("unknown entity kind");
    const std::string name = required_string(body, "name");
    std::map<PropertyKey, std::string> props;
    if (body.contains("properties")) {
      if (!body["properties"].is_object()) throw std::invalid_argument("properties must be an object");
      for (const auto& [key, value] : body["properties"].items()) {
        const auto prop = property_from_string(key);
        if (!prop) throw std::invalid_argument("unknown property '" + key + "'");
        if (!value.is_string()) throw std::invalid_argument("property values must be strings");
        props[*prop] = value.get<std::string>();
      }
    }
    const auto generation = st.upsert_entity(*kind, name, std::move(props));
    const auto snap = st.snapshot();
    const Entity* stored = snap->graph->find(*kind, name);
    ordered_json doc{{"generation", generation}};
    if (stored != nullptr) doc["entity"] = entity_json(*stored);
    reply(res, 200, doc);
  });

  svr.Post("/kg/relationships", [&st](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const auto kind = relation_from_string(required_string(body, "kind"));
    if (!kind) throw std::invalid_argument("unknown relationship kind");
    const auto generation =
        st.upsert_relationship(*kind, required_string(body, "from"), required_string(body, "to"));
    reply(res, 200, ordered_json{{"generation", generation}});
  });

  svr.Get("/qa/records", [&st](const httplib::Request& req, httplib::Response& res) {
    const std::size_t offset = query_size(req, "offset", 0);
    const std::size_t limit = query_size(req, "limit", 20);
    const auto snap = st.snapshot();
    const auto& records = *snap->records;
    ordered_json list = ordered_json::array();
    for (std::size_t i = offset; i < records.size() && i - offset < limit; ++i) {
      const auto& r = records[i];
      list.push_back({{"question", r.question},
                      {"answer", r.answer},
                      {"source", std::string(to_string(r.source))},
                      {"tags", r.tags}});
    }
    reply(res, 200,
          ordered_json{{"total", records.size()}, {"offset", offset}, {"records", std::move(list)}});
  });

  svr.Get("/model", [&st](const httplib::Request&, httplib::Response& res) {
    const auto snap = st.snapshot();
    ordered_json doc{{"generation", snap->generation}, {"loaded", snap->model != nullptr}};
    if (snap->model) {
      const auto& p = snap->model->params;
      doc["hidden"] = p.hidden;
      doc["embedding_dim"] = p.embedding_dim;
      doc["attention_dim"] = p.attention.dim();
      doc["max_seq_length"] = snap->model->max_seq_length;
      doc["parameters"] = p.parameter_count();
      doc["corpus_size"] = snap->records->size();
    }
    reply(res, 200, doc);
  });

  svr.Get("/healthz", [&st](const httplib::Request&, httplib::Response& res) {
    reply(res, 200, ordered_json{{"status", "ok"}, {"version", kServiceVersion}, {"generation", st.snapshot()->generation}});
  });
}

ChatServer::~ChatServer() { stop(); }

int ChatServer::bind(const std::string& host, int port) {
  int bound_port = port;
  if (port == 0) {
    bound_port = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound_port = -1;
  }
  if (bound_port < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  impl_->bound = true;
  return bound_port;
}

void ChatServer::serve() {
  if (!impl_->bound) throw std::logic_error("serve() before bind()");
  impl_->server.listen_after_bind();
}

void ChatServer::stop() { impl_->server.stop(); }

void ChatServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

void serve_until_signal(ChatServer& server) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  std::thread waiter([&server, signals] {
    int received = 0;
    sigwait(&signals, &received);
    server.stop();
  });
  server.serve();
  // The server may also stop on its own; wake the waiter so it can exit.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
}

}  // namespace medqa
