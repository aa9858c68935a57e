#include "medqa/knowledge_graph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <stdexcept>
#include <tuple>

#include "medqa/embeddings.hpp"
#include "medqa/text.hpp"

namespace medqa {

namespace {

constexpr std::array<std::string_view, 3> kEntityKinds = {"department", "disease", "symptom"};
constexpr std::array<std::string_view, 4> kPropertyKeys = {"description", "cause", "prevent",
                                                           "cure_way"};
constexpr std::array<std::string_view, 5> kRelationKinds = {
    "have_symptom", "accompany_with", "disease_prevent", "disease_cause", "disease_cureway"};

template <typename Enum, std::size_t N>
std::optional<Enum> lookup_name(const std::array<std::string_view, N>& names,
                                std::string_view name) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == name) return static_cast<Enum>(i);
  }
  return std::nullopt;
}

std::size_t slot(EntityKind kind) { return static_cast<std::size_t>(kind); }

/// Allowed target kinds, in resolution order.
std::vector<EntityKind> target_kinds(RelationKind kind) {
  switch (kind) {
    case RelationKind::have_symptom:
      return {EntityKind::symptom};
    case RelationKind::accompany_with:
      return {EntityKind::disease};
    default:
      return {EntityKind::disease, EntityKind::symptom};
  }
}

std::optional<PropertyKey> property_for(Intent intent) {
  switch (intent) {
    case Intent::Description:
      return PropertyKey::description;
    case Intent::Cause:
      return PropertyKey::cause;
    case Intent::Prevention:
      return PropertyKey::prevent;
    case Intent::CureWay:
      return PropertyKey::cure_way;
    default:
      return std::nullopt;
  }
}

std::optional<RelationKind> relation_for(Intent intent) {
  switch (intent) {
    case Intent::Symptom:
      return RelationKind::have_symptom;
    case Intent::Accompany:
      return RelationKind::accompany_with;
    case Intent::Cause:
      return RelationKind::disease_cause;
    case Intent::Prevention:
      return RelationKind::disease_prevent;
    case Intent::CureWay:
      return RelationKind::disease_cureway;
    default:
      return std::nullopt;
  }
}

}  // namespace

std::string_view to_string(EntityKind kind) { return kEntityKinds[slot(kind)]; }
std::string_view to_string(PropertyKey key) { return kPropertyKeys[static_cast<std::size_t>(key)]; }
std::string_view to_string(RelationKind kind) {
  return kRelationKinds[static_cast<std::size_t>(kind)];
}
std::optional<EntityKind> entity_kind_from_string(std::string_view name) {
  return lookup_name<EntityKind>(kEntityKinds, name);
}
std::optional<PropertyKey> property_from_string(std::string_view name) {
  return lookup_name<PropertyKey>(kPropertyKeys, name);
}
std::optional<RelationKind> relation_from_string(std::string_view name) {
  return lookup_name<RelationKind>(kRelationKinds, name);
}

EntityId KnowledgeGraph::upsert_entity(EntityKind kind, std::string_view name,
                                       std::map<PropertyKey, std::string> properties) {
  std::string display(name);
  display.erase(0, display.find_first_not_of(" \t\r\n"));
  display.erase(display.find_last_not_of(" \t\r\n") + 1);
  if (display.empty()) throw std::invalid_argument("entity name must not be empty");
  if (kind != EntityKind::disease && !properties.empty()) {
    throw std::invalid_argument("only diseases carry properties (entity '" + display + "')");
  }
  const std::string key = to_lower_ascii(display);
  auto& index = by_name_[slot(kind)];
  if (auto it = index.find(key); it != index.end()) {
    entities_[it->second].properties = std::move(properties);
    return it->second;
  }
  const auto id = static_cast<EntityId>(entities_.size());
  entities_.push_back({id, kind, std::move(display), std::move(properties)});
  index.emplace(key, id);
  return id;
}

void KnowledgeGraph::upsert_relationship(RelationKind kind, EntityId from, EntityId to) {
  if (!contains(from) || !contains(to)) {
    throw std::invalid_argument(std::string(to_string(kind)) + ": endpoint does not exist");
  }
  if (entities_[from].kind != EntityKind::disease) {
    throw std::invalid_argument(std::string(to_string(kind)) + ": source '" +
                                entities_[from].name + "' is not a disease");
  }
  const auto allowed = target_kinds(kind);
  if (std::find(allowed.begin(), allowed.end(), entities_[to].kind) == allowed.end()) {
    throw std::invalid_argument(std::string(to_string(kind)) + ": target '" +
                                entities_[to].name + "' has the wrong kind");
  }
  if (relationships_.insert({kind, from, to}).second) {
    by_from_[{kind, from}].insert(to);
    by_to_[{kind, to}].insert(from);
  }
}

void KnowledgeGraph::upsert_relationship(RelationKind kind, std::string_view from,
                                         std::string_view to) {
  const Entity* source = find(EntityKind::disease, from);
  if (source == nullptr) {
    throw std::invalid_argument(std::string(to_string(kind)) + ": unknown disease '" +
                                std::string(from) + "'");
  }
  const Entity* target = resolve_target(kind, to);
  if (target == nullptr) {
    throw std::invalid_argument(std::string(to_string(kind)) + ": unknown target '" +
                                std::string(to) + "'");
  }
  upsert_relationship(kind, source->id, target->id);
}

const Entity* KnowledgeGraph::resolve_target(RelationKind kind, std::string_view name) const {
  for (EntityKind k : target_kinds(kind)) {
    if (const Entity* e = find(k, name)) return e;
  }
  return nullptr;
}

const Entity* KnowledgeGraph::find(EntityKind kind, std::string_view name) const {
  std::string key = to_lower_ascii(name);
  key.erase(0, key.find_first_not_of(" \t\r\n"));
  key.erase(key.find_last_not_of(" \t\r\n") + 1);
  const auto& index = by_name_[slot(kind)];
  const auto it = index.find(key);
  return it == index.end() ? nullptr : &entities_[it->second];
}

const Entity& KnowledgeGraph::entity(EntityId id) const {
  if (!contains(id)) throw std::out_of_range("no entity with id " + std::to_string(id));
  return entities_[id];
}

std::vector<EntityId> KnowledgeGraph::targets(RelationKind kind, EntityId from) const {
  const auto it = by_from_.find({kind, from});
  if (it == by_from_.end()) return {};
  return {it->second.begin(), it->second.end()};
}

std::vector<EntityId> KnowledgeGraph::sources(RelationKind kind, EntityId to) const {
  const auto it = by_to_.find({kind, to});
  if (it == by_to_.end()) return {};
  return {it->second.begin(), it->second.end()};
}

std::vector<const Entity*> KnowledgeGraph::entities(std::optional<EntityKind> kind) const {
  std::vector<const Entity*> out;
  for (const auto& e : entities_) {
    if (!kind || e.kind == *kind) out.push_back(&e);
  }
  std::sort(out.begin(), out.end(), [](const Entity* a, const Entity* b) {
    if (a->kind != b->kind) return a->kind < b->kind;
    return a->name < b->name;
  });
  return out;
}

void KnowledgeGraph::check_integrity() const {
  std::size_t indexed_from = 0;
  std::size_t indexed_to = 0;
  for (const auto& [key, set] : by_from_) indexed_from += set.size();
  for (const auto& [key, set] : by_to_) indexed_to += set.size();
  if (indexed_from != relationships_.size() || indexed_to != relationships_.size()) {
    throw std::logic_error("relationship index size mismatch");
  }
  for (const auto& r : relationships_) {
    if (!contains(r.from) || !contains(r.to)) throw std::logic_error("dangling relationship");
    const auto f = by_from_.find({r.kind, r.from});
    const auto t = by_to_.find({r.kind, r.to});
    if (f == by_from_.end() || !f->second.count(r.to) || t == by_to_.end() ||
        !t->second.count(r.from)) {
      throw std::logic_error("relationship missing from an index");
    }
  }
  for (std::size_t k = 0; k < by_name_.size(); ++k) {
    for (const auto& [name, id] : by_name_[k]) {
      if (!contains(id) || slot(entities_[id].kind) != k ||
          to_lower_ascii(entities_[id].name) != name) {
        throw std::logic_error("name index out of sync");
      }
    }
  }
}

KnowledgeGraph import_graph(std::istream& in) {
  using nlohmann::json;
  struct PendingRel {
    std::size_t line;
    RelationKind kind;
    std::string from, to;
  };
  KnowledgeGraph graph;
  std::vector<PendingRel> rels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json doc;
    try {
      doc = json::parse(line);
      const auto type = doc.at("t").get<std::string>();
      if (type == "entity") {
        const auto kind_name = doc.at("kind").get<std::string>();
        const auto kind = entity_kind_from_string(kind_name);
        if (!kind) throw ParseError(line_no, "unknown entity kind '" + kind_name + "'");
        const auto name = doc.at("name").get<std::string>();
        if (graph.find(*kind, name) != nullptr) {
          throw ParseError(line_no, "duplicate " + kind_name + " '" + name + "'");
        }
        std::map<PropertyKey, std::string> props;
        if (doc.contains("properties")) {
          for (const auto& [key, value] : doc.at("properties").items()) {
            const auto prop = property_from_string(key);
            if (!prop) throw ParseError(line_no, "unknown property '" + key + "'");
            props[*prop] = value.get<std::string>();
          }
        }
        graph.upsert_entity(*kind, name, std::move(props));
      } else if (type == "rel") {
        const auto kind_name = doc.at("kind").get<std::string>();
        const auto kind = relation_from_string(kind_name);
        if (!kind) throw ParseError(line_no, "unknown relationship kind '" + kind_name + "'");
        rels.push_back(
            {line_no, *kind, doc.at("from").get<std::string>(), doc.at("to").get<std::string>()});
      } else {
        throw ParseError(line_no, "unknown record type '" + type + "'");
      }
    } catch (const json::exception& e) {
      throw ParseError(line_no, e.what());
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, e.what());
    }
  }
  for (const auto& rel : rels) {
    try {
      graph.upsert_relationship(rel.kind, rel.from, rel.to);
    } catch (const std::invalid_argument& e) {
      throw ParseError(rel.line, e.what());
    }
  }
  return graph;
}

KnowledgeGraph load_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph file: " + path);
  return import_graph(in);
}

void export_graph(const KnowledgeGraph& graph, std::ostream& out) {
  using nlohmann::ordered_json;
  for (const Entity* e : graph.entities()) {
    ordered_json doc;
    doc["t"] = "entity";
    doc["kind"] = to_string(e->kind);
    doc["name"] = e->name;
    ordered_json props = ordered_json::object();
    for (const auto& [key, value] : e->properties) props[std::string(to_string(key))] = value;
    doc["properties"] = std::move(props);
    out << doc.dump() << '\n';
  }
  struct Row {
    RelationKind kind;
    std::string from, to;
  };
  std::vector<Row> rows;
  for (const auto& r : graph.relationships()) {
    rows.push_back({r.kind, graph.entity(r.from).name, graph.entity(r.to).name});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.kind, a.from, a.to) < std::tie(b.kind, b.from, b.to);
  });
  for (const auto& row : rows) {
    ordered_json doc;
    doc["t"] = "rel";
    doc["kind"] = to_string(row.kind);
    doc["from"] = row.from;
    doc["to"] = row.to;
    out << doc.dump() << '\n';
  }
}

KgAnswer answer(const KnowledgeGraph& graph, Intent intent, std::string_view entity_name) {
  if (intent == Intent::Unknown) {
    throw std::invalid_argument("answer: cannot answer an Unknown intent");
  }
  KgAnswer result;
  result.intent = intent;
  result.subject = std::string(entity_name);
  const Entity* disease = graph.find(EntityKind::disease, entity_name);
  if (disease == nullptr) return result;
  result.subject = disease->name;

  if (const auto prop = property_for(intent)) {
    if (const auto it = disease->properties.find(*prop);
        it != disease->properties.end() && !it->second.empty()) {
      result.items.push_back(it->second);
    }
  }
  if (const auto rel = relation_for(intent)) {
    std::vector<std::string> names;
    for (EntityId id : graph.targets(*rel, disease->id)) names.push_back(graph.entity(id).name);
    std::sort(names.begin(), names.end());
    result.items.insert(result.items.end(), names.begin(), names.end());
  }
  result.found = !result.items.empty();
  return result;
}

}  // namespace medqa
