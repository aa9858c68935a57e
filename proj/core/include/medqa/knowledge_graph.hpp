#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "medqa/intent.hpp"

namespace medqa {

enum class EntityKind { department, disease, symptom };
enum class PropertyKey { description, cause, prevent, cure_way };
enum class RelationKind { have_symptom, accompany_with, disease_prevent, disease_cause, disease_cureway };

std::string_view to_string(EntityKind kind);
std::string_view to_string(PropertyKey key);
std::string_view to_string(RelationKind kind);
std::optional<EntityKind> entity_kind_from_string(std::string_view name);
std::optional<PropertyKey> property_from_string(std::string_view name);
std::optional<RelationKind> relation_from_string(std::string_view name);

using EntityId = std::uint32_t;

struct Entity {
  EntityId id = 0;
  EntityKind kind = EntityKind::disease;
  std::string name;
  std::map<PropertyKey, std::string> properties;  // diseases only

  friend bool operator==(const Entity&, const Entity&) = default;
};

struct Relationship {
  RelationKind kind;
  EntityId from;
  EntityId to;

  friend auto operator<=>(const Relationship&, const Relationship&) = default;
};

/// In-memory property graph of departments, diseases and symptoms.
///
/// Names are unique per kind and resolved case-insensitively. Relationships are
/// typed: have_symptom is disease -> symptom, accompany_with is disease ->
/// disease, and the cause / prevent / cure-way relations point from a disease
/// to a disease or symptom. Every mutation keeps referential integrity; invalid
/// mutations throw std::invalid_argument and leave the graph untouched.
class KnowledgeGraph {
 public:
  /// Inserts or replaces properties of the (kind, name) entity; returns its id.
  EntityId upsert_entity(EntityKind kind, std::string_view name,
                         std::map<PropertyKey, std::string> properties = {});

  /// Inserting an existing (kind, from, to) triple is a no-op.
  void upsert_relationship(RelationKind kind, EntityId from, EntityId to);
  /// Resolves `from` as a disease and `to` by the relation's target kinds.
  void upsert_relationship(RelationKind kind, std::string_view from, std::string_view to);

  const Entity* find(EntityKind kind, std::string_view name) const;
  const Entity& entity(EntityId id) const;
  bool contains(EntityId id) const { return id < entities_.size(); }

  std::vector<EntityId> targets(RelationKind kind, EntityId from) const;
  std::vector<EntityId> sources(RelationKind kind, EntityId to) const;

  std::size_t entity_count() const { return entities_.size(); }
  std::size_t relationship_count() const { return relationships_.size(); }

  /// Sorted by kind, then name.
  std::vector<const Entity*> entities(std::optional<EntityKind> kind = std::nullopt) const;
  const std::set<Relationship>& relationships() const { return relationships_; }

  /// Resolves the target of a name-keyed relation per the typing rules.
  const Entity* resolve_target(RelationKind kind, std::string_view name) const;

  /// Throws std::logic_error if an index disagrees with the relationship set.
  void check_integrity() const;

 private:
  using IndexKey = std::pair<RelationKind, EntityId>;

  std::vector<Entity> entities_;
  std::array<std::unordered_map<std::string, EntityId>, 3> by_name_;
  std::set<Relationship> relationships_;
  std::map<IndexKey, std::set<EntityId>> by_from_;
  std::map<IndexKey, std::set<EntityId>> by_to_;
};

/// Reads the JSON-lines exchange format. Entities load before relationships,
/// whatever their line order. Errors (as ParseError) carry the line number.
KnowledgeGraph import_graph(std::istream& in);
KnowledgeGraph load_graph_file(const std::string& path);

/// Deterministic export: entities by kind then name, relationships by kind,
/// from, to.
void export_graph(const KnowledgeGraph& graph, std::ostream& out);

struct KgAnswer {
  bool found = false;
  Intent intent = Intent::Unknown;
  std::string subject;
  std::vector<std::string> items;
};

/// Looks up `entity_name` as a disease and returns the payload for `intent`.
/// Throws std::invalid_argument for Intent::Unknown.
KgAnswer answer(const KnowledgeGraph& graph, Intent intent, std::string_view entity_name);

}  // namespace medqa
