/*
 * Copyright 2026 The kgreasons Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "kgreasons/error.hpp"

namespace kgr {

/// Dense handle into one of the graph's symbol tables.
template <class Tag>
struct Id {
  std::uint32_t value = 0;

  friend constexpr auto operator<=>(Id, Id) = default;
};

struct EntityTag;
struct RelationTag;
using EntityId = Id<EntityTag>;
using RelationId = Id<RelationTag>;

struct Triple {
  EntityId head;
  RelationId relation;
  EntityId tail;

  friend constexpr auto operator<=>(const Triple&, const Triple&) = default;
};

enum class Direction : std::uint8_t { forward, inverse };

namespace detail {

inline std::uint64_t pack(std::uint32_t a, std::uint32_t b) {
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

struct TripleHash {
  std::size_t operator()(const Triple& t) const noexcept {
    std::uint64_t h = pack(t.head.value, t.relation.value);
    h ^= static_cast<std::uint64_t>(t.tail.value) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return std::hash<std::uint64_t>{}(h);
  }
};

}  // namespace detail

/// Label <-> id bijection; ids are assigned consecutively in first-intern order.
template <class IdT>
class SymbolTable {
 public:
  IdT intern(std::string_view label) {
    if (label.empty()) throw DomainError("empty label");
    auto [it, inserted] =
        index_.try_emplace(std::string(label), IdT{static_cast<std::uint32_t>(labels_.size())});
    if (inserted) labels_.emplace_back(label);
    return it->second;
  }

  std::optional<IdT> find(std::string_view label) const {
    auto it = index_.find(std::string(label));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  bool contains(IdT id) const noexcept { return id.value < labels_.size(); }

  const std::string& label(IdT id) const {
    if (!contains(id)) throw DomainError("unregistered id " + std::to_string(id.value));
    return labels_[id.value];
  }

  std::size_t size() const noexcept { return labels_.size(); }
  std::span<const std::string> labels() const noexcept { return labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, IdT> index_;
};

/// Immutable triple store with forward (head, relation) -> tails and
/// inverse (tail, relation) -> heads adjacency. Built by GraphBuilder.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  std::size_t entity_count() const noexcept { return entities_.size(); }
  std::size_t relation_count() const noexcept { return relations_.size(); }
  std::size_t triple_count() const noexcept { return triples_.size(); }
  bool empty() const noexcept { return triples_.empty(); }

  std::optional<EntityId> find_entity(std::string_view label) const { return entities_.find(label); }
  std::optional<RelationId> find_relation(std::string_view label) const {
    return relations_.find(label);
  }

  EntityId entity(std::string_view label) const {
    if (auto id = entities_.find(label)) return *id;
    throw NotFoundError("unknown entity '" + std::string(label) + "'");
  }

  RelationId relation(std::string_view label) const {
    if (auto id = relations_.find(label)) return *id;
    throw NotFoundError("unknown relation '" + std::string(label) + "'");
  }

  const std::string& label(EntityId id) const { return entities_.label(id); }
  const std::string& label(RelationId id) const { return relations_.label(id); }

  bool has(EntityId id) const noexcept { return entities_.contains(id); }
  bool has(RelationId id) const noexcept { return relations_.contains(id); }

  void require(EntityId id) const {
    if (!has(id)) throw DomainError("unregistered entity id " + std::to_string(id.value));
  }
  void require(RelationId id) const {
    if (!has(id)) throw DomainError("unregistered relation id " + std::to_string(id.value));
  }

  /// Triples in first-appearance order, duplicate-free.
  std::span<const Triple> triples() const noexcept { return triples_; }
  std::span<const std::string> entity_labels() const noexcept { return entities_.labels(); }
  std::span<const std::string> relation_labels() const noexcept { return relations_.labels(); }

  bool contains(EntityId head, RelationId relation, EntityId tail) const {
    require(head);
    require(relation);
    require(tail);
    auto tails = lookup(forward_, head, relation);
    return std::binary_search(tails.begin(), tails.end(), tail);
  }

  bool contains(const Triple& t) const { return contains(t.head, t.relation, t.tail); }

  /// One step along `relation` (forward) or its inverse. Result is sorted by id.
  std::span<const EntityId> neighbors(EntityId e, RelationId relation, Direction direction) const {
    require(e);
    require(relation);
    return lookup(direction == Direction::forward ? forward_ : inverse_, e, relation);
  }

 private:
  friend class GraphBuilder;
  using Index = std::unordered_map<std::uint64_t, std::vector<EntityId>>;

  static std::span<const EntityId> lookup(const Index& index, EntityId e, RelationId r) {
    auto it = index.find(detail::pack(e.value, r.value));
    if (it == index.end()) return {};
    return it->second;
  }

  SymbolTable<EntityId> entities_;
  SymbolTable<RelationId> relations_;
  std::vector<Triple> triples_;
  Index forward_;
  Index inverse_;
};

class GraphBuilder {
 public:
  EntityId add_entity(std::string_view label) { return graph_.entities_.intern(label); }
  RelationId add_relation(std::string_view label) { return graph_.relations_.intern(label); }

  /// Returns false when the triple was already present.
  bool add(std::string_view head, std::string_view relation, std::string_view tail) {
    Triple t{add_entity(head), add_relation(relation), add_entity(tail)};
    if (!seen_.insert(t).second) return false;
    graph_.triples_.push_back(t);
    return true;
  }

  KnowledgeGraph build() && {
    for (const Triple& t : graph_.triples_) {
      graph_.forward_[detail::pack(t.head.value, t.relation.value)].push_back(t.tail);
      graph_.inverse_[detail::pack(t.tail.value, t.relation.value)].push_back(t.head);
    }
    for (auto* index : {&graph_.forward_, &graph_.inverse_}) {
      for (auto& [key, ids] : *index) std::sort(ids.begin(), ids.end());
    }
    seen_.clear();
    return std::move(graph_);
  }

 private:
  KnowledgeGraph graph_;
  std::unordered_set<Triple, detail::TripleHash> seen_;
};

namespace detail {

inline std::string_view chomp(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

inline bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; });
}

inline std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = text.find(sep, start);
    out.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

/// Reads `head<TAB>relation<TAB>tail` lines. Blank lines and lines starting
/// with '#' are skipped; repeated triples collapse to one.
inline KnowledgeGraph load_triples(std::istream& in) {
  GraphBuilder builder;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = detail::chomp(raw);
    if (detail::is_blank(line) || line.front() == '#') continue;
    auto fields = detail::split(line, '\t');
    if (fields.size() != 3) {
      throw ParseError(line_no, "expected 3 tab-separated fields, found " +
                                    std::to_string(fields.size()));
    }
    for (auto f : fields) {
      if (f.empty()) throw ParseError(line_no, "empty field");
    }
    builder.add(fields[0], fields[1], fields[2]);
  }
  return std::move(builder).build();
}

inline KnowledgeGraph load_triples_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return load_triples(in);
}

inline void write_triples(std::ostream& out, const KnowledgeGraph& g) {
  for (const Triple& t : g.triples()) {
    out << g.label(t.head) << '\t' << g.label(t.relation) << '\t' << g.label(t.tail) << '\n';
  }
}

inline void write_summary(std::ostream& out, const KnowledgeGraph& g) {
  out << "entities\t" << g.entity_count() << '\n'
      << "relations\t" << g.relation_count() << '\n'
      << "triples\t" << g.triple_count() << '\n';
}

}  // namespace kgr
