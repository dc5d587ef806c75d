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
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kgreasons/error.hpp"
#include "kgreasons/graph.hpp"

namespace kgr {

inline constexpr std::size_t kDefaultMaxPathLength = 4;

struct RelationStep {
  RelationId relation;
  Direction direction = Direction::forward;

  RelationStep inverted() const {
    return {relation, direction == Direction::forward ? Direction::inverse : Direction::forward};
  }

  friend constexpr auto operator<=>(const RelationStep&, const RelationStep&) = default;
};

/// A non-empty sequence of relation steps, each taken forward or inverted.
class PathType {
 public:
  explicit PathType(std::vector<RelationStep> steps) : steps_(std::move(steps)) {
    if (steps_.empty()) throw DomainError("path type must have at least one step");
  }

  std::size_t length() const noexcept { return steps_.size(); }
  std::span<const RelationStep> steps() const noexcept { return steps_; }
  const RelationStep& operator[](std::size_t k) const { return steps_[k]; }

  /// The same connection read from the other end: steps reversed, each inverted.
  PathType reversed() const {
    std::vector<RelationStep> out;
    out.reserve(steps_.size());
    for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) out.push_back(it->inverted());
    return PathType(std::move(out));
  }

  friend auto operator<=>(const PathType&, const PathType&) = default;
  friend bool operator==(const PathType&, const PathType&) = default;

 private:
  std::vector<RelationStep> steps_;
};

/// Comma-separated relation labels; a `^-` suffix marks an inverse step.
inline PathType parse_path_type(std::string_view text, const KnowledgeGraph& g) {
  std::vector<RelationStep> steps;
  for (auto field : detail::split(text, ',')) {
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
    Direction dir = Direction::forward;
    if (field.size() >= 2 && field.substr(field.size() - 2) == "^-") {
      dir = Direction::inverse;
      field.remove_suffix(2);
    }
    if (field.empty()) throw ParseError(0, "empty relation in path type '" + std::string(text) + "'");
    auto rel = g.find_relation(field);
    if (!rel) throw ParseError(0, "unknown relation '" + std::string(field) + "'");
    steps.push_back({*rel, dir});
  }
  return PathType(std::move(steps));
}

inline std::string to_string(const PathType& type, const KnowledgeGraph& g) {
  std::string out;
  for (const auto& step : type.steps()) {
    if (!out.empty()) out += ',';
    out += g.label(step.relation);
    if (step.direction == Direction::inverse) out += "^-";
  }
  return out;
}

/// One path type per line; blank and '#' lines skipped. Types longer than
/// `max_length` are rejected.
inline std::vector<PathType> parse_path_types(std::istream& in, const KnowledgeGraph& g,
                                              std::size_t max_length = kDefaultMaxPathLength) {
  std::vector<PathType> out;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = detail::chomp(raw);
    if (detail::is_blank(line) || line.front() == '#') continue;
    try {
      PathType type = parse_path_type(line, g);
      if (type.length() > max_length) {
        throw ParseError(0, "path type of length " + std::to_string(type.length()) +
                                " exceeds maximum " + std::to_string(max_length));
      }
      if (std::find(out.begin(), out.end(), type) == out.end()) out.push_back(std::move(type));
    } catch (const ParseError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return out;
}

inline std::vector<PathType> load_path_types_file(const std::filesystem::path& path,
                                                  const KnowledgeGraph& g,
                                                  std::size_t max_length = kDefaultMaxPathLength) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return parse_path_types(in, g, max_length);
}

/// Concrete walk e_0..e_l realising a path type. e_0 is the anchor (user or
/// query), e_l the item.
struct PathInstance {
  PathType type;
  std::vector<EntityId> entities;

  EntityId source() const { return entities.front(); }
  EntityId target() const { return entities.back(); }

  friend auto operator<=>(const PathInstance&, const PathInstance&) = default;
  friend bool operator==(const PathInstance&, const PathInstance&) = default;
};

inline PathInstance reversed(const PathInstance& p) {
  return {p.type.reversed(), std::vector<EntityId>(p.entities.rbegin(), p.entities.rend())};
}

/// Item-independent identity of a reason: the type plus every entity but the item.
struct ReasonKey {
  PathType type;
  std::vector<EntityId> context;

  friend auto operator<=>(const ReasonKey&, const ReasonKey&) = default;
  friend bool operator==(const ReasonKey&, const ReasonKey&) = default;
};

inline ReasonKey reason_key_of(const PathInstance& p) {
  return {p.type, std::vector<EntityId>(p.entities.begin(), p.entities.end() - 1)};
}

/// Checks edge existence hop by hop and the no-repeated-entity rule.
inline bool is_valid_instance(const KnowledgeGraph& g, const PathInstance& p) {
  if (p.entities.size() != p.type.length() + 1) return false;
  for (std::size_t k = 0; k < p.type.length(); ++k) {
    const auto& step = p.type[k];
    EntityId from = p.entities[k];
    EntityId to = p.entities[k + 1];
    bool ok = step.direction == Direction::forward ? g.contains(from, step.relation, to)
                                                   : g.contains(to, step.relation, from);
    if (!ok) return false;
  }
  auto sorted = p.entities;
  std::sort(sorted.begin(), sorted.end());
  return std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
}

namespace detail {

// Depth-first expansion from `walk.back()`. Returns false when the visitor
// asks to stop.
template <class Visit>
bool extend_walk(const KnowledgeGraph& g, const PathType& type, EntityId target,
                 std::vector<EntityId>& walk, Visit& visit) {
  const std::size_t depth = walk.size() - 1;
  const auto& step = type[depth];
  const bool last = depth + 1 == type.length();
  for (EntityId next : g.neighbors(walk.back(), step.relation, step.direction)) {
    if (last) {
      if (next != target) continue;
    } else if (next == target || std::find(walk.begin(), walk.end(), next) != walk.end()) {
      continue;
    }
    walk.push_back(next);
    bool keep_going = last ? visit(walk) : extend_walk(g, type, target, walk, visit);
    walk.pop_back();
    if (!keep_going) return false;
  }
  return true;
}

inline void check_endpoints(const KnowledgeGraph& g, EntityId from, EntityId to) {
  g.require(from);
  g.require(to);
  if (from == to) throw DomainError("path endpoints must differ");
}

inline void check_type(const KnowledgeGraph& g, const PathType& type) {
  for (const auto& step : type.steps()) g.require(step.relation);
}

}  // namespace detail

/// Simple paths of `type` from `from` to `to`, ordered by entity sequence.
inline std::vector<PathInstance> find_paths(const KnowledgeGraph& g, const PathType& type,
                                            EntityId from, EntityId to) {
  detail::check_endpoints(g, from, to);
  detail::check_type(g, type);
  std::vector<PathInstance> out;
  std::vector<EntityId> walk{from};
  walk.reserve(type.length() + 1);
  auto collect = [&](const std::vector<EntityId>& w) {
    out.push_back({type, w});
    return true;
  };
  detail::extend_walk(g, type, to, walk, collect);
  // Neighbour lists are sorted, so DFS order is already lexicographic.
  return out;
}

inline bool path_holds(const KnowledgeGraph& g, const PathType& type, EntityId from, EntityId to) {
  detail::check_endpoints(g, from, to);
  detail::check_type(g, type);
  bool found = false;
  std::vector<EntityId> walk{from};
  auto stop = [&](const std::vector<EntityId>&) {
    found = true;
    return false;
  };
  detail::extend_walk(g, type, to, walk, stop);
  return found;
}

}  // namespace kgr
