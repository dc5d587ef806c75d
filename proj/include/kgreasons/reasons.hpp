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
#include <cctype>
#include <charconv>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kgreasons/error.hpp"
#include "kgreasons/graph.hpp"
#include "kgreasons/paths.hpp"

namespace kgr {

enum class Polarity { in_favor, against };

/// Reasoning schemes for reasons against. `none` tags reasons for.
enum class Scheme { none, s1, s2, s3, s4, s5 };

inline std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::none: return "none";
    case Scheme::s1: return "s1";
    case Scheme::s2: return "s2";
    case Scheme::s3: return "s3";
    case Scheme::s4: return "s4";
    case Scheme::s5: return "s5";
  }
  return "none";
}

/// Accepts `s1`..`s5` (case-insensitive). S2 parses; asking it for reasons throws.
inline Scheme parse_scheme(std::string_view name) {
  std::string lower(name);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "s1") return Scheme::s1;
  if (lower == "s2") return Scheme::s2;
  if (lower == "s3") return Scheme::s3;
  if (lower == "s4") return Scheme::s4;
  if (lower == "s5") return Scheme::s5;
  throw DomainError("unknown scheme '" + std::string(name) + "' (expected s1|s3|s4|s5)");
}

enum class ObjectiveDirection { maximize, minimize };

/// Static objective: each item's value is the tail of its single `attribute`
/// edge that appears in `values`.
struct ObjectiveSpec {
  RelationId attribute;
  std::map<EntityId, double> values;
  ObjectiveDirection direction = ObjectiveDirection::maximize;

  bool better(double a, double b) const {
    return direction == ObjectiveDirection::maximize ? a > b : a < b;
  }
};

struct AttributeValue {
  EntityId value;
  double score = 0.0;
};

/// How an item compares with a favored alternative under an objective (S5).
struct Shortfall {
  RelationId attribute;
  AttributeValue item;
  AttributeValue alternative;
  ObjectiveDirection direction = ObjectiveDirection::maximize;
};

struct Reason {
  ReasonKey key;
  std::vector<PathInstance> witnesses;
  Polarity polarity = Polarity::in_favor;
  Scheme scheme = Scheme::none;
  EntityId item;
  EntityId user;
  // Alternatives the reason speaks for; empty for reasons for.
  std::vector<EntityId> favored;
  std::optional<Shortfall> shortfall;
};

inline constexpr std::size_t kDefaultTrim = 3;

namespace detail {

inline void require_paths(std::span<const PathType> paths) {
  if (paths.empty()) throw DomainError("permissible path set is empty");
}

inline std::vector<EntityId> alternatives_of(EntityId item, std::span<const EntityId> items) {
  if (std::find(items.begin(), items.end(), item) == items.end()) {
    throw DomainError("item " + std::to_string(item.value) + " is not in the recommendation list");
  }
  std::vector<EntityId> out;
  for (EntityId i : items) {
    if (i != item && std::find(out.begin(), out.end(), i) == out.end()) out.push_back(i);
  }
  return out;
}

}  // namespace detail

/// Union over `paths` of the simple paths user -> item, grouped by ReasonKey
/// and ordered by key.
inline std::vector<Reason> reasons_for(const KnowledgeGraph& g, EntityId item, EntityId user,
                                       std::span<const PathType> paths) {
  detail::require_paths(paths);
  std::map<ReasonKey, std::vector<PathInstance>> grouped;
  for (const PathType& type : paths) {
    for (auto& p : find_paths(g, type, user, item)) {
      grouped[reason_key_of(p)].push_back(std::move(p));
    }
  }
  std::vector<Reason> out;
  out.reserve(grouped.size());
  for (auto& [key, witnesses] : grouped) {
    std::sort(witnesses.begin(), witnesses.end());
    out.push_back({key, std::move(witnesses), Polarity::in_favor, Scheme::none, item, user, {}, {}});
  }
  return out;
}

namespace detail {

enum class Combine { any, all };

// Reasons for the alternatives, combined by union or intersection, minus the
// keys that are reasons for `item` itself. Ordered by how many alternatives
// share the key (descending), then by key.
inline std::vector<Reason> against_by_alternatives(const KnowledgeGraph& g, EntityId item,
                                                   EntityId user, std::span<const EntityId> items,
                                                   std::span<const PathType> paths, Scheme scheme,
                                                   Combine combine) {
  require_paths(paths);
  const auto alternatives = alternatives_of(item, items);

  std::vector<ReasonKey> own;
  for (auto& r : reasons_for(g, item, user, paths)) own.push_back(std::move(r.key));

  struct Entry {
    std::vector<PathInstance> witnesses;
    std::vector<EntityId> favored;
  };
  std::map<ReasonKey, Entry> pooled;
  for (EntityId alt : alternatives) {
    for (auto& r : reasons_for(g, alt, user, paths)) {
      auto& entry = pooled[r.key];
      entry.favored.push_back(alt);
      for (auto& w : r.witnesses) entry.witnesses.push_back(std::move(w));
    }
  }

  std::vector<Reason> out;
  for (auto& [key, entry] : pooled) {
    if (combine == Combine::all && entry.favored.size() != alternatives.size()) continue;
    if (std::binary_search(own.begin(), own.end(), key)) continue;
    std::sort(entry.witnesses.begin(), entry.witnesses.end());
    out.push_back({key, std::move(entry.witnesses), Polarity::against, scheme, item, user,
                   std::move(entry.favored), {}});
  }
  std::stable_sort(out.begin(), out.end(), [](const Reason& a, const Reason& b) {
    return a.favored.size() > b.favored.size();
  });
  return out;
}

}  // namespace detail

/// S1: a reason for any competing option that is not a reason for `item`.
inline std::vector<Reason> reasons_against_s1(const KnowledgeGraph& g, EntityId item,
                                              EntityId user, std::span<const EntityId> items,
                                              std::span<const PathType> paths) {
  return detail::against_by_alternatives(g, item, user, items, paths, Scheme::s1,
                                         detail::Combine::any);
}

/// S3: the S1 set trimmed to its first `k` reasons; nullopt keeps all.
inline std::vector<Reason> reasons_against_s3(const KnowledgeGraph& g, EntityId item,
                                              EntityId user, std::span<const EntityId> items,
                                              std::span<const PathType> paths,
                                              std::optional<std::size_t> k = kDefaultTrim) {
  if (k && *k == 0) throw DomainError("S3 bound must be positive");
  auto out = detail::against_by_alternatives(g, item, user, items, paths, Scheme::s3,
                                             detail::Combine::any);
  if (k && out.size() > *k) out.erase(out.begin() + static_cast<std::ptrdiff_t>(*k), out.end());
  return out;
}

/// S4: reasons shared by every competing option and not a reason for `item`.
inline std::vector<Reason> reasons_against_s4(const KnowledgeGraph& g, EntityId item,
                                              EntityId user, std::span<const EntityId> items,
                                              std::span<const PathType> paths) {
  if (detail::alternatives_of(item, items).empty()) {
    throw DomainError("S4 needs at least two recommended items");
  }
  return detail::against_by_alternatives(g, item, user, items, paths, Scheme::s4,
                                         detail::Combine::all);
}

[[noreturn]] inline void reasons_against_s2() {
  throw UnsupportedSchemeError("scheme S2 (reason for not-A) is not supported");
}

inline AttributeValue objective_value(const KnowledgeGraph& g, const ObjectiveSpec& objective,
                                      EntityId item) {
  std::optional<AttributeValue> found;
  for (EntityId tail : g.neighbors(item, objective.attribute, Direction::forward)) {
    auto it = objective.values.find(tail);
    if (it == objective.values.end()) continue;
    if (found) {
      throw DomainError("item '" + g.label(item) + "' has more than one scored '" +
                        g.label(objective.attribute) + "' value");
    }
    found = AttributeValue{tail, it->second};
  }
  if (!found) {
    throw DomainError("item '" + g.label(item) + "' has no scored '" +
                      g.label(objective.attribute) + "' value");
  }
  return *found;
}

/// S5: one reason per alternative that strictly beats `item` on the objective,
/// best alternative first.
inline std::vector<Reason> reasons_against_s5(const KnowledgeGraph& g, EntityId item,
                                              EntityId user, std::span<const EntityId> items,
                                              const ObjectiveSpec& objective) {
  g.require(user);
  const auto alternatives = detail::alternatives_of(item, items);
  const AttributeValue own = objective_value(g, objective, item);
  const PathType attribute_step({RelationStep{objective.attribute, Direction::forward}});

  std::vector<std::pair<EntityId, AttributeValue>> better;
  for (EntityId alt : alternatives) {
    AttributeValue v = objective_value(g, objective, alt);
    if (objective.better(v.score, own.score)) better.emplace_back(alt, v);
  }
  std::sort(better.begin(), better.end(), [&](const auto& a, const auto& b) {
    if (a.second.score != b.second.score) return objective.better(a.second.score, b.second.score);
    return a.first < b.first;
  });

  std::vector<Reason> out;
  for (const auto& [alt, value] : better) {
    PathInstance witness{attribute_step, {item, own.value}};
    out.push_back({ReasonKey{attribute_step, {item}},
                   {witness},
                   Polarity::against,
                   Scheme::s5,
                   item,
                   user,
                   {alt},
                   Shortfall{objective.attribute, own, value, objective.direction}});
  }
  return out;
}

struct AgainstOptions {
  std::optional<std::size_t> k = kDefaultTrim;
  const ObjectiveSpec* objective = nullptr;
};

inline std::vector<Reason> reasons_against(Scheme scheme, const KnowledgeGraph& g, EntityId item,
                                           EntityId user, std::span<const EntityId> items,
                                           std::span<const PathType> paths,
                                           const AgainstOptions& options = {}) {
  switch (scheme) {
    case Scheme::s1: return reasons_against_s1(g, item, user, items, paths);
    case Scheme::s2: reasons_against_s2();
    case Scheme::s3: return reasons_against_s3(g, item, user, items, paths, options.k);
    case Scheme::s4: return reasons_against_s4(g, item, user, items, paths);
    case Scheme::s5:
      if (options.objective == nullptr) throw DomainError("scheme s5 needs an objective");
      return reasons_against_s5(g, item, user, items, *options.objective);
    case Scheme::none: break;
  }
  throw DomainError("scheme 'none' does not produce reasons against");
}

/// Objective file: a `direction: maximize|minimize` header followed by
/// `attribute<TAB>value label<TAB>score` lines, all naming one attribute.
inline ObjectiveSpec parse_objective(std::istream& in, const KnowledgeGraph& g) {
  std::optional<ObjectiveDirection> direction;
  std::optional<RelationId> attribute;
  std::map<EntityId, double> values;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = detail::chomp(raw);
    if (detail::is_blank(line) || line.front() == '#') continue;
    if (line.starts_with("direction:")) {
      auto value = line.substr(10);
      while (!value.empty() && value.front() == ' ') value.remove_prefix(1);
      while (!value.empty() && value.back() == ' ') value.remove_suffix(1);
      if (value == "maximize") {
        direction = ObjectiveDirection::maximize;
      } else if (value == "minimize") {
        direction = ObjectiveDirection::minimize;
      } else {
        throw ParseError(line_no, "direction must be maximize or minimize");
      }
      continue;
    }
    auto fields = detail::split(line, '\t');
    if (fields.size() != 3) throw ParseError(line_no, "expected attribute, value and score");
    auto rel = g.find_relation(fields[0]);
    if (!rel) throw ParseError(line_no, "unknown relation '" + std::string(fields[0]) + "'");
    if (attribute && *attribute != *rel) throw ParseError(line_no, "objective must use one attribute");
    attribute = *rel;
    auto value = g.find_entity(fields[1]);
    if (!value) throw ParseError(line_no, "unknown entity '" + std::string(fields[1]) + "'");
    double score = 0.0;
    auto [ptr, ec] = std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(), score);
    if (ec != std::errc{} || ptr != fields[2].data() + fields[2].size()) {
      throw ParseError(line_no, "bad score '" + std::string(fields[2]) + "'");
    }
    values[*value] = score;
  }
  if (!direction) throw ParseError(0, "objective is missing a direction header");
  if (!attribute) throw ParseError(0, "objective has no scored values");
  return {*attribute, std::move(values), *direction};
}

inline ObjectiveSpec load_objective_file(const std::filesystem::path& path,
                                         const KnowledgeGraph& g) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return parse_objective(in, g);
}

// ---------------------------------------------------------------------------
// Text rendering

struct RenderOptions {
  // How the anchor entity is named in prose; nullopt uses its label.
  std::optional<std::string> anchor_alias = "you";
};

inline std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

namespace detail {

inline std::string join_labels(const KnowledgeGraph& g, std::span<const EntityId> ids) {
  std::string out;
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (k > 0) out += k + 1 == ids.size() ? " and " : ", ";
    out += g.label(ids[k]);
  }
  return out;
}

// "you bought Laptop, which has Cutting Edge OS, which Red Phone also has"
inline std::string describe_chain(const KnowledgeGraph& g, const PathInstance& p,
                                  const std::string& endpoint, const RenderOptions& options) {
  const std::string anchor = options.anchor_alias.value_or(g.label(p.source()));
  const std::size_t l = p.type.length();
  std::string out;
  for (std::size_t k = 1; k <= l; ++k) {
    const auto& step = p.type[k - 1];
    const std::string& rel = g.label(step.relation);
    const std::string cur = k == l ? endpoint : g.label(p.entities[k]);
    const bool fwd = step.direction == Direction::forward;
    if (k == 1) {
      out += fwd ? anchor + " " + rel + " " + cur : cur + " " + rel + " " + anchor;
    } else {
      out += ", which ";
      out += fwd ? rel + " " + cur : cur + (k == l ? " also " : " ") + rel;
    }
  }
  return out;
}

}  // namespace detail

inline std::string render_reason_text(const KnowledgeGraph& g, const Reason& r,
                                      const RenderOptions& options = {}) {
  if (r.polarity == Polarity::in_favor) {
    return "Recommended because " +
           detail::describe_chain(g, r.witnesses.front(), g.label(r.item), options) + ".";
  }
  if (r.shortfall) {
    const auto& s = *r.shortfall;
    const std::string alt = detail::join_labels(g, r.favored);
    return g.label(r.item) + " serves the objective less well than " + alt + ": its " +
           g.label(s.attribute) + " is " + g.label(s.item.value) + " (" +
           format_number(s.item.score) + ") while " + alt + " has " +
           g.label(s.alternative.value) + " (" + format_number(s.alternative.score) + "), and " +
           (s.direction == ObjectiveDirection::maximize ? "higher" : "lower") + " is better.";
  }
  const std::string alts = detail::join_labels(g, r.favored);
  return "Consider " + alts + " instead of " + g.label(r.item) + ": " +
         detail::describe_chain(g, r.witnesses.front(), alts, options) + ".";
}

}  // namespace kgr
