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

// Rule-generated user/item/feature graphs for demos and end-to-end checks.
//
//   item_i  has_feature  feature_(i mod F)
//   user_u  likes        feature_f        (likes_per_user distinct, seeded)
//   user_u  prefers      item_i           iff user_u likes item_i's feature
//   user_u / item_i  type  User / Item

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "kgreasons/error.hpp"
#include "kgreasons/graph.hpp"
#include "kgreasons/paths.hpp"

namespace kgr {

struct SyntheticSpec {
  std::size_t users = 50;
  std::size_t items = 20;
  std::size_t features = 5;
  std::size_t likes_per_user = 1;
  std::uint64_t seed = 7;
};

namespace synthetic {

inline std::string user_label(std::size_t u) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "user_%03zu", u);
  return buf;
}
inline std::string item_label(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "item_%03zu", i);
  return buf;
}
inline std::string feature_label(std::size_t f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "feature_%03zu", f);
  return buf;
}

inline constexpr const char* kLikes = "likes";
inline constexpr const char* kHasFeature = "has_feature";
inline constexpr const char* kPrefers = "prefers";
inline constexpr const char* kType = "type";

}  // namespace synthetic

inline KnowledgeGraph make_preference_graph(const SyntheticSpec& spec) {
  if (spec.users == 0 || spec.items == 0 || spec.features == 0) {
    throw DomainError("synthetic graph needs users, items and features");
  }
  if (spec.likes_per_user == 0 || spec.likes_per_user > spec.features) {
    throw DomainError("likes_per_user must be in [1, features]");
  }
  using namespace synthetic;
  std::mt19937_64 rng(spec.seed);
  GraphBuilder b;
  for (std::size_t i = 0; i < spec.items; ++i) {
    b.add(item_label(i), kHasFeature, feature_label(i % spec.features));
    b.add(item_label(i), kType, "Item");
  }
  std::vector<std::size_t> features(spec.features);
  for (std::size_t u = 0; u < spec.users; ++u) {
    std::iota(features.begin(), features.end(), std::size_t{0});
    std::shuffle(features.begin(), features.end(), rng);
    std::vector<std::size_t> liked(features.begin(),
                                   features.begin() + static_cast<std::ptrdiff_t>(spec.likes_per_user));
    std::sort(liked.begin(), liked.end());
    b.add(user_label(u), kType, "User");
    for (std::size_t f : liked) b.add(user_label(u), kLikes, feature_label(f));
    for (std::size_t i = 0; i < spec.items; ++i) {
      if (std::binary_search(liked.begin(), liked.end(), i % spec.features)) {
        b.add(user_label(u), kPrefers, item_label(i));
      }
    }
  }
  return std::move(b).build();
}

/// Explanation paths for the synthetic graph: user -> liked feature -> item,
/// and user -> preferred item -> shared feature -> item.
inline std::vector<PathType> synthetic_path_types(const KnowledgeGraph& g) {
  return {parse_path_type("likes,has_feature^-", g),
          parse_path_type("prefers,has_feature,has_feature^-", g)};
}

struct HoldoutSplit {
  KnowledgeGraph train;
  std::vector<Triple> held_out;
};

/// Moves round(fraction * |edges of relation|) randomly chosen edges of
/// `relation` out of the graph. The training graph keeps every symbol of the
/// original in the same order, so ids carry over.
inline HoldoutSplit split_holdout(const KnowledgeGraph& g, RelationId relation, double fraction,
                                  std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw DomainError("fraction must be in [0, 1)");
  g.require(relation);
  std::vector<std::size_t> candidates;
  for (std::size_t k = 0; k < g.triple_count(); ++k) {
    if (g.triples()[k].relation == relation) candidates.push_back(k);
  }
  std::mt19937_64 rng(seed);
  std::shuffle(candidates.begin(), candidates.end(), rng);
  const auto take = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(candidates.size())));
  std::vector<char> held(g.triple_count(), 0);
  for (std::size_t k = 0; k < take; ++k) held[candidates[k]] = 1;

  GraphBuilder b;
  for (const auto& label : g.entity_labels()) b.add_entity(label);
  for (const auto& label : g.relation_labels()) b.add_relation(label);
  HoldoutSplit out;
  for (std::size_t k = 0; k < g.triple_count(); ++k) {
    const Triple& t = g.triples()[k];
    if (held[k]) {
      out.held_out.push_back(t);
    } else {
      b.add(g.label(t.head), g.label(t.relation), g.label(t.tail));
    }
  }
  out.train = std::move(b).build();
  return out;
}

}  // namespace kgr
