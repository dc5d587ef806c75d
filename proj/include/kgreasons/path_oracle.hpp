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

// Brute-force reference for find_paths. Scans the raw triple list instead of
// the adjacency indices; meant for tests, not for serving.

#pragma once

#include <algorithm>
#include <vector>

#include "kgreasons/graph.hpp"
#include "kgreasons/paths.hpp"

namespace kgr {

inline std::vector<PathInstance> enumerate_paths_oracle(const KnowledgeGraph& g,
                                                        const PathType& type, EntityId from,
                                                        EntityId to) {
  g.require(from);
  g.require(to);
  if (from == to) throw DomainError("path endpoints must differ");
  for (const auto& step : type.steps()) g.require(step.relation);

  // Every l-step walk from `from`, repeats allowed.
  std::vector<std::vector<EntityId>> walks{{from}};
  for (const auto& step : type.steps()) {
    std::vector<std::vector<EntityId>> next;
    for (const auto& walk : walks) {
      for (const Triple& t : g.triples()) {
        if (t.relation != step.relation) continue;
        const bool fwd = step.direction == Direction::forward;
        if ((fwd ? t.head : t.tail) != walk.back()) continue;
        auto extended = walk;
        extended.push_back(fwd ? t.tail : t.head);
        next.push_back(std::move(extended));
      }
    }
    walks = std::move(next);
  }

  std::vector<PathInstance> out;
  for (auto& walk : walks) {
    if (walk.back() != to) continue;
    auto sorted = walk;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) continue;
    out.push_back({type, std::move(walk)});
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace kgr
