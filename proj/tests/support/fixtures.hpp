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

#include <filesystem>
#include <string>
#include <vector>

#include "kgreasons/graph.hpp"
#include "kgreasons/paths.hpp"
#include "kgreasons/reasons.hpp"

namespace kgr::test {

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(KGR_DATA_DIR) / name;
}

/// The two-phone purchase graph.
struct Phones {
  KnowledgeGraph g = load_triples_file(data_path("phones.tsv"));
  std::vector<PathType> paths = load_path_types_file(data_path("phones_paths.txt"), g);
  EntityId user = g.entity("User");
  EntityId laptop = g.entity("Laptop");
  EntityId os = g.entity("Cutting Edge OS");
  EntityId battery = g.entity("Long Duration Battery");
  EntityId red = g.entity("Red Phone");
  EntityId green = g.entity("Green Phone");
  std::vector<EntityId> items{red, green};
  ObjectiveSpec objective = load_objective_file(data_path("phones_objective.tsv"), g);
};

/// The course/topic graph queried from "Stochastic Resonance".
struct Courses {
  KnowledgeGraph g = load_triples_file(data_path("courses.tsv"));
  std::vector<PathType> paths = load_path_types_file(data_path("courses_paths.txt"), g);
  EntityId query = g.entity("Stochastic Resonance");
  EntityId sensorial = g.entity("Sensorial System");
  EntityId robotic = g.entity("Robotic Sensing");
  EntityId auditive = g.entity("Auditive System");
  EntityId pme3430 = g.entity("PME3430");
  EntityId pme3479 = g.entity("PME3479");
  std::vector<EntityId> items{pme3430, pme3479};
};

}  // namespace kgr::test
