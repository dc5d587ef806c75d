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

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "kgreasons/reasons.hpp"
#include "support/fixtures.hpp"
#include "support/random_instances.hpp"
#include "support/reason_oracle.hpp"

using namespace kgr;

namespace {

std::vector<EntityId> walk(std::initializer_list<EntityId> ids) { return ids; }

}  // namespace

TEST(ReasonsFor, PhoneFixture) {
  test::Phones f;
  auto pro = reasons_for(f.g, f.red, f.user, f.paths);
  ASSERT_EQ(pro.size(), 1u);
  EXPECT_EQ(pro[0].polarity, Polarity::in_favor);
  EXPECT_EQ(pro[0].scheme, Scheme::none);
  ASSERT_EQ(pro[0].witnesses.size(), 1u);
  EXPECT_EQ(pro[0].witnesses[0].entities, walk({f.user, f.laptop, f.os, f.red}));
}

TEST(ReasonsFor, CourseFixture) {
  test::Courses f;
  auto pro = reasons_for(f.g, f.pme3430, f.query, f.paths);
  ASSERT_EQ(pro.size(), 2u);
  std::vector<EntityId> via;
  for (const auto& r : pro) via.push_back(r.key.context[2]);
  std::sort(via.begin(), via.end());
  EXPECT_EQ(via, (std::vector<EntityId>{std::min(f.robotic, f.auditive), std::max(f.robotic, f.auditive)}));
  EXPECT_EQ(reasons_for(f.g, f.pme3479, f.query, f.paths).size(), 1u);
}

TEST(ReasonsFor, EmptyAndUnmatchedPathSets) {
  test::Phones f;
  EXPECT_THROW(reasons_for(f.g, f.red, f.user, {}), DomainError);
  std::vector<PathType> nothing{PathType({{f.g.relation("type"), Direction::forward}})};
  EXPECT_TRUE(reasons_for(f.g, f.red, f.user, nothing).empty());
}

TEST(ReasonsFor, CountEqualsDistinctOracleKeys) {
  std::mt19937_64 rng(5);
  for (int round = 0; round < 300; ++round) {
    auto inst = test::random_instance(rng);
    for (EntityId item : inst.items) {
      auto pro = reasons_for(inst.graph, item, inst.user, inst.paths);
      auto keys = test::oracle_keys_for(inst.graph, inst.paths, inst.user, item);
      ASSERT_EQ(pro.size(), keys.size());
      ASSERT_EQ(test::keys_of(pro), keys);
      for (const auto& r : pro) {
        for (const auto& w : r.witnesses) ASSERT_EQ(reason_key_of(w), r.key);
      }
    }
  }
}

TEST(ReasonsAgainstS1, PhoneFixture) {
  test::Phones f;
  auto con = reasons_against_s1(f.g, f.red, f.user, f.items, f.paths);
  ASSERT_EQ(con.size(), 1u);
  EXPECT_EQ(con[0].polarity, Polarity::against);
  EXPECT_EQ(con[0].scheme, Scheme::s1);
  EXPECT_EQ(con[0].item, f.red);
  EXPECT_EQ(con[0].favored, walk({f.green}));
  EXPECT_EQ(con[0].witnesses[0].entities, walk({f.user, f.laptop, f.battery, f.green}));

  auto other = reasons_against_s1(f.g, f.green, f.user, f.items, f.paths);
  ASSERT_EQ(other.size(), 1u);
  EXPECT_EQ(other[0].key.context.back(), f.os);
}

TEST(ReasonsAgainstS1, CourseFixture) {
  test::Courses f;
  auto against_3479 = reasons_against_s1(f.g, f.pme3479, f.query, f.items, f.paths);
  ASSERT_EQ(against_3479.size(), 1u);
  EXPECT_EQ(against_3479[0].key.context, walk({f.query, f.sensorial, f.robotic}));
  EXPECT_EQ(against_3479[0].favored, walk({f.pme3430}));
  EXPECT_TRUE(reasons_against_s1(f.g, f.pme3430, f.query, f.items, f.paths).empty());
}

TEST(ReasonsAgainstS1, SingleItemAndMembership) {
  test::Phones f;
  EXPECT_TRUE(reasons_against_s1(f.g, f.red, f.user, walk({f.red}), f.paths).empty());
  EXPECT_THROW(reasons_against_s1(f.g, f.red, f.user, walk({f.green}), f.paths), DomainError);
}

TEST(ReasonsAgainstS3, Bounds) {
  test::Courses f;
  EXPECT_THROW(reasons_against_s3(f.g, f.pme3479, f.query, f.items, f.paths, 0), DomainError);
  auto one = reasons_against_s3(f.g, f.pme3479, f.query, f.items, f.paths, 1);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].scheme, Scheme::s3);
  EXPECT_EQ(one[0].key, reasons_against_s1(f.g, f.pme3479, f.query, f.items, f.paths)[0].key);
}

TEST(ReasonsAgainstS3, TrimKeepsLeadingKeysOfOracleOrder) {
  // First seeded 4-item instance whose S1 set has at least three reasons.
  std::mt19937_64 rng(31337);
  test::InstanceLimits lim;
  lim.min_items = lim.max_items = 4;
  for (int attempt = 0; attempt < 5000; ++attempt) {
    auto inst = test::random_instance(rng, lim);
    for (EntityId item : inst.items) {
      auto order = test::oracle_trim_order(inst.graph, inst.paths, inst.user, item, inst.items);
      if (order.size() < 3) continue;
      auto trimmed = reasons_against_s3(inst.graph, item, inst.user, inst.items, inst.paths, 2);
      EXPECT_EQ(test::ordered_keys(trimmed), std::vector<ReasonKey>(order.begin(), order.begin() + 2));
      return;
    }
  }
  FAIL() << "no instance with three reasons against";
}

TEST(ReasonsAgainstS4, RequiresAlternatives) {
  test::Phones f;
  EXPECT_THROW(reasons_against_s4(f.g, f.red, f.user, walk({f.red}), f.paths), DomainError);
}

TEST(ReasonsAgainstS4, TwoItemsMatchS1) {
  test::Courses f;
  auto s4 = reasons_against_s4(f.g, f.pme3479, f.query, f.items, f.paths);
  ASSERT_EQ(s4.size(), 1u);
  EXPECT_EQ(s4[0].scheme, Scheme::s4);
  EXPECT_EQ(s4[0].key.context, walk({f.query, f.sensorial, f.robotic}));

  std::mt19937_64 rng(8);
  test::InstanceLimits lim;
  lim.min_items = lim.max_items = 2;
  for (int round = 0; round < 300; ++round) {
    auto inst = test::random_instance(rng, lim);
    for (EntityId item : inst.items) {
      ASSERT_EQ(test::ordered_keys(reasons_against_s4(inst.graph, item, inst.user, inst.items, inst.paths)),
                test::ordered_keys(reasons_against_s1(inst.graph, item, inst.user, inst.items, inst.paths)));
    }
  }
}

TEST(ReasonsAgainst, PropertiesOnRandomInstances) {
  std::mt19937_64 rng(2718);
  std::size_t s1_nonempty = 0, s4_empty_when_s1_not = 0;
  for (int round = 0; round < 400; ++round) {
    auto inst = test::random_instance(rng);
    const auto& g = inst.graph;
    for (EntityId item : inst.items) {
      auto s1 = reasons_against_s1(g, item, inst.user, inst.items, inst.paths);
      auto s3 = reasons_against_s3(g, item, inst.user, inst.items, inst.paths, std::nullopt);
      auto s4 = reasons_against_s4(g, item, inst.user, inst.items, inst.paths);
      auto own = test::keys_of(reasons_for(g, item, inst.user, inst.paths));
      auto k1 = test::keys_of(s1), k4 = test::keys_of(s4);

      for (const auto& key : k1) ASSERT_FALSE(own.count(key));
      ASSERT_EQ(k1, test::oracle_s1(g, inst.paths, inst.user, item, inst.items));
      ASSERT_EQ(k4, test::oracle_s4(g, inst.paths, inst.user, item, inst.items));
      ASSERT_TRUE(std::includes(k1.begin(), k1.end(), k4.begin(), k4.end()));
      ASSERT_EQ(test::ordered_keys(s3), test::ordered_keys(s1));
      for (std::size_t k = 1; k <= 4; ++k) {
        ASSERT_EQ(reasons_against_s3(g, item, inst.user, inst.items, inst.paths, k).size(),
                  std::min(k, s1.size()));
      }
      for (const auto& r : s1) {
        ASSERT_FALSE(r.favored.empty());
        for (EntityId alt : r.favored) {
          ASSERT_TRUE(test::keys_of(reasons_for(g, alt, inst.user, inst.paths)).count(r.key));
        }
      }
      if (!s1.empty()) ++s1_nonempty;
      if (!s1.empty() && s4.empty()) ++s4_empty_when_s1_not;
    }
  }
  EXPECT_GT(s1_nonempty, 100u);
  EXPECT_GT(s4_empty_when_s1_not, 0u);
}

TEST(ReasonsAgainstS5, ShortBattery) {
  test::Phones f;
  auto con = reasons_against_s5(f.g, f.red, f.user, f.items, f.objective);
  ASSERT_EQ(con.size(), 1u);
  EXPECT_EQ(con[0].scheme, Scheme::s5);
  EXPECT_EQ(con[0].favored, walk({f.green}));
  ASSERT_TRUE(con[0].shortfall.has_value());
  EXPECT_EQ(con[0].shortfall->item.value, f.g.entity("Short Duration Battery"));
  EXPECT_EQ(con[0].shortfall->item.score, 1.0);
  EXPECT_EQ(con[0].shortfall->alternative.score, 3.0);
  EXPECT_EQ(con[0].witnesses[0].entities, walk({f.red, f.g.entity("Short Duration Battery")}));
  // Green is best: nothing against it.
  EXPECT_TRUE(reasons_against_s5(f.g, f.green, f.user, f.items, f.objective).empty());
}

TEST(ReasonsAgainstS5, TiesAndDirection) {
  test::Phones f;
  auto tie = f.objective;
  for (auto& [k, v] : tie.values) v = 2.0;
  EXPECT_TRUE(reasons_against_s5(f.g, f.red, f.user, f.items, tie).empty());
  EXPECT_TRUE(reasons_against_s5(f.g, f.green, f.user, f.items, tie).empty());

  auto minimize = f.objective;
  minimize.direction = ObjectiveDirection::minimize;
  EXPECT_TRUE(reasons_against_s5(f.g, f.red, f.user, f.items, minimize).empty());
  EXPECT_EQ(reasons_against_s5(f.g, f.green, f.user, f.items, minimize).size(), 1u);
}

TEST(ReasonsAgainstS5, MissingValueNamesItem) {
  test::Phones f;
  auto partial = f.objective;
  partial.values.erase(f.battery);
  try {
    reasons_against_s5(f.g, f.red, f.user, f.items, partial);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("Green Phone"), std::string::npos);
  }
}

TEST(ReasonsAgainstS5, Antisymmetry) {
  std::mt19937_64 rng(4242);
  for (int round = 0; round < 200; ++round) {
    GraphBuilder b;
    const std::size_t n_items = test::uniform(rng, 2, 6);
    std::vector<std::string> levels{"low", "mid", "high"};
    for (std::size_t i = 0; i < n_items; ++i) {
      b.add("item" + std::to_string(i), "grade", levels[test::uniform(rng, 0, 2)]);
    }
    b.add("u", "knows", "item0");
    auto g = std::move(b).build();
    ObjectiveSpec obj{g.relation("grade"), {}, test::uniform(rng, 0, 1) ? ObjectiveDirection::maximize
                                                                         : ObjectiveDirection::minimize};
    for (std::size_t l = 0; l < levels.size(); ++l) {
      if (auto e = g.find_entity(levels[l])) obj.values[*e] = static_cast<double>(l);
    }
    std::vector<EntityId> items;
    for (std::size_t i = 0; i < n_items; ++i) items.push_back(g.entity("item" + std::to_string(i)));
    for (EntityId a : items) {
      for (const auto& r : reasons_against_s5(g, a, g.entity("u"), items, obj)) {
        EntityId b_item = r.favored.front();
        for (const auto& back : reasons_against_s5(g, b_item, g.entity("u"), items, obj)) {
          ASSERT_NE(back.favored.front(), a);
        }
      }
    }
  }
}

TEST(ReasonsAgainstS2, AlwaysUnsupported) {
  test::Phones f;
  try {
    reasons_against(Scheme::s2, f.g, f.red, f.user, f.items, f.paths);
    FAIL();
  } catch (const UnsupportedSchemeError& e) {
    EXPECT_NE(std::string(e.what()).find("S2"), std::string::npos);
  }
  EXPECT_THROW(reasons_against_s2(), UnsupportedSchemeError);
  EXPECT_EQ(parse_scheme("S2"), Scheme::s2);
  EXPECT_THROW(parse_scheme("s9"), DomainError);
}

TEST(Objective, ParseFile) {
  test::Phones f;
  EXPECT_EQ(f.objective.direction, ObjectiveDirection::maximize);
  EXPECT_EQ(f.objective.attribute, f.g.relation("has"));
  EXPECT_EQ(f.objective.values.size(), 2u);

  std::istringstream no_direction("has\tLong Duration Battery\t3\n");
  EXPECT_THROW(parse_objective(no_direction, f.g), ParseError);
  std::istringstream bad_score("direction: minimize\nhas\tLong Duration Battery\tlots\n");
  EXPECT_THROW(parse_objective(bad_score, f.g), ParseError);
  std::istringstream two_attrs("direction: maximize\nhas\tLaptop\t1\nbought\tLaptop\t2\n");
  EXPECT_THROW(parse_objective(two_attrs, f.g), ParseError);
}

TEST(Render, ReasonForSentence) {
  test::Phones f;
  auto pro = reasons_for(f.g, f.red, f.user, f.paths);
  EXPECT_EQ(render_reason_text(f.g, pro[0]),
            "Recommended because you bought Laptop, which has Cutting Edge OS, which Red Phone also has.");
}

TEST(Render, AgainstSentences) {
  test::Phones f;
  auto s1 = reasons_against_s1(f.g, f.red, f.user, f.items, f.paths);
  const auto text = render_reason_text(f.g, s1[0]);
  EXPECT_EQ(text,
            "Consider Green Phone instead of Red Phone: you bought Laptop, which has Long Duration "
            "Battery, which Green Phone also has.");
  EXPECT_EQ(text, render_reason_text(f.g, reasons_against_s1(f.g, f.red, f.user, f.items, f.paths)[0]));

  auto s5 = reasons_against_s5(f.g, f.red, f.user, f.items, f.objective);
  EXPECT_EQ(render_reason_text(f.g, s5[0]),
            "Red Phone serves the objective less well than Green Phone: its has is Short Duration "
            "Battery (1) while Green Phone has Long Duration Battery (3), and higher is better.");
}

TEST(Render, AnchorLabelWhenNoAlias) {
  test::Courses f;
  auto pro = reasons_for(f.g, f.pme3479, f.query, f.paths);
  RenderOptions opts;
  opts.anchor_alias.reset();
  EXPECT_EQ(render_reason_text(f.g, pro[0], opts),
            "Recommended because Sensorial System broader Stochastic Resonance, which broader "
            "Auditive System, which PME3479 also subject.");
}
