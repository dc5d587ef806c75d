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
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <type_traits>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kgreasons/error.hpp"
#include "kgreasons/graph.hpp"

namespace kgr {

struct TrainConfig {
  std::size_t dim = 50;
  double margin = 1.0;
  double learning_rate = 0.01;
  std::size_t epochs = 200;
  std::size_t batch_size = 32;
  std::uint64_t seed = 42;
  // Resample corrupted triples that happen to be true edges.
  bool filtered_negatives = false;

  void validate() const {
    if (dim == 0) throw DomainError("dim must be positive");
    if (!(margin > 0.0)) throw DomainError("margin must be positive");
    if (!(learning_rate > 0.0)) throw DomainError("learning_rate must be positive");
    if (batch_size == 0) throw DomainError("batch_size must be positive");
  }
};

inline void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"dim", c.dim},
                     {"margin", c.margin},
                     {"learning_rate", c.learning_rate},
                     {"epochs", c.epochs},
                     {"batch_size", c.batch_size},
                     {"seed", c.seed},
                     {"filtered_negatives", c.filtered_negatives}};
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline void from_json(const nlohmann::json& j, TrainConfig& c) {
  static const std::unordered_set<std::string> known{
      "dim", "margin", "learning_rate", "epochs", "batch_size", "seed", "filtered_negatives"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ParseError(0, "unknown train config key '" + key + "'");
  }
  c.dim = j.value("dim", c.dim);
  c.margin = j.value("margin", c.margin);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.seed = j.value("seed", c.seed);
  c.filtered_negatives = j.value("filtered_negatives", c.filtered_negatives);
}

inline TrainConfig load_train_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    TrainConfig c = nlohmann::json::parse(in).get<TrainConfig>();
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, path.string() + ": " + e.what());
  }
}

/// Entity and relation vectors, row-major. Ids match the graph it was trained on.
class EmbeddingModel {
 public:
  EmbeddingModel() = default;
  EmbeddingModel(std::size_t dim, std::vector<std::string> entity_labels,
                 std::vector<std::string> relation_labels)
      : dim_(dim),
        entity_labels_(std::move(entity_labels)),
        relation_labels_(std::move(relation_labels)),
        entities_(entity_labels_.size() * dim, 0.0),
        relations_(relation_labels_.size() * dim, 0.0) {
    if (dim == 0) throw DomainError("embedding dimension must be positive");
  }

  static EmbeddingModel for_graph(const KnowledgeGraph& g, std::size_t dim) {
    return EmbeddingModel(dim, {g.entity_labels().begin(), g.entity_labels().end()},
                          {g.relation_labels().begin(), g.relation_labels().end()});
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t entity_count() const noexcept { return entity_labels_.size(); }
  std::size_t relation_count() const noexcept { return relation_labels_.size(); }
  const std::vector<std::string>& entity_labels() const noexcept { return entity_labels_; }
  const std::vector<std::string>& relation_labels() const noexcept { return relation_labels_; }

  std::span<double> entity(EntityId e) {
    check(e.value, entity_count(), "entity");
    return {entities_.data() + std::size_t{e.value} * dim_, dim_};
  }
  std::span<const double> entity(EntityId e) const {
    check(e.value, entity_count(), "entity");
    return {entities_.data() + std::size_t{e.value} * dim_, dim_};
  }
  std::span<double> relation(RelationId r) {
    check(r.value, relation_count(), "relation");
    return {relations_.data() + std::size_t{r.value} * dim_, dim_};
  }
  std::span<const double> relation(RelationId r) const {
    check(r.value, relation_count(), "relation");
    return {relations_.data() + std::size_t{r.value} * dim_, dim_};
  }

  std::span<double> entity_data() noexcept { return entities_; }
  std::span<const double> entity_data() const noexcept { return entities_; }
  std::span<double> relation_data() noexcept { return relations_; }
  std::span<const double> relation_data() const noexcept { return relations_; }

  friend bool operator==(const EmbeddingModel&, const EmbeddingModel&) = default;

 private:
  static void check(std::uint32_t index, std::size_t count, const char* what) {
    if (index >= count) {
      throw DomainError(std::string("unregistered ") + what + " id " + std::to_string(index));
    }
  }

  std::size_t dim_ = 0;
  std::vector<std::string> entity_labels_;
  std::vector<std::string> relation_labels_;
  std::vector<double> entities_;
  std::vector<double> relations_;
};

/// Throws unless the model's symbol tables are exactly the graph's.
inline void check_compatible(const EmbeddingModel& m, const KnowledgeGraph& g) {
  auto ge = g.entity_labels();
  auto gr = g.relation_labels();
  if (!std::equal(ge.begin(), ge.end(), m.entity_labels().begin(), m.entity_labels().end()) ||
      !std::equal(gr.begin(), gr.end(), m.relation_labels().begin(), m.relation_labels().end())) {
    throw DomainError("model was not trained on this graph (symbol tables differ)");
  }
}

namespace detail {

inline double l2_norm(std::span<const double> v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

// Writes h + r - t into `out` and returns its L2 norm.
inline double translation_residual(const EmbeddingModel& m, const Triple& t,
                                   std::vector<double>& out) {
  auto h = m.entity(t.head);
  auto r = m.relation(t.relation);
  auto tail = m.entity(t.tail);
  out.resize(m.dim());
  for (std::size_t k = 0; k < m.dim(); ++k) out[k] = h[k] + r[k] - tail[k];
  return l2_norm(out);
}

inline void project_to_unit_ball(std::span<double> v) {
  double n = l2_norm(v);
  if (n > 1.0) {
    for (double& x : v) x /= n;
  }
}

}  // namespace detail

/// -||h + r - t||_2; higher is more plausible.
inline double score_triple(const EmbeddingModel& m, EntityId h, RelationId r, EntityId t) {
  auto hv = m.entity(h);
  auto rv = m.relation(r);
  auto tv = m.entity(t);
  double sum = 0.0;
  for (std::size_t k = 0; k < m.dim(); ++k) {
    double d = hv[k] + rv[k] - tv[k];
    sum += d * d;
  }
  return -std::sqrt(sum);
}

/// A positive triple and its corrupted counterpart.
struct TrainingPair {
  Triple positive;
  Triple negative;
};

/// max(0, margin + d(positive) - d(negative)).
inline double pair_loss(const EmbeddingModel& m, const TrainingPair& p, double margin) {
  return std::max(0.0, margin - score_triple(m, p.positive.head, p.positive.relation,
                                             p.positive.tail) +
                           score_triple(m, p.negative.head, p.negative.relation, p.negative.tail));
}

/// Dense gradient buffers with a record of which rows are non-zero.
class Gradient {
 public:
  explicit Gradient(const EmbeddingModel& m)
      : dim_(m.dim()),
        entities_(m.entity_count() * m.dim(), 0.0),
        relations_(m.relation_count() * m.dim(), 0.0),
        entity_seen_(m.entity_count(), 0),
        relation_seen_(m.relation_count(), 0) {}

  std::span<double> entity(EntityId e) {
    if (!entity_seen_[e.value]) {
      entity_seen_[e.value] = 1;
      touched_entities_.push_back(e);
    }
    return {entities_.data() + std::size_t{e.value} * dim_, dim_};
  }
  std::span<double> relation(RelationId r) {
    if (!relation_seen_[r.value]) {
      relation_seen_[r.value] = 1;
      touched_relations_.push_back(r);
    }
    return {relations_.data() + std::size_t{r.value} * dim_, dim_};
  }
  std::span<const double> entity(EntityId e) const {
    return {entities_.data() + std::size_t{e.value} * dim_, dim_};
  }
  std::span<const double> relation(RelationId r) const {
    return {relations_.data() + std::size_t{r.value} * dim_, dim_};
  }

  const std::vector<EntityId>& touched_entities() const { return touched_entities_; }
  const std::vector<RelationId>& touched_relations() const { return touched_relations_; }

  void clear() {
    for (EntityId e : touched_entities_) {
      std::fill_n(entities_.begin() + std::size_t{e.value} * dim_, dim_, 0.0);
      entity_seen_[e.value] = 0;
    }
    for (RelationId r : touched_relations_) {
      std::fill_n(relations_.begin() + std::size_t{r.value} * dim_, dim_, 0.0);
      relation_seen_[r.value] = 0;
    }
    touched_entities_.clear();
    touched_relations_.clear();
  }

 private:
  std::size_t dim_;
  std::vector<double> entities_;
  std::vector<double> relations_;
  std::vector<char> entity_seen_;
  std::vector<char> relation_seen_;
  std::vector<EntityId> touched_entities_;
  std::vector<RelationId> touched_relations_;
};

/// Adds d pair_loss / d params into `grad` and returns the pair's loss.
/// The gradient of ||x|| at x = 0 is taken as 0.
inline double accumulate_gradient(const EmbeddingModel& m, const TrainingPair& p, double margin,
                                  Gradient& grad) {
  std::vector<double> pos, neg;
  const double dpos = detail::translation_residual(m, p.positive, pos);
  const double dneg = detail::translation_residual(m, p.negative, neg);
  const double loss = margin + dpos - dneg;
  if (loss <= 0.0) return 0.0;

  auto apply = [&](const Triple& t, const std::vector<double>& residual, double norm, double sign) {
    if (norm == 0.0) return;
    auto gh = grad.entity(t.head);
    auto gr = grad.relation(t.relation);
    auto gt = grad.entity(t.tail);
    for (std::size_t k = 0; k < m.dim(); ++k) {
      const double u = sign * residual[k] / norm;
      gh[k] += u;
      gr[k] += u;
      gt[k] -= u;
    }
  };
  apply(p.positive, pos, dpos, 1.0);
  apply(p.negative, neg, dneg, -1.0);
  return loss;
}

/// Uniform [-6/sqrt(d), 6/sqrt(d)] draws, then unit-normalised rows.
inline EmbeddingModel initialize_transe(const KnowledgeGraph& g, std::size_t dim,
                                        std::mt19937_64& rng) {
  EmbeddingModel m = EmbeddingModel::for_graph(g, dim);
  const double bound = 6.0 / std::sqrt(static_cast<double>(dim));
  std::uniform_real_distribution<double> uniform(-bound, bound);
  auto normalize = [](std::span<double> v) {
    double n = detail::l2_norm(v);
    if (n > 0.0) {
      for (double& x : v) x /= n;
    }
  };
  for (double& x : m.relation_data()) x = uniform(rng);
  for (std::uint32_t r = 0; r < m.relation_count(); ++r) normalize(m.relation(RelationId{r}));
  for (double& x : m.entity_data()) x = uniform(rng);
  for (std::uint32_t e = 0; e < m.entity_count(); ++e) normalize(m.entity(EntityId{e}));
  return m;
}

/// Called after every epoch with the epoch index, its mean pair loss and the model.
using EpochObserver = std::function<void(std::size_t, double, const EmbeddingModel&)>;

/// Minibatch SGD on the margin ranking loss with one corrupted head or tail
/// per positive per epoch. Deterministic for a given (graph, config).
inline EmbeddingModel train_transe(const KnowledgeGraph& g, const TrainConfig& cfg,
                                   const EpochObserver& on_epoch = {}) {
  if (g.empty()) throw DomainError("cannot train on an empty graph");
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  EmbeddingModel m = initialize_transe(g, cfg.dim, rng);

  const auto triples = g.triples();
  const auto n_entities = static_cast<std::uint32_t>(g.entity_count());
  std::vector<std::size_t> order(triples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::uniform_int_distribution<std::uint32_t> pick_entity(0, n_entities - 1);
  std::bernoulli_distribution corrupt_head(0.5);
  Gradient grad(m);

  auto corrupt = [&](const Triple& t) {
    for (int attempt = 0;; ++attempt) {
      Triple c = t;
      (corrupt_head(rng) ? c.head : c.tail) = EntityId{pick_entity(rng)};
      if (!cfg.filtered_negatives || attempt >= 100 || !g.contains(c)) return c;
    }
  };

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      for (std::size_t k = begin; k < end; ++k) {
        const Triple& t = triples[order[k]];
        total += accumulate_gradient(m, {t, corrupt(t)}, cfg.margin, grad);
      }
      for (EntityId e : grad.touched_entities()) {
        auto v = m.entity(e);
        auto gv = std::as_const(grad).entity(e);
        for (std::size_t k = 0; k < v.size(); ++k) v[k] -= cfg.learning_rate * gv[k];
        detail::project_to_unit_ball(v);
      }
      for (RelationId r : grad.touched_relations()) {
        auto v = m.relation(r);
        auto gv = std::as_const(grad).relation(r);
        for (std::size_t k = 0; k < v.size(); ++k) v[k] -= cfg.learning_rate * gv[k];
      }
      grad.clear();
    }
    if (on_epoch) on_epoch(epoch, total / static_cast<double>(triples.size()), m);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Recommendation

struct RecommendationList {
  EntityId user;
  std::vector<EntityId> items;
  std::vector<double> scores;
};

/// The `n` candidates with the highest score(user, relation, candidate);
/// ties go to the smaller entity id.
inline RecommendationList recommend_top_n(const EmbeddingModel& m, EntityId user,
                                          RelationId relation,
                                          std::span<const EntityId> candidates, std::size_t n) {
  if (candidates.empty()) throw DomainError("candidate set is empty");
  if (n == 0) throw DomainError("N must be positive");
  m.entity(user);
  m.relation(relation);
  std::vector<EntityId> unique(candidates.begin(), candidates.end());
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());

  std::vector<std::pair<double, EntityId>> scored;
  scored.reserve(unique.size());
  for (EntityId c : unique) scored.emplace_back(score_triple(m, user, relation, c), c);
  const std::size_t keep = std::min(n, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                    scored.end(), [](const auto& a, const auto& b) {
                      if (a.first != b.first) return a.first > b.first;
                      return a.second < b.second;
                    });
  RecommendationList out{user, {}, {}};
  for (std::size_t k = 0; k < keep; ++k) {
    out.scores.push_back(scored[k].first);
    out.items.push_back(scored[k].second);
  }
  return out;
}

/// Entities e with an edge <e, type_relation, type_value>, sorted by id.
inline std::vector<EntityId> entities_of_type(const KnowledgeGraph& g, RelationId type_relation,
                                              EntityId type_value) {
  auto heads = g.neighbors(type_value, type_relation, Direction::inverse);
  return {heads.begin(), heads.end()};
}

/// One entity label per line; blank and '#' lines skipped.
inline std::vector<EntityId> parse_candidates(std::istream& in, const KnowledgeGraph& g) {
  std::vector<EntityId> out;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = detail::chomp(raw);
    if (detail::is_blank(line) || line.front() == '#') continue;
    auto id = g.find_entity(line);
    if (!id) throw ParseError(line_no, "unknown entity '" + std::string(line) + "'");
    if (std::find(out.begin(), out.end(), *id) == out.end()) out.push_back(*id);
  }
  return out;
}

inline std::vector<EntityId> load_candidates_file(const std::filesystem::path& path,
                                                  const KnowledgeGraph& g) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return parse_candidates(in, g);
}

// ---------------------------------------------------------------------------
// Link prediction

struct LinkPredictionMetrics {
  std::size_t count = 0;
  double mean_rank = 0.0;
  double filtered_mean_rank = 0.0;
  std::vector<std::size_t> ks;
  std::vector<double> hits;
  std::vector<double> filtered_hits;

  double hits_at(std::size_t k, bool filtered = false) const {
    auto it = std::find(ks.begin(), ks.end(), k);
    if (it == ks.end()) throw DomainError("hits@" + std::to_string(k) + " was not computed");
    return (filtered ? filtered_hits : hits)[static_cast<std::size_t>(it - ks.begin())];
  }
};

/// Tail-prediction ranks of `held_out` among all entities. Rank is one plus
/// the number of entities scoring strictly higher than the true tail; the
/// filtered rank ignores entities that form a known triple (in `g` or in
/// `held_out`).
inline LinkPredictionMetrics evaluate_link_prediction(const EmbeddingModel& m,
                                                      std::span<const Triple> held_out,
                                                      const KnowledgeGraph& g,
                                                      std::vector<std::size_t> ks = {1, 3, 10}) {
  std::unordered_set<Triple, detail::TripleHash> known(g.triples().begin(), g.triples().end());
  known.insert(held_out.begin(), held_out.end());

  LinkPredictionMetrics out;
  out.ks = std::move(ks);
  out.hits.assign(out.ks.size(), 0.0);
  out.filtered_hits.assign(out.ks.size(), 0.0);
  if (held_out.empty()) return out;

  const auto n = static_cast<std::uint32_t>(m.entity_count());
  for (const Triple& t : held_out) {
    const double target = score_triple(m, t.head, t.relation, t.tail);
    std::size_t raw = 1, filtered = 1;
    for (std::uint32_t e = 0; e < n; ++e) {
      if (EntityId{e} == t.tail) continue;
      if (score_triple(m, t.head, t.relation, EntityId{e}) <= target) continue;
      ++raw;
      if (!known.count(Triple{t.head, t.relation, EntityId{e}})) ++filtered;
    }
    out.mean_rank += static_cast<double>(raw);
    out.filtered_mean_rank += static_cast<double>(filtered);
    for (std::size_t k = 0; k < out.ks.size(); ++k) {
      if (raw <= out.ks[k]) out.hits[k] += 1.0;
      if (filtered <= out.ks[k]) out.filtered_hits[k] += 1.0;
    }
  }
  const double count = static_cast<double>(held_out.size());
  out.count = held_out.size();
  out.mean_rank /= count;
  out.filtered_mean_rank /= count;
  for (auto& h : out.hits) h /= count;
  for (auto& h : out.filtered_hits) h /= count;
  return out;
}

// ---------------------------------------------------------------------------
// Model files
//
//   kgreasons-transe 1
//   dim <d>
//   entities <n>
//   <label>\t<v_0> ... <v_{d-1}>     (n lines)
//   relations <m>
//   <label>\t<v_0> ... <v_{d-1}>     (m lines)
//
// Values use shortest round-trip formatting, so save/load is exact.

inline constexpr std::string_view kModelMagic = "kgreasons-transe 1";

inline void save_model(std::ostream& out, const EmbeddingModel& m) {
  char buf[32];
  auto write_rows = [&](const char* name, const std::vector<std::string>& labels,
                        std::span<const double> data) {
    out << name << ' ' << labels.size() << '\n';
    for (std::size_t i = 0; i < labels.size(); ++i) {
      out << labels[i] << '\t';
      for (std::size_t k = 0; k < m.dim(); ++k) {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, data[i * m.dim() + k]);
        if (k > 0) out << ' ';
        out.write(buf, ptr - buf);
      }
      out << '\n';
    }
  };
  out << kModelMagic << '\n' << "dim " << m.dim() << '\n';
  write_rows("entities", m.entity_labels(), m.entity_data());
  write_rows("relations", m.relation_labels(), m.relation_data());
}

inline EmbeddingModel load_model(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next = [&]() -> std::string_view {
    if (!std::getline(in, line)) throw ParseError(line_no, "unexpected end of model file");
    ++line_no;
    return detail::chomp(line);
  };
  auto header = [&](std::string_view name) -> std::size_t {
    auto text = next();
    if (!text.starts_with(name) || text.size() <= name.size() || text[name.size()] != ' ') {
      throw ParseError(line_no, "expected '" + std::string(name) + " <count>'");
    }
    std::size_t value = 0;
    auto digits = text.substr(name.size() + 1);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
      throw ParseError(line_no, "bad count");
    }
    return value;
  };

  if (next() != kModelMagic) throw ParseError(line_no, "not a kgreasons model file");
  const std::size_t dim = header("dim");
  if (dim == 0) throw ParseError(line_no, "dim must be positive");

  auto read_rows = [&](std::string_view name, std::vector<std::string>& labels,
                       std::vector<double>& data) {
    const std::size_t count = header(name);
    for (std::size_t i = 0; i < count; ++i) {
      auto text = next();
      auto tab = text.find('\t');
      if (tab == std::string_view::npos || tab == 0) throw ParseError(line_no, "missing label");
      labels.emplace_back(text.substr(0, tab));
      const char* p = text.data() + tab + 1;
      const char* end = text.data() + text.size();
      for (std::size_t k = 0; k < dim; ++k) {
        while (p < end && *p == ' ') ++p;
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(p, end, v);
        if (ec != std::errc{}) throw ParseError(line_no, "bad vector component");
        data.push_back(v);
        p = ptr;
      }
      while (p < end && *p == ' ') ++p;
      if (p != end) throw ParseError(line_no, "too many vector components");
    }
  };
  std::vector<std::string> entity_labels, relation_labels;
  std::vector<double> entity_data, relation_data;
  read_rows("entities", entity_labels, entity_data);
  read_rows("relations", relation_labels, relation_data);

  EmbeddingModel m(dim, std::move(entity_labels), std::move(relation_labels));
  std::copy(entity_data.begin(), entity_data.end(), m.entity_data().begin());
  std::copy(relation_data.begin(), relation_data.end(), m.relation_data().begin());
  return m;
}

inline void save_model_file(const std::filesystem::path& path, const EmbeddingModel& m) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  save_model(out, m);
}

inline EmbeddingModel load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return load_model(in);
}

}  // namespace kgr
