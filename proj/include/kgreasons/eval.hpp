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
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kgreasons/error.hpp"
#include "kgreasons/graph.hpp"
#include "kgreasons/paths.hpp"
#include "kgreasons/reasons.hpp"
#include "kgreasons/transe.hpp"

namespace kgr {

enum class ExplanationType { reason_for, against_s1, against_s3, against_s4, against_s5 };

inline std::string_view display_name(ExplanationType t) {
  switch (t) {
    case ExplanationType::reason_for: return "Reason For";
    case ExplanationType::against_s1: return "Reason Against (S1)";
    case ExplanationType::against_s3: return "Reason Against (S3)";
    case ExplanationType::against_s4: return "Reason Against (S4)";
    case ExplanationType::against_s5: return "Reason Against (S5)";
  }
  return "";
}

inline std::string_view csv_name(ExplanationType t) {
  switch (t) {
    case ExplanationType::reason_for: return "for";
    case ExplanationType::against_s1: return "s1";
    case ExplanationType::against_s3: return "s3";
    case ExplanationType::against_s4: return "s4";
    case ExplanationType::against_s5: return "s5";
  }
  return "";
}

inline ExplanationType explanation_type(Scheme s) {
  switch (s) {
    case Scheme::s1: return ExplanationType::against_s1;
    case Scheme::s3: return ExplanationType::against_s3;
    case Scheme::s4: return ExplanationType::against_s4;
    case Scheme::s5: return ExplanationType::against_s5;
    case Scheme::s2: throw UnsupportedSchemeError("scheme S2 is not supported");
    case Scheme::none: break;
  }
  return ExplanationType::reason_for;
}

struct ItemExplanations {
  std::vector<Reason> reasons_for;
  std::map<Scheme, std::vector<Reason>> against;
};

struct Interaction {
  EntityId user;
  RecommendationList recommendations;
  std::map<EntityId, ItemExplanations> per_item;

  /// Number of reasons of `type` found for `item`; nullopt when that type was not computed.
  std::optional<std::size_t> reason_count(EntityId item, ExplanationType type) const {
    const auto& ex = per_item.at(item);
    if (type == ExplanationType::reason_for) return ex.reasons_for.size();
    for (const auto& [scheme, reasons] : ex.against) {
      if (explanation_type(scheme) == type) return reasons.size();
    }
    return std::nullopt;
  }
};

struct SimulationConfig {
  RelationId rec_relation;
  std::vector<EntityId> candidates;
  // Anchors that may be sampled; drawn without replacement.
  std::vector<EntityId> eligible_users;
  std::size_t cases = 100;
  std::size_t n = 4;
  std::vector<Scheme> schemes{Scheme::s1, Scheme::s4};
  std::optional<std::size_t> k = kDefaultTrim;
  const ObjectiveSpec* objective = nullptr;
  std::uint64_t seed = 0;
};

inline Interaction explain_recommendations(const KnowledgeGraph& g,
                                           std::span<const PathType> paths,
                                           RecommendationList recs,
                                           std::span<const Scheme> schemes,
                                           const AgainstOptions& options) {
  Interaction out{recs.user, std::move(recs), {}};
  const auto& items = out.recommendations.items;
  for (EntityId item : items) {
    ItemExplanations ex;
    ex.reasons_for = reasons_for(g, item, out.user, paths);
    for (Scheme s : schemes) {
      ex.against[s] = reasons_against(s, g, item, out.user, items, paths, options);
    }
    out.per_item.emplace(item, std::move(ex));
  }
  return out;
}

/// Samples `cases` anchors, recommends top-N for each and explains every slot.
inline std::vector<Interaction> simulate_interactions(const EmbeddingModel& m,
                                                      const KnowledgeGraph& g,
                                                      std::span<const PathType> paths,
                                                      const SimulationConfig& cfg) {
  if (cfg.cases == 0) throw DomainError("cases must be positive");
  if (cfg.n == 0) throw DomainError("N must be positive");
  std::vector<EntityId> pool = cfg.eligible_users;
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  if (pool.size() < cfg.cases) {
    throw DomainError("only " + std::to_string(pool.size()) + " eligible users for " +
                      std::to_string(cfg.cases) + " cases");
  }
  std::mt19937_64 rng(cfg.seed);
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(cfg.cases);

  const AgainstOptions options{cfg.k, cfg.objective};
  std::vector<Interaction> out;
  out.reserve(cfg.cases);
  for (EntityId user : pool) {
    std::vector<EntityId> candidates;
    for (EntityId c : cfg.candidates) {
      if (c != user) candidates.push_back(c);
    }
    auto recs = recommend_top_n(m, user, cfg.rec_relation, candidates, cfg.n);
    out.push_back(explain_recommendations(g, paths, std::move(recs), cfg.schemes, options));
  }
  return out;
}

namespace detail {

inline std::vector<std::size_t> slot_counts(std::span<const Interaction> interactions,
                                            ExplanationType type) {
  std::vector<std::size_t> counts;
  for (const auto& in : interactions) {
    for (EntityId item : in.recommendations.items) {
      auto c = in.reason_count(item, type);
      if (!c) {
        throw DomainError(std::string(display_name(type)) + " was not computed for this run");
      }
      counts.push_back(*c);
    }
  }
  if (counts.empty()) throw DomainError("no recommendation slots to evaluate");
  return counts;
}

}  // namespace detail

struct SupportStats {
  double mean = 0.0;
  double stddev = 0.0;
};

/// Population mean and standard deviation of the non-zero counts.
inline SupportStats support_of_counts(std::span<const std::size_t> counts) {
  double n = 0.0, sum = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    n += 1.0;
    sum += static_cast<double>(c);
  }
  if (n == 0.0) throw UndefinedSupportError("support is undefined: no explained recommendations");
  const double mean = sum / n;
  double sq = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double d = static_cast<double>(c) - mean;
    sq += d * d;
  }
  return {mean, std::sqrt(sq / n)};
}

inline double coverage_of_counts(std::span<const std::size_t> counts) {
  if (counts.empty()) throw DomainError("no recommendation slots to evaluate");
  auto explained = std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; });
  return static_cast<double>(explained) / static_cast<double>(counts.size());
}

/// Fraction of recommendation slots with at least one reason of `type`.
inline double coverage(std::span<const Interaction> interactions, ExplanationType type) {
  return coverage_of_counts(detail::slot_counts(interactions, type));
}

/// Mean and population std of reason counts over explained slots only.
inline SupportStats support(std::span<const Interaction> interactions, ExplanationType type) {
  return support_of_counts(detail::slot_counts(interactions, type));
}

struct CoverageRow {
  ExplanationType type = ExplanationType::reason_for;
  double coverage = 0.0;
  std::optional<SupportStats> support;
  std::size_t explained = 0;
  std::size_t total = 0;
};

struct CoverageReport {
  std::vector<CoverageRow> rows;
  // Run metadata rendered as comment lines.
  std::vector<std::pair<std::string, std::string>> manifest;

  const CoverageRow* row(ExplanationType t) const {
    for (const auto& r : rows) {
      if (r.type == t) return &r;
    }
    return nullptr;
  }
};

/// One row for reasons for, then one per scheme computed in the run.
inline CoverageReport build_report(std::span<const Interaction> interactions) {
  if (interactions.empty()) throw DomainError("no interactions to report on");
  std::vector<ExplanationType> types{ExplanationType::reason_for};
  for (const auto& [item, ex] : interactions.front().per_item) {
    for (const auto& [scheme, reasons] : ex.against) types.push_back(explanation_type(scheme));
    break;
  }
  std::sort(types.begin(), types.end());

  CoverageReport report;
  for (ExplanationType t : types) {
    auto counts = detail::slot_counts(interactions, t);
    CoverageRow row;
    row.type = t;
    row.total = counts.size();
    row.explained = static_cast<std::size_t>(
        std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }));
    row.coverage = coverage_of_counts(counts);
    if (row.explained > 0) row.support = support_of_counts(counts);
    report.rows.push_back(row);
  }
  return report;
}

inline constexpr std::string_view kSupportFootnote =
    "support = mean +/- population std of reason counts over explained recommendations only";

namespace detail {

inline std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace detail

inline std::string format_support(const std::optional<SupportStats>& s) {
  if (!s) return "-";
  return detail::fixed(s->mean, 1) + " ± " + detail::fixed(s->stddev, 1);
}

/// Aligned table in the layout of the coverage/support summary.
inline void write_report_text(std::ostream& out, const CoverageReport& report) {
  for (const auto& [key, value] : report.manifest) out << "# " << key << ": " << value << '\n';
  std::size_t width = std::string_view("Explanation Type").size();
  for (const auto& r : report.rows) width = std::max(width, display_name(r.type).size());
  auto pad = [](std::string_view s, std::size_t w) {
    return std::string(s) + std::string(w > s.size() ? w - s.size() : 0, ' ');
  };
  out << pad("Explanation Type", width) << " | Coverage | Support\n";
  out << std::string(width, '-') << "-+----------+--------\n";
  for (const auto& r : report.rows) {
    std::string cov = detail::fixed(100.0 * r.coverage, 1) + "%";
    out << pad(display_name(r.type), width) << " | " << std::string(8 - std::min<std::size_t>(8, cov.size()), ' ')
        << cov << " | " << format_support(r.support) << '\n';
  }
  out << "# " << kSupportFootnote << '\n';
}

/// `type,coverage,support_mean,support_std,explained,total`; undefined support is "-".
inline void write_report_csv(std::ostream& out, const CoverageReport& report) {
  for (const auto& [key, value] : report.manifest) out << "# " << key << ": " << value << '\n';
  out << "# " << kSupportFootnote << '\n';
  out << "type,coverage,support_mean,support_std,explained,total\n";
  for (const auto& r : report.rows) {
    out << csv_name(r.type) << ',' << format_number(r.coverage) << ',';
    if (r.support) {
      out << format_number(r.support->mean) << ',' << format_number(r.support->stddev);
    } else {
      out << "-,-";
    }
    out << ',' << r.explained << ',' << r.total << '\n';
  }
}

/// 64-bit FNV-1a, hex encoded. Used to fingerprint input files in manifests.
inline std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace kgr
