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

// Recommend-and-explain service core. Transport-free: every handler takes a
// parsed JSON body and returns a status code plus a serialized payload, so
// the HTTP layer stays a thin adapter. Payloads use labels, never ids.

#pragma once

#include <array>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kgreasons/error.hpp"
#include "kgreasons/graph.hpp"
#include "kgreasons/paths.hpp"
#include "kgreasons/reasons.hpp"
#include "kgreasons/transe.hpp"

namespace kgr {

using nlohmann::json;

enum class Phase { for_only, for_and_against };

inline std::string_view to_string(Phase p) {
  return p == Phase::for_only ? "for-only" : "for-and-against";
}

inline Phase parse_phase(std::string_view text) {
  if (text == "for-only") return Phase::for_only;
  if (text == "for-and-against") return Phase::for_and_against;
  throw DomainError("phase must be 'for-only' or 'for-and-against'");
}

struct ChoiceEvent {
  std::string session;
  Phase phase = Phase::for_only;
  std::string item;
  std::string timestamp;  // UTC, ISO-8601
};

inline json to_json(const ChoiceEvent& e) {
  return json{{"session", e.session},
              {"phase", std::string(to_string(e.phase))},
              {"item", e.item},
              {"timestamp", e.timestamp}};
}

inline ChoiceEvent choice_event_from_json(const json& j) {
  if (!j.is_object()) throw DomainError("choice event must be a JSON object");
  ChoiceEvent e;
  e.session = j.at("session").get<std::string>();
  e.phase = parse_phase(j.at("phase").get<std::string>());
  e.item = j.at("item").get<std::string>();
  e.timestamp = j.value("timestamp", std::string());
  if (e.session.empty()) throw DomainError("session must be non-empty");
  if (e.item.empty()) throw DomainError("item must be non-empty");
  return e;
}

inline std::string utc_now_iso8601() {
  using namespace std::chrono;
  const auto now = system_clock::now();
  const std::time_t secs = system_clock::to_time_t(now);
  const auto millis = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                static_cast<int>(millis));
  return buf;
}

struct ChoiceStats {
  std::size_t sessions = 0;
  std::size_t completed = 0;
  std::size_t changed = 0;
  // Fraction of completed sessions whose second choice differs; nullopt with none completed.
  std::optional<double> change_rate;
};

inline std::string format_rate(const std::optional<double>& rate) {
  if (!rate) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * *rate);
  return buf;
}

/// Append-only two-phase choice log. One choice per (session, phase), and the
/// second phase only after the first. Writes are serialized.
class ChoiceLog {
 public:
  using Clock = std::function<std::string()>;

  ChoiceLog() = default;

  /// Replays `path` if it exists, then appends newline-delimited JSON to it.
  explicit ChoiceLog(const std::filesystem::path& path, Clock clock = utc_now_iso8601)
      : clock_(std::move(clock)) {
    if (std::filesystem::exists(path)) {
      std::ifstream in(path);
      replay_into(in, *this);
    }
    out_.open(path, std::ios::app);
    if (!out_) throw Error("cannot open choice log " + path.string());
  }

  void set_clock(Clock clock) { clock_ = std::move(clock); }

  ChoiceEvent record(ChoiceEvent e) {
    std::lock_guard lock(mu_);
    if (e.timestamp.empty()) e.timestamp = clock_();
    apply(e);
    if (out_.is_open()) {
      out_ << to_json(e).dump() << '\n';
      out_.flush();
    }
    return e;
  }

  ChoiceStats stats() const {
    std::lock_guard lock(mu_);
    ChoiceStats s;
    s.sessions = sessions_.size();
    for (const auto& [id, picks] : sessions_) {
      if (!picks[0] || !picks[1]) continue;
      ++s.completed;
      if (*picks[0] != *picks[1]) ++s.changed;
    }
    if (s.completed > 0) {
      s.change_rate = static_cast<double>(s.changed) / static_cast<double>(s.completed);
    }
    return s;
  }

  /// Rebuilds statistics from a raw log stream.
  static ChoiceStats replay(std::istream& in) {
    ChoiceLog log;
    replay_into(in, log);
    return log.stats();
  }

 private:
  static void replay_into(std::istream& in, ChoiceLog& log) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (detail::is_blank(line)) continue;
      try {
        log.apply(choice_event_from_json(json::parse(line)));
      } catch (const json::exception& e) {
        throw ParseError(line_no, e.what());
      }
    }
  }

  void apply(const ChoiceEvent& e) {
    auto& picks = sessions_[e.session];
    const auto slot = static_cast<std::size_t>(e.phase);
    if (picks[slot]) {
      throw ConflictError("session '" + e.session + "' already chose in phase " +
                          std::string(to_string(e.phase)));
    }
    if (e.phase == Phase::for_and_against && !picks[0]) {
      throw ConflictError("session '" + e.session + "' has no for-only choice yet");
    }
    picks[slot] = e.item;
  }

  mutable std::mutex mu_;
  std::map<std::string, std::array<std::optional<std::string>, 2>> sessions_;
  std::ofstream out_;
  Clock clock_ = utc_now_iso8601;
};

struct ServiceConfig {
  RelationId rec_relation;
  std::vector<EntityId> candidates;
  std::size_t default_n = 4;
  Scheme default_scheme = Scheme::s1;
  std::optional<std::size_t> default_k = kDefaultTrim;
  std::optional<ObjectiveSpec> objective;
  RenderOptions render;
};

struct ApiResponse {
  int status = 200;
  std::string body;
};

class Service {
 public:
  Service(KnowledgeGraph graph, EmbeddingModel model, std::vector<PathType> paths,
          ServiceConfig config, ChoiceLog& log)
      : graph_(std::move(graph)),
        model_(std::move(model)),
        paths_(std::move(paths)),
        config_(std::move(config)),
        log_(log) {
    check_compatible(model_, graph_);
    if (paths_.empty()) throw DomainError("service needs at least one path type");
    if (config_.candidates.empty()) throw DomainError("service needs candidates");
  }

  const KnowledgeGraph& graph() const noexcept { return graph_; }

  /// POST /recommend: {"anchor", "n"?, "scheme"?, "k"?, "verbose"?}
  ApiResponse recommend(const std::string& body) const {
    return guarded([&] { return recommend_json(json::parse(body)); });
  }

  /// POST /choice: {"session", "phase", "item", "timestamp"?}
  ApiResponse choice(const std::string& body) {
    return guarded([&] {
      ChoiceEvent e = choice_event_from_json(json::parse(body));
      graph_.entity(e.item);
      e = log_.record(std::move(e));
      json out = to_json(e);
      out["status"] = "recorded";
      return out;
    });
  }

  ApiResponse stats() const {
    return guarded([&] {
      ChoiceStats s = log_.stats();
      return json{{"sessions", s.sessions},
                  {"completed_sessions", s.completed},
                  {"changed", s.changed},
                  {"change_rate", s.change_rate ? json(*s.change_rate) : json(nullptr)},
                  {"change_rate_display", format_rate(s.change_rate)}};
    });
  }

  ApiResponse items() const {
    return guarded([&] {
      json labels = json::array();
      for (EntityId c : config_.candidates) labels.push_back(graph_.label(c));
      return json{{"items", labels}};
    });
  }

  ApiResponse health() const {
    return guarded([&] {
      return json{{"status", "ok"},
                  {"entities", graph_.entity_count()},
                  {"triples", graph_.triple_count()},
                  {"path_types", paths_.size()}};
    });
  }

  json recommend_json(const json& req) const {
    if (!req.is_object()) throw DomainError("request body must be a JSON object");
    const EntityId anchor = graph_.entity(req.at("anchor").get<std::string>());
    const auto n = req.value("n", config_.default_n);
    const Scheme scheme =
        req.contains("scheme") ? parse_scheme(req.at("scheme").get<std::string>())
                               : config_.default_scheme;
    std::optional<std::size_t> k = config_.default_k;
    if (req.contains("k")) {
      if (req.at("k").is_null()) {
        k.reset();
      } else {
        k = req.at("k").get<std::size_t>();
        if (*k == 0) throw DomainError("k must be positive or null");
      }
    }
    const bool verbose = req.value("verbose", false);
    if (scheme == Scheme::s2) reasons_against_s2();
    if (scheme == Scheme::s5 && !config_.objective) {
      throw DomainError("scheme s5 needs an objective configured at service start");
    }

    std::vector<EntityId> candidates;
    for (EntityId c : config_.candidates) {
      if (c != anchor) candidates.push_back(c);
    }
    const auto recs = recommend_top_n(model_, anchor, config_.rec_relation, candidates, n);
    const AgainstOptions options{k, config_.objective ? &*config_.objective : nullptr};

    json items = json::array();
    for (std::size_t idx = 0; idx < recs.items.size(); ++idx) {
      const EntityId item = recs.items[idx];
      auto pro = reasons_for(graph_, item, anchor, paths_);
      auto con = recs.items.size() < 2 && scheme == Scheme::s4
                     ? std::vector<Reason>{}
                     : reasons_against(scheme, graph_, item, anchor, recs.items, paths_, options);
      json entry{{"item", graph_.label(item)},
                 {"score", recs.scores[idx]},
                 {"reason_for", pro.empty() ? json(nullptr) : reason_json(pro.front())},
                 {"reason_against", con.empty() ? json(nullptr) : reason_json(con.front())}};
      if (verbose) {
        json all_for = json::array(), all_against = json::array();
        for (const auto& r : pro) all_for.push_back(reason_json(r));
        for (const auto& r : con) all_against.push_back(reason_json(r));
        entry["reasons_for"] = std::move(all_for);
        entry["reasons_against"] = std::move(all_against);
      }
      items.push_back(std::move(entry));
    }
    return json{{"anchor", graph_.label(anchor)},
                {"scheme", std::string(to_string(scheme))},
                {"n", n},
                {"items", std::move(items)}};
  }

  json reason_json(const Reason& r) const {
    json path = json::array();
    for (EntityId e : r.witnesses.front().entities) path.push_back(graph_.label(e));
    json out{{"text", render_reason_text(graph_, r, config_.render)},
             {"polarity", r.polarity == Polarity::in_favor ? "for" : "against"},
             {"path_type", to_string(r.key.type, graph_)},
             {"path", std::move(path)},
             {"witnesses", r.witnesses.size()}};
    if (r.polarity == Polarity::against) {
      out["scheme"] = std::string(to_string(r.scheme));
      json favored = json::array();
      for (EntityId e : r.favored) favored.push_back(graph_.label(e));
      out["favored"] = std::move(favored);
    }
    if (r.shortfall) {
      const auto& s = *r.shortfall;
      out["shortfall"] = json{{"attribute", graph_.label(s.attribute)},
                              {"item_value", graph_.label(s.item.value)},
                              {"item_score", s.item.score},
                              {"alternative_value", graph_.label(s.alternative.value)},
                              {"alternative_score", s.alternative.score},
                              {"direction", s.direction == ObjectiveDirection::maximize
                                                ? "maximize"
                                                : "minimize"}};
    }
    return out;
  }

 private:
  template <class F>
  static ApiResponse guarded(F&& f) {
    auto fail = [](int status, const char* code, const std::string& message) {
      return ApiResponse{status, json{{"error", code}, {"message", message}}.dump()};
    };
    try {
      return ApiResponse{200, f().dump()};
    } catch (const NotFoundError& e) {
      return fail(404, "not_found", e.what());
    } catch (const UnsupportedSchemeError& e) {
      return fail(400, "unsupported_scheme", e.what());
    } catch (const ConflictError& e) {
      return fail(409, "conflict", e.what());
    } catch (const json::exception& e) {
      return fail(400, "invalid_argument", e.what());
    } catch (const Error& e) {
      return fail(400, "invalid_argument", e.what());
    }
  }

  KnowledgeGraph graph_;
  EmbeddingModel model_;
  std::vector<PathType> paths_;
  ServiceConfig config_;
  ChoiceLog& log_;
};

}  // namespace kgr
