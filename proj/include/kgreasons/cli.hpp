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

// Command-line front end. Kept in a header so tests can drive it in-process.

#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kgreasons/error.hpp"
#include "kgreasons/eval.hpp"
#include "kgreasons/graph.hpp"
#include "kgreasons/http.hpp"
#include "kgreasons/paths.hpp"
#include "kgreasons/reasons.hpp"
#include "kgreasons/service.hpp"
#include "kgreasons/synthetic.hpp"
#include "kgreasons/transe.hpp"

namespace kgr::cli {

enum ExitCode : int {
  kOk = 0,
  kIoError = 1,
  kParseError = 2,
  kDomainError = 3,
  kUnsupportedScheme = 4,
  kUsage = 64,
};

struct CandidateOptions {
  std::string rec_relation = "prefers";
  std::string candidates_file;
  std::string type_relation = "type";
  std::string type_value = "Item";

  void add_to(CLI::App& cmd) {
    cmd.add_option("--rec-relation", rec_relation, "relation scored by the recommender")
        ->capture_default_str();
    cmd.add_option("--candidates", candidates_file, "file with one candidate label per line");
    cmd.add_option("--type-relation", type_relation, "relation marking candidate items")
        ->capture_default_str();
    cmd.add_option("--type-value", type_value, "type entity marking candidate items")
        ->capture_default_str();
  }

  std::vector<EntityId> resolve(const KnowledgeGraph& g) const {
    std::vector<EntityId> out;
    if (!candidates_file.empty()) {
      out = load_candidates_file(candidates_file, g);
    } else {
      out = entities_of_type(g, g.relation(type_relation), g.entity(type_value));
    }
    if (out.empty()) throw DomainError("no candidate items");
    return out;
  }
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  for (auto part : kgr::detail::split(text, ',')) {
    if (!part.empty()) out.emplace_back(part);
  }
  return out;
}

inline EmbeddingModel load_model_for(const std::string& path, const KnowledgeGraph& g) {
  EmbeddingModel m = load_model_file(path);
  check_compatible(m, g);
  return m;
}

/// Runs one CLI invocation; returns the process exit status.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reasons for and against knowledge-graph recommendations"};
  app.require_subcommand(1);

  std::string graph_path, paths_path, model_path, objective_path;
  std::string scheme_name = "s1";
  std::size_t n = 4;
  std::size_t k = kDefaultTrim;
  std::uint64_t seed = 42;
  CandidateOptions cand;

  // ingest
  auto* ingest = app.add_subcommand("ingest", "validate a triple TSV and print its summary");
  std::string normalized_out;
  ingest->add_option("--graph", graph_path, "triple TSV")->required();
  ingest->add_option("--out", normalized_out, "write the deduplicated TSV here");

  // train
  auto* train = app.add_subcommand("train", "train a TransE model");
  std::string config_path;
  std::optional<std::size_t> epochs, dim, batch;
  std::optional<double> margin, lr;
  std::optional<std::uint64_t> train_seed;
  train->add_option("--graph", graph_path, "triple TSV")->required();
  train->add_option("--model", model_path, "output model file")->required();
  train->add_option("--config", config_path, "JSON train config");
  train->add_option("--seed", train_seed, "RNG seed");
  train->add_option("--epochs", epochs);
  train->add_option("--dim", dim);
  train->add_option("--margin", margin);
  train->add_option("--lr", lr);
  train->add_option("--batch-size", batch);

  // recommend
  auto* recommend = app.add_subcommand("recommend", "print top-N items for an anchor");
  std::string anchor;
  recommend->add_option("--graph", graph_path)->required();
  recommend->add_option("--model", model_path)->required();
  recommend->add_option("--anchor,--user", anchor, "user or query entity")->required();
  recommend->add_option("--n", n)->capture_default_str();
  cand.add_to(*recommend);

  // explain
  auto* explain = app.add_subcommand("explain", "print reasons for and against one item");
  std::string item;
  std::string item_list;
  explain->add_option("--graph", graph_path)->required();
  explain->add_option("--paths", paths_path, "permissible path types")->required();
  explain->add_option("--item", item)->required();
  explain->add_option("--anchor,--user", anchor)->required();
  explain->add_option("--items", item_list, "comma-separated recommendation list");
  explain->add_option("--model", model_path, "derive the list from the model when --items is absent");
  explain->add_option("--scheme", scheme_name, "s1|s3|s4|s5")->capture_default_str();
  explain->add_option("--k", k, "S3 bound")->capture_default_str();
  explain->add_option("--n", n)->capture_default_str();
  explain->add_option("--objective", objective_path, "objective file for s5");
  cand.add_to(*explain);

  // eval
  auto* eval = app.add_subcommand("eval", "coverage/support report over simulated interactions");
  std::size_t cases = 100;
  std::string schemes_text = "s1,s4";
  std::string users_type = "User";
  std::string csv_out;
  eval->add_option("--graph", graph_path)->required();
  eval->add_option("--paths", paths_path)->required();
  eval->add_option("--model", model_path)->required();
  eval->add_option("--cases", cases)->capture_default_str();
  eval->add_option("--n", n)->capture_default_str();
  eval->add_option("--seed", seed)->capture_default_str();
  eval->add_option("--schemes", schemes_text, "comma-separated")->capture_default_str();
  eval->add_option("--k", k)->capture_default_str();
  eval->add_option("--objective", objective_path);
  eval->add_option("--users-type", users_type, "type entity marking sampleable anchors")
      ->capture_default_str();
  eval->add_option("--out", csv_out, "CSV report path");
  cand.add_to(*eval);

  // serve
  auto* serve = app.add_subcommand("serve", "run the HTTP service");
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string choice_log_path = "choices.ndjson";
  std::string static_dir;
  serve->add_option("--graph", graph_path)->required();
  serve->add_option("--paths", paths_path)->required();
  serve->add_option("--model", model_path)->required();
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port)->capture_default_str();
  serve->add_option("--scheme", scheme_name)->capture_default_str();
  serve->add_option("--k", k)->capture_default_str();
  serve->add_option("--n", n)->capture_default_str();
  serve->add_option("--objective", objective_path);
  serve->add_option("--choice-log", choice_log_path)->capture_default_str();
  serve->add_option("--static-dir", static_dir, "built demo UI served at /");
  cand.add_to(*serve);

  // synth
  auto* synth = app.add_subcommand("synth", "write a rule-generated user/item/feature graph");
  SyntheticSpec spec;
  std::string synth_out, synth_paths_out;
  synth->add_option("--users", spec.users)->capture_default_str();
  synth->add_option("--items", spec.items)->capture_default_str();
  synth->add_option("--features", spec.features)->capture_default_str();
  synth->add_option("--likes", spec.likes_per_user)->capture_default_str();
  synth->add_option("--seed", spec.seed)->capture_default_str();
  synth->add_option("--out", synth_out, "triple TSV")->required();
  synth->add_option("--paths-out", synth_paths_out, "matching path-type file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  auto fail = [&](int code, std::string_view kind, const std::string& what) {
    err << "error: " << kind << ": " << what << '\n';
    return code;
  };

  try {
    if (*ingest) {
      auto g = load_triples_file(graph_path);
      write_summary(out, g);
      if (!normalized_out.empty()) {
        std::ofstream f(normalized_out);
        if (!f) throw Error("cannot write " + normalized_out);
        write_triples(f, g);
      }
      return kOk;
    }

    if (*train) {
      auto g = load_triples_file(graph_path);
      TrainConfig cfg = config_path.empty() ? TrainConfig{} : load_train_config_file(config_path);
      if (train_seed) cfg.seed = *train_seed;
      if (epochs) cfg.epochs = *epochs;
      if (dim) cfg.dim = *dim;
      if (margin) cfg.margin = *margin;
      if (lr) cfg.learning_rate = *lr;
      if (batch) cfg.batch_size = *batch;
      double last_loss = 0.0;
      auto m = train_transe(g, cfg, [&](std::size_t, double loss, const EmbeddingModel&) {
        last_loss = loss;
      });
      save_model_file(model_path, m);
      out << "trained " << cfg.epochs << " epochs, dim " << cfg.dim << ", final mean loss "
          << format_number(last_loss) << '\n';
      return kOk;
    }

    if (*recommend) {
      auto g = load_triples_file(graph_path);
      auto m = load_model_for(model_path, g);
      const EntityId a = g.entity(anchor);
      std::vector<EntityId> candidates;
      for (EntityId c : cand.resolve(g)) {
        if (c != a) candidates.push_back(c);
      }
      auto recs = recommend_top_n(m, a, g.relation(cand.rec_relation), candidates, n);
      for (std::size_t i = 0; i < recs.items.size(); ++i) {
        out << g.label(recs.items[i]) << '\t' << format_number(recs.scores[i]) << '\n';
      }
      return kOk;
    }

    if (*explain) {
      const Scheme scheme = parse_scheme(scheme_name);
      if (scheme == Scheme::s2) reasons_against_s2();
      auto g = load_triples_file(graph_path);
      auto paths = load_path_types_file(paths_path, g);
      const EntityId a = g.entity(anchor);
      const EntityId target = g.entity(item);
      std::vector<EntityId> items;
      if (!item_list.empty()) {
        for (const auto& label : split_list(item_list)) items.push_back(g.entity(label));
      } else if (!model_path.empty()) {
        auto m = load_model_for(model_path, g);
        std::vector<EntityId> candidates;
        for (EntityId c : cand.resolve(g)) {
          if (c != a) candidates.push_back(c);
        }
        items = recommend_top_n(m, a, g.relation(cand.rec_relation), candidates, n).items;
      } else {
        throw DomainError("explain needs --items or --model");
      }
      std::optional<ObjectiveSpec> objective;
      if (!objective_path.empty()) objective = load_objective_file(objective_path, g);
      AgainstOptions options{k, objective ? &*objective : nullptr};

      for (const auto& r : reasons_for(g, target, a, paths)) {
        out << "for\t" << render_reason_text(g, r) << '\n';
      }
      for (const auto& r : reasons_against(scheme, g, target, a, items, paths, options)) {
        out << "against\t" << to_string(scheme) << '\t' << render_reason_text(g, r) << '\n';
      }
      return kOk;
    }

    if (*eval) {
      std::vector<Scheme> schemes;
      for (const auto& name : split_list(schemes_text)) {
        Scheme s = parse_scheme(name);
        if (s == Scheme::s2) reasons_against_s2();
        schemes.push_back(s);
      }
      auto g = load_triples_file(graph_path);
      auto paths = load_path_types_file(paths_path, g);
      auto m = load_model_for(model_path, g);
      std::optional<ObjectiveSpec> objective;
      if (!objective_path.empty()) objective = load_objective_file(objective_path, g);

      SimulationConfig cfg;
      cfg.rec_relation = g.relation(cand.rec_relation);
      cfg.candidates = cand.resolve(g);
      cfg.eligible_users = entities_of_type(g, g.relation(cand.type_relation), g.entity(users_type));
      cfg.cases = cases;
      cfg.n = n;
      cfg.schemes = schemes;
      cfg.k = k;
      cfg.objective = objective ? &*objective : nullptr;
      cfg.seed = seed;
      auto interactions = simulate_interactions(m, g, paths, cfg);
      auto report = build_report(interactions);
      report.manifest = {
          {"seed", std::to_string(seed)},
          {"cases", std::to_string(cases)},
          {"n", std::to_string(n)},
          {"sampling", "anchors uniform without replacement among '" + users_type + "' entities"},
          {"graph_fnv1a", fnv1a_hex(read_file(graph_path))},
          {"paths_fnv1a", fnv1a_hex(read_file(paths_path))},
          {"model_fnv1a", fnv1a_hex(read_file(model_path))},
      };
      write_report_text(out, report);
      if (!csv_out.empty()) {
        std::ofstream f(csv_out);
        if (!f) throw Error("cannot write " + csv_out);
        write_report_csv(f, report);
      }
      return kOk;
    }

    if (*serve) {
      const Scheme scheme = parse_scheme(scheme_name);
      if (scheme == Scheme::s2) reasons_against_s2();
      auto g = load_triples_file(graph_path);
      auto paths = load_path_types_file(paths_path, g);
      auto m = load_model_for(model_path, g);
      ServiceConfig cfg;
      cfg.rec_relation = g.relation(cand.rec_relation);
      cfg.candidates = cand.resolve(g);
      cfg.default_n = n;
      cfg.default_scheme = scheme;
      cfg.default_k = k;
      if (!objective_path.empty()) cfg.objective = load_objective_file(objective_path, g);
      ChoiceLog log(choice_log_path);
      Service service(std::move(g), std::move(m), std::move(paths), std::move(cfg), log);
      httplib::Server server;
      std::optional<std::filesystem::path> dir;
      if (!static_dir.empty()) dir = static_dir;
      mount_routes(server, service, dir);
      out << "listening on http://" << host << ':' << port << std::endl;
      if (!server.listen(host, port)) throw Error("cannot listen on " + host + ":" + std::to_string(port));
      return kOk;
    }

    if (*synth) {
      auto g = make_preference_graph(spec);
      std::ofstream f(synth_out);
      if (!f) throw Error("cannot write " + synth_out);
      write_triples(f, g);
      if (!synth_paths_out.empty()) {
        std::ofstream p(synth_paths_out);
        if (!p) throw Error("cannot write " + synth_paths_out);
        for (const auto& type : synthetic_path_types(g)) p << to_string(type, g) << '\n';
      }
      write_summary(out, g);
      return kOk;
    }
  } catch (const ParseError& e) {
    return fail(kParseError, "parse", e.what());
  } catch (const UnsupportedSchemeError& e) {
    return fail(kUnsupportedScheme, "unsupported-scheme", e.what());
  } catch (const DomainError& e) {
    return fail(kDomainError, "domain", e.what());
  } catch (const Error& e) {
    return fail(kIoError, "io", e.what());
  }
  return kUsage;
}

}  // namespace kgr::cli
