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
#include <optional>
#include <string>

#include <httplib.h>

#include "kgreasons/service.hpp"

namespace kgr {

inline constexpr const char* kJson = "application/json";

/// Routes:
///   POST /recommend   GET /items   POST /choice   GET /stats   GET /health
///   GET /             demo UI from `static_dir`, or a plain-text index
inline void mount_routes(httplib::Server& server, Service& service,
                         const std::optional<std::filesystem::path>& static_dir = std::nullopt) {
  auto send = [](httplib::Response& res, const ApiResponse& api) {
    res.status = api.status;
    res.set_content(api.body, kJson);
  };
  server.Post("/recommend", [&service, send](const httplib::Request& req, httplib::Response& res) {
    send(res, service.recommend(req.body));
  });
  server.Post("/choice", [&service, send](const httplib::Request& req, httplib::Response& res) {
    send(res, service.choice(req.body));
  });
  server.Get("/stats", [&service, send](const httplib::Request&, httplib::Response& res) {
    send(res, service.stats());
  });
  server.Get("/items", [&service, send](const httplib::Request&, httplib::Response& res) {
    send(res, service.items());
  });
  server.Get("/health", [&service, send](const httplib::Request&, httplib::Response& res) {
    send(res, service.health());
  });

  if (static_dir && server.set_mount_point("/", static_dir->string())) return;
  server.Get("/", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(
        "kgreasons service\n"
        "POST /recommend  {\"anchor\", \"n\", \"scheme\", \"k\", \"verbose\"}\n"
        "POST /choice     {\"session\", \"phase\", \"item\"}\n"
        "GET  /stats\nGET  /items\nGET  /health\n",
        "text/plain");
  });
}

}  // namespace kgr
