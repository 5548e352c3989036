/**
 * Copyright 2026 The TFSL Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "tfsl/http_api.h"

#include <charconv>

#include <httplib.h>

#include "tfsl/error.h"

namespace tfsl {

namespace {

HttpResponse error_response(int status, std::string_view code, const std::string& message) {
  return {status, {{"code", std::string(code)}, {"message", message}}};
}

std::size_t parse_size(const std::map<std::string, std::string>& query, const std::string& key,
                       std::size_t fallback) {
  auto it = query.find(key);
  if (it == query.end()) return fallback;
  std::size_t value = 0;
  const auto& s = it->second;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kInvalidArgument, key + " must be a non-negative integer, got '" + s + "'");
  }
  return value;
}

nlohmann::json parse_body(const std::string& body) {
  try {
    return nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("request body is not JSON: ") + e.what());
  }
}

HttpResponse route(LoopService& service, const std::string& method, const std::string& path,
                   const std::map<std::string, std::string>& query, const std::string& body) {
  if (method == "GET" && path == "/pathologies") {
    nlohmann::json items = nlohmann::json::array();
    const ConfusionPartition partition = service.effective_partition();
    for (PathologyId p : service.pathologies()) {
      items.push_back({{"name", std::string(p.name())},
                       {"index", p.index()},
                       {"failures", partition[p].failed().size()}});
    }
    return {200, {{"pathologies", std::move(items)}}};
  }
  if (method == "GET" && path == "/failures") {
    auto it = query.find("pathology");
    if (it == query.end()) throw Error(ErrorCode::kInvalidArgument, "missing query parameter 'pathology'");
    const PathologyId p = PathologyId::parse(it->second);
    std::optional<std::size_t> page_size;
    if (query.count("page_size")) page_size = parse_size(query, "page_size", 0);
    return {200, service.list_failures(p, parse_size(query, "page", 0), page_size)};
  }
  if (method == "GET" && path.rfind("/images/", 0) == 0) {
    const std::string id = path.substr(8);
    const Image& img = service.image(id);
    return {200,
            {{"image_id", id},
             {"channels", img.channels},
             {"height", img.height},
             {"width", img.width},
             {"png_base64", base64_encode(encode_png(img))}}};
  }
  if (method == "POST" && path == "/relabels") {
    const nlohmann::json j = parse_body(body);
    if (j.is_array()) {
      std::vector<RelabelEvent> events;
      for (const auto& e : j) events.push_back(e.get<RelabelEvent>());
      nlohmann::json ids = nlohmann::json::array();
      for (auto& e : events) ids.push_back(service.submit_relabel(std::move(e)));
      return {201, {{"event_ids", std::move(ids)}}};
    }
    return {201, {{"event_id", service.submit_relabel(j.get<RelabelEvent>())}}};
  }
  if (method == "POST" && path == "/retrain") {
    const nlohmann::json j = body.empty() ? nlohmann::json::object() : parse_body(body);
    const std::string id = service.enqueue_retrain(j.get<RetrainRequest>());
    return {202, {{"job_id", id}, {"status", "queued"}}};
  }
  if (method == "GET" && path == "/jobs") {
    return {200, {{"jobs", service.jobs()}}};
  }
  if (method == "GET" && path.rfind("/jobs/", 0) == 0) {
    return {200, service.job_status(path.substr(6))};
  }
  if (method == "GET" && path == "/reports/latest") {
    return {200, service.latest_report()};
  }
  return error_response(404, "not_found", method + " " + path + " is not a known endpoint");
}

}  // namespace

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kConflict: return 409;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kConfig:
    case ErrorCode::kEmptyInput:
    case ErrorCode::kUnsatisfiableTriplet:
      return 400;
    default: return 500;
  }
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  static constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  if (i + 1 == bytes.size()) {
    const std::uint32_t v = bytes[i] << 16;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += "==";
  } else if (i + 2 == bytes.size()) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

HttpResponse handle_request(LoopService& service, const std::string& method, const std::string& path,
                            const std::map<std::string, std::string>& query, const std::string& body) {
  try {
    return route(service, method, path, query, body);
  } catch (const Error& e) {
    return error_response(http_status_for(e.code()), error_code_name(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return error_response(400, "invalid_argument", e.what());
  } catch (const std::exception& e) {
    return error_response(500, "internal", e.what());
  }
}

struct HttpServer::Impl {
  LoopService& service;
  httplib::Server server;

  explicit Impl(LoopService& s) : service(s) {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
      std::map<std::string, std::string> query;
      for (const auto& [k, v] : req.params) query.emplace(k, v);
      const HttpResponse out = handle_request(service, req.method, req.path, query, req.body);
      res.status = out.status;
      res.set_content(out.body.dump(), "application/json");
    };
    server.Get(".*", handler);
    server.Post(".*", handler);
  }
};

HttpServer::HttpServer(LoopService& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::kIo, "cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpServer::serve() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace tfsl
