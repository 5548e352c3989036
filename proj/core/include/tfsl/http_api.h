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
#ifndef TFSL_HTTP_API_H_
#define TFSL_HTTP_API_H_

#include <map>
#include <memory>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "tfsl/error.h"
#include "tfsl/loop_service.h"

namespace tfsl {

struct HttpResponse {
  int status = 200;
  nlohmann::json body;
};

// Routes one request against the service. Errors come back as
// {"code", "message"} with a 4xx/5xx status; nothing throws.
HttpResponse handle_request(LoopService& service, const std::string& method, const std::string& path,
                            const std::map<std::string, std::string>& query, const std::string& body);

int http_status_for(ErrorCode code);

std::string base64_encode(std::span<const std::uint8_t> bytes);

class HttpServer {
 public:
  explicit HttpServer(LoopService& service);
  ~HttpServer();

  // Port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  // Blocks until stop() is called.
  void serve();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tfsl

#endif  // TFSL_HTTP_API_H_
