#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sishu/embedding.hpp"
#include "sishu/graph.hpp"
#include "sishu/query.hpp"

namespace httplib {
class Server;
}

namespace sishu::server {

inline constexpr int kSchemaVersion = 1;

struct Response {
  int status = 200;
  std::string body;  // UTF-8 JSON
};

/// Repeated keys keep every value in request order.
using Params = std::multimap<std::string, std::string>;

/// Transport-free request handling. Bodies are a pure function of the graph
/// and the request: sorted keys, no timestamps.
class ApiService {
 public:
  ApiService(const graph::Graph& g, const embedding::Provider* embedder,
             retrieval::Bm25Params bm25 = {}, int k_rrf = 60);

  Response get(std::string_view path, const Params& params) const;

  const query::Engine& engine() const noexcept { return engine_; }

 private:
  Response stats() const;
  Response node(std::string_view id) const;
  Response search(const Params& params) const;
  Response subgraph(const Params& params) const;
  Response concepts() const;
  Response concept_pair(const Params& params) const;

  const graph::Graph& graph_;
  query::Engine engine_;
  std::string ontology_body_;
};

/// {"error":{"code","message"},"schema_version"} with the code's status.
Response api_error(std::string_view code, std::string_view message);

/// HTTP front end over an ApiService. Requests are served concurrently; the
/// service is read-only so no request-level locking is needed.
class HttpServer {
 public:
  HttpServer(const ApiService& api, std::vector<std::string> cors_origins);
  ~HttpServer();

  /// Binds `host:port` (port 0 picks a free port) and returns the port.
  /// Throws Io when the address cannot be bound.
  int bind(const std::string& host, int port);
  /// Blocks until stop(); in-flight requests are drained first.
  void listen();
  void stop();

 private:
  std::unique_ptr<httplib::Server> svr_;
};

/// Binds, then serves until SIGINT or SIGTERM. `on_ready` receives the port.
void serve_until_signal(HttpServer& server, const std::string& host, int port,
                        const std::function<void(int)>& on_ready = {});

}  // namespace sishu::server
