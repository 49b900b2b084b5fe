#include "sishu/server.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <csignal>
#include <set>
#include <thread>

#include <httplib.h>

#include "sishu/error.hpp"
#include "sishu/graph_build.hpp"
#include "sishu/ontology.hpp"

namespace sishu::server {

namespace {

using nlohmann::json;

struct ApiFailure {
  std::string code;
  std::string message;
};

[[noreturn]] void bad_request(std::string message) { throw ApiFailure{"BAD_REQUEST", std::move(message)}; }

int status_of(std::string_view code) {
  if (code == "BAD_REQUEST") return 400;
  if (code == "NOT_FOUND") return 404;
  return 503;
}

Response ok(json body) {
  body["schema_version"] = kSchemaVersion;
  return {200, body.dump()};
}

std::optional<std::string> single(const Params& params, const std::string& key) {
  const auto [lo, hi] = params.equal_range(key);
  if (lo == hi) return std::nullopt;
  if (std::next(lo) != hi) bad_request("parameter '" + key + "' given more than once");
  return lo->second;
}

std::vector<std::string> all(const Params& params, const std::string& key) {
  std::vector<std::string> out;
  const auto [lo, hi] = params.equal_range(key);
  for (auto it = lo; it != hi; ++it) out.push_back(it->second);
  return out;
}

/// Repeated parameters and comma-separated lists are equivalent.
std::vector<std::string> list(const Params& params, const std::string& key) {
  std::vector<std::string> out;
  for (const auto& v : all(params, key)) {
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = v.find(',', start);
      auto item = v.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if (!item.empty()) out.push_back(std::move(item));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  return out;
}

int integer(const Params& params, const std::string& key, int fallback, int lo, int hi) {
  const auto v = single(params, key);
  if (!v) return fallback;
  int out = 0;
  const auto* end = v->data() + v->size();
  const auto [ptr, ec] = std::from_chars(v->data(), end, out);
  if (ec != std::errc() || ptr != end || out < lo || out > hi) {
    bad_request("parameter '" + key + "' must be an integer in [" + std::to_string(lo) + ", " +
                std::to_string(hi) + "]");
  }
  return out;
}

query::Filters filters_from(const Params& params) {
  query::Filters f;
  const auto layers = list(params, "layers");
  if (!layers.empty()) {
    f.layers.emplace();
    for (const auto& name : layers) {
      const auto l = ontology::layer_from_string(name);
      if (!l) bad_request("unknown layer " + name);
      f.layers->insert(*l);
    }
  }
  const auto relations = list(params, "relations");
  if (!relations.empty()) {
    f.relations.emplace();
    for (const auto& name : relations) {
      const auto r = ontology::relation_from_string(name);
      if (!r) bad_request("unknown relation " + name);
      f.relations->insert(*r);
    }
  }
  return f;
}

std::string api_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::UnknownSeed:
    case ErrorCode::UnknownConcept: return "NOT_FOUND";
    case ErrorCode::InvalidArgument:
    case ErrorCode::BadInput: return "BAD_REQUEST";
    default: return "UNAVAILABLE";
  }
}

json search_hit(const graph::Graph& g, const std::string& id, std::optional<double> score) {
  json hit = {{"id", id}, {"score", nullptr}};
  if (score) hit["score"] = *score;
  if (const auto* n = g.find(id)) {
    hit["class"] = ontology::to_string(n->cls);
    hit["layer"] = ontology::to_string(n->layer);
    hit["text"] = graph::embedding_text(*n);
  }
  return hit;
}

}  // namespace

Response api_error(std::string_view code, std::string_view message) {
  const json body = {{"error", {{"code", code}, {"message", message}}},
                     {"schema_version", kSchemaVersion}};
  return {status_of(code), body.dump()};
}

ApiService::ApiService(const graph::Graph& g, const embedding::Provider* embedder,
                       retrieval::Bm25Params bm25, int k_rrf)
    : graph_(g), engine_(g, embedder, bm25, k_rrf) {
  json onto = json::parse(ontology::Ontology::standard().to_json());
  onto["schema_version"] = kSchemaVersion;
  ontology_body_ = onto.dump();
}

Response ApiService::get(std::string_view path, const Params& params) const {
  try {
    if (path == "/stats") return stats();
    if (path == "/ontology") return {200, ontology_body_};
    if (path == "/search") return search(params);
    if (path == "/subgraph") return subgraph(params);
    if (path == "/concepts") return concepts();
    if (path == "/concept-pair") return concept_pair(params);
    constexpr std::string_view node_prefix = "/node/";
    if (path.starts_with(node_prefix) && path.size() > node_prefix.size()) {
      return node(path.substr(node_prefix.size()));
    }
    return api_error("NOT_FOUND", "no such endpoint " + std::string(path));
  } catch (const ApiFailure& f) {
    return api_error(f.code, f.message);
  } catch (const Error& e) {
    return api_error(api_code(e.code()), e.what());
  } catch (const std::exception& e) {
    return api_error("UNAVAILABLE", e.what());
  }
}

Response ApiService::stats() const {
  if (graph_.node_count() < 2) throw ApiFailure{"UNAVAILABLE", "graph has fewer than 2 nodes"};
  return ok(graph::stats(graph_).to_json());
}

Response ApiService::node(std::string_view id) const {
  const auto idx = graph_.index_of(id);
  if (!idx) throw ApiFailure{"NOT_FOUND", "unknown node " + std::string(id)};
  json edges = json::array();
  std::set<std::string> neighbor_ids;
  for (std::size_t e : graph_.incident(*idx)) {
    const auto& edge = graph_.edges()[e];
    edges.push_back(graph::edge_payload(edge));
    neighbor_ids.insert(edge.src == id ? edge.dst : edge.src);
  }
  json neighbors = json::array();
  for (const auto& n : neighbor_ids) neighbors.push_back(graph::node_payload(*graph_.find(n)));
  return ok({{"node", graph::node_payload(graph_.nodes()[*idx])},
             {"edges", edges},
             {"neighbors", neighbors}});
}

Response ApiService::search(const Params& params) const {
  const std::string q = single(params, "q").value_or("");
  if (q.empty()) bad_request("empty query");
  const std::string mode = single(params, "mode").value_or("auto");
  const int k = integer(params, "k", 10, 1, 1000);
  const int offset = integer(params, "offset", 0, 0, 1000000);
  const int limit = integer(params, "limit", k, 0, 1000);

  std::string resolved = mode;
  std::vector<json> hits;
  auto ranked = [&](retrieval::Method m) {
    for (const auto& s : engine_.search(q, m, static_cast<std::size_t>(k)).items) {
      hits.push_back(search_hit(graph_, s.doc_id, s.score));
    }
  };
  auto exact = [&] {
    for (const auto& id : query::exact_match(graph_, q)) {
      if (hits.size() >= static_cast<std::size_t>(k)) break;
      hits.push_back(search_hit(graph_, id, std::nullopt));
    }
  };
  if (mode == "exact") {
    exact();
  } else if (mode == "auto") {
    exact();
    resolved = "exact";
    if (hits.empty()) {
      resolved = "semantic";
      ranked(retrieval::Method::Semantic);
    }
  } else if (const auto m = retrieval::method_from_string(mode)) {
    ranked(*m);
  } else {
    bad_request("unknown mode " + mode);
  }

  json results = json::array();
  for (std::size_t i = static_cast<std::size_t>(offset);
       i < hits.size() && results.size() < static_cast<std::size_t>(limit); ++i) {
    results.push_back(hits[i]);
  }
  return ok({{"query", q},
             {"mode", resolved},
             {"k", k},
             {"offset", offset},
             {"limit", limit},
             {"total", hits.size()},
             {"results", results}});
}

Response ApiService::subgraph(const Params& params) const {
  const auto seeds = all(params, "seed");
  if (seeds.empty()) bad_request("at least one seed is required");
  const int depth = integer(params, "depth", 1, 0, 6);
  const auto filters = filters_from(params);
  return ok(query::subgraph_payload(query::bfs_subgraph(graph_, seeds, depth, filters)));
}

Response ApiService::concepts() const {
  json out = json::array();
  for (const auto& n : graph_.nodes()) {
    if (n.cls == ontology::EntityClass::PHILOSOPHICAL_CONCEPT) out.push_back(graph::node_payload(n));
  }
  return ok({{"count", out.size()}, {"concepts", out}});
}

Response ApiService::concept_pair(const Params& params) const {
  const auto a = single(params, "a");
  const auto b = single(params, "b");
  if (!a || !b || a->empty() || b->empty()) bad_request("both a and b are required");
  const int depth = integer(params, "depth", 1, 0, 6);
  return ok(query::subgraph_payload(query::concept_pair_query(graph_, *a, *b, depth)));
}

HttpServer::HttpServer(const ApiService& api, std::vector<std::string> cors_origins)
    : svr_(std::make_unique<httplib::Server>()) {
  // httplib's default adds SO_REUSEPORT, which lets a second server bind a
  // port that is already serving; keep only SO_REUSEADDR.
  svr_->set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  const std::set<std::string> origins(cors_origins.begin(), cors_origins.end());
  svr_->set_post_routing_handler([origins](const httplib::Request& req, httplib::Response& res) {
    const std::string origin = req.get_header_value("Origin");
    if (origin.empty()) return;
    if (origins.contains("*")) {
      res.set_header("Access-Control-Allow-Origin", "*");
    } else if (origins.contains(origin)) {
      res.set_header("Access-Control-Allow-Origin", origin);
      res.set_header("Vary", "Origin");
    }
  });
  svr_->Options(".*", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
  svr_->Get(".*", [&api](const httplib::Request& req, httplib::Response& res) {
    const auto out = api.get(req.path, req.params);
    res.status = out.status;
    res.set_content(out.body, "application/json; charset=utf-8");
  });
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = svr_->bind_to_any_port(host);
    if (bound <= 0) throw Error(ErrorCode::Io, "cannot bind " + host);
    return bound;
  }
  if (!svr_->bind_to_port(host, port)) {
    throw Error(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpServer::listen() { svr_->listen_after_bind(); }

void HttpServer::stop() { svr_->stop(); }

namespace {
std::atomic<bool> g_stop{false};
extern "C" void on_signal(int) { g_stop.store(true); }
}  // namespace

void serve_until_signal(HttpServer& server, const std::string& host, int port,
                        const std::function<void(int)>& on_ready) {
  const int bound = server.bind(host, port);
  g_stop.store(false);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  // The handler only flips a flag; stopping the server is not signal-safe.
  std::jthread watcher([&server](std::stop_token st) {
    while (!st.stop_requested() && !g_stop.load()) {
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    server.stop();
  });
  if (on_ready) on_ready(bound);
  server.listen();
  watcher.request_stop();
}

}  // namespace sishu::server
