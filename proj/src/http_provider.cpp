#include <httplib.h>

#include <fstream>

#include <json.hpp>

#include "sishu/embedding.hpp"
#include "sishu/error.hpp"
#include "sishu/text.hpp"

namespace sishu::embedding {

namespace {

constexpr std::size_t kTextPrefixChars = 32;

std::string cache_key(std::string_view text, Mode mode) {
  std::string framed(prefix(mode));
  framed += text;
  return hashing::sha256_hex(framed);
}

std::string leading_chars(std::string_view s, std::size_t n) {
  const auto cps = text::decode(s);
  if (cps.size() <= n) return std::string(s);
  return std::string(s.substr(0, cps[n].begin));
}

}  // namespace

HttpProvider::HttpProvider(HttpOptions opts) : opts_(std::move(opts)) {
  const auto scheme_end = opts_.endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, "endpoint needs a scheme: " + opts_.endpoint);
  }
  const auto path_start = opts_.endpoint.find('/', scheme_end + 3);
  scheme_host_port_ = opts_.endpoint.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : opts_.endpoint.substr(path_start);
  if (opts_.max_attempts < 1) opts_.max_attempts = 1;

  if (opts_.cache_path.empty()) return;
  std::ifstream in(opts_.cache_path);
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    try {
      auto row = nlohmann::json::parse(line);
      auto v = Vector::normalized(row.at("vector").get<std::vector<double>>());
      if (dim_ == 0) dim_ = v.dim();
      if (v.dim() != dim_) continue;
      cache_.insert_or_assign(row.at("key_hash").get<std::string>(), std::move(v));
    } catch (const nlohmann::json::exception&) {
      // a torn final line from an interrupted writer is skipped
    }
  }
}

std::size_t HttpProvider::dim() const {
  std::lock_guard lock(mutex_);
  return dim_;
}

Vector HttpProvider::embed(std::string_view text, Mode mode) const {
  const std::string key = cache_key(text, mode);
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  Vector v = fetch(text, mode);
  std::lock_guard lock(mutex_);
  if (dim_ == 0) dim_ = v.dim();
  if (v.dim() != dim_) {
    throw Error(ErrorCode::BadResponse, "service changed dimension from " +
                                            std::to_string(dim_) + " to " +
                                            std::to_string(v.dim()));
  }
  auto [it, inserted] = cache_.emplace(key, v);
  if (inserted) append_cache(key, text, v);
  return it->second;
}

Vector HttpProvider::fetch(std::string_view text, Mode mode) const {
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(opts_.timeout_seconds, 0);
  client.set_read_timeout(opts_.timeout_seconds, 0);
  httplib::Headers headers;
  if (!opts_.auth_token.empty()) {
    headers.emplace("Authorization", "Bearer " + opts_.auth_token);
  }
  const nlohmann::json body = {{"text", std::string(text)},
                               {"mode", mode == Mode::Passage ? "passage" : "query"}};
  const std::string payload = body.dump();

  std::string last_failure;
  for (int attempt = 0; attempt < opts_.max_attempts; ++attempt) {
    auto res = client.Post(path_, headers, payload, "application/json");
    if (!res) {
      last_failure = httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_failure = "status " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw Error(ErrorCode::BadResponse, "embedding service replied " +
                                              std::to_string(res->status));
    }
    try {
      auto reply = nlohmann::json::parse(res->body);
      auto values = reply.at("vector").get<std::vector<double>>();
      if (values.empty()) throw Error(ErrorCode::BadResponse, "empty vector");
      return Vector::normalized(std::move(values));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::BadResponse, std::string("malformed reply: ") + e.what());
    }
  }
  throw Error(ErrorCode::Transport, "embedding service unreachable after " +
                                        std::to_string(opts_.max_attempts) +
                                        " attempts: " + last_failure);
}

// Caller holds mutex_.
void HttpProvider::append_cache(const std::string& key, std::string_view text,
                                const Vector& v) const {
  if (opts_.cache_path.empty()) return;
  std::ofstream out(opts_.cache_path, std::ios::app);
  if (!out) throw Error(ErrorCode::Io, "cannot write cache " + opts_.cache_path.string());
  const nlohmann::json row = {{"key_hash", key},
                              {"text_prefix", leading_chars(text, kTextPrefixChars)},
                              {"vector", std::vector<double>(v.values().begin(), v.values().end())}};
  out << row.dump() << '\n';
}

}  // namespace sishu::embedding
