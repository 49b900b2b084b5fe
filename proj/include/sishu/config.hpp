#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sishu/corpus.hpp"
#include "sishu/graph_build.hpp"
#include "sishu/retrieval.hpp"

namespace sishu::config {

/// Effective run configuration. Layering is defaults < config file < flags <
/// environment; every output header embeds to_json() of the final value.
struct Config {
  std::string corpus_dir;
  std::string concepts_path;  // empty: built-in taxonomy
  std::string speakers_path;  // empty: built-in marker table
  std::string embedder = "hash";
  int embed_dim = 256;
  std::uint64_t embed_seed = 0;
  std::string embed_endpoint;
  std::string embed_auth_token;  // never serialized
  std::string embed_cache;
  corpus::NormalizeOptions normalize;
  graph::BuildConfig build;
  retrieval::Bm25Params bm25;
  int k_rrf = 60;
  std::string bind = "127.0.0.1:8750";
  std::vector<std::string> cors_origins = {"*"};

  nlohmann::json to_json() const;
};

/// Sets one dotted key from its text value. Throws BadInput for an unknown
/// key or a value that does not parse.
void apply(Config& cfg, std::string_view key, std::string_view value);

/// `key = value` lines; `#` starts a comment; `[section]` prefixes the keys
/// that follow with `section.`; values may be double-quoted.
void apply_file_text(Config& cfg, std::string_view text, std::string_view origin = "config");
void apply_file(Config& cfg, const std::filesystem::path& path);

/// Reads GRAPHILOSOPHY_BIND, EMBED_ENDPOINT and EMBED_AUTH_TOKEN through
/// `getenv` (injectable for tests).
void apply_env(Config& cfg,
               const std::function<std::optional<std::string>(const char*)>& getenv);
void apply_env(Config& cfg);

/// Splits "host:port"; throws BadInput.
std::pair<std::string, int> parse_bind(std::string_view bind);

}  // namespace sishu::config
