#include "sishu/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sishu/error.hpp"
#include "sishu/text.hpp"

namespace sishu::config {

namespace {

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw Error(ErrorCode::BadInput,
              "bad value '" + std::string(value) + "' for key " + std::string(key));
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value);
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  bad_value(key, value);
}

std::vector<std::string> parse_list(std::string_view value) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    const std::size_t comma = value.find(',', start);
    const auto item = text::trim(value.substr(start, comma - start));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string_view unquote(std::string_view v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  return v;
}

}  // namespace

nlohmann::json Config::to_json() const {
  // Build keys stay at the top level so a graph header is self-describing
  // for readers that only know BuildConfig.
  nlohmann::json out = build.to_json();
  out["corpus"] = corpus_dir;
  out["concepts"] = concepts_path;
  out["speakers"] = speakers_path;
  out["embedder"] = embedder;
  out["embed"] = {{"dim", embed_dim}, {"seed", embed_seed}, {"endpoint", embed_endpoint},
                  {"cache", embed_cache}};
  out["normalize"] = {{"drop_line_patterns", normalize.drop_line_patterns}};
  out["bm25"] = {{"k1", bm25.k1}, {"b", bm25.b}};
  out["rrf"] = {{"k", k_rrf}};
  out["server"] = {{"bind", bind}, {"cors_origins", cors_origins}};
  return out;
}

void apply(Config& cfg, std::string_view key, std::string_view value) {
  auto dbl = [&] { return parse_number<double>(key, value); };
  auto num = [&] { return parse_number<int>(key, value); };
  auto& b = cfg.build;
  if (key == "corpus") cfg.corpus_dir = value;
  else if (key == "concepts") cfg.concepts_path = value;
  else if (key == "speakers") cfg.speakers_path = value;
  else if (key == "embedder") cfg.embedder = value;
  else if (key == "embed.dim") cfg.embed_dim = num();
  else if (key == "embed.seed") cfg.embed_seed = parse_number<std::uint64_t>(key, value);
  else if (key == "embed.endpoint") cfg.embed_endpoint = value;
  else if (key == "embed.cache") cfg.embed_cache = value;
  else if (key == "normalize.drop_line_patterns") cfg.normalize.drop_line_patterns = parse_list(value);
  else if (key == "chunk.window") b.chunk.window = num();
  else if (key == "chunk.theta") b.chunk.theta = dbl();
  else if (key == "chunk.max_tokens") b.chunk.max_tokens = num();
  else if (key == "chunk.overlap") b.chunk.overlap = num();
  else if (key == "chunk.min_chars") b.chunk.min_chars = num();
  else if (key == "chunk.coverage_min") b.chunk.coverage_min = dbl();
  else if (key == "graph.domain") b.domain = value;
  else if (key == "graph.school") b.school = value;
  else if (key == "graph.contextualize_threshold") b.contextualize_threshold = dbl();
  else if (key == "graph.contextualize_whole_corpus") b.contextualize_whole_corpus = parse_bool(key, value);
  else if (key == "graph.verify_rate") b.verify_rate = dbl();
  else if (key == "graph.verify_seed") b.verify_seed = parse_number<std::uint64_t>(key, value);
  else if (key == "graph.similar_top_k") b.similar_top_k = num();
  else if (key == "graph.similar_min") b.similar_min = dbl();
  else if (key == "graph.cluster_threshold") b.cluster_threshold = dbl();
  else if (key == "graph.embed_classes") {
    b.embed_classes.clear();
    for (const auto& name : parse_list(value)) {
      const auto c = ontology::class_from_string(name);
      if (!c) bad_value(key, name);
      b.embed_classes.insert(*c);
    }
  }
  else if (key == "bm25.k1") cfg.bm25.k1 = dbl();
  else if (key == "bm25.b") cfg.bm25.b = dbl();
  else if (key == "rrf.k") cfg.k_rrf = num();
  else if (key == "server.bind") cfg.bind = value;
  else if (key == "server.cors_origins") cfg.cors_origins = parse_list(value);
  else throw Error(ErrorCode::BadInput, "unknown config key " + std::string(key));
}

void apply_file_text(Config& cfg, std::string_view text, std::string_view origin) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view raw = line;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string trimmed = text::trim(raw);
    const std::string_view sv = trimmed;
    if (sv.empty()) continue;
    const std::string where = std::string(origin) + ":" + std::to_string(line_no) + ": ";
    if (sv.front() == '[') {
      if (sv.back() != ']') throw Error(ErrorCode::BadInput, where + "unterminated section");
      section = std::string(text::trim(sv.substr(1, sv.size() - 2)));
      continue;
    }
    const auto eq = sv.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorCode::BadInput, where + "expected key = value");
    const std::string key = text::trim(sv.substr(0, eq));
    const std::string value_text = text::trim(sv.substr(eq + 1));
    const std::string_view value = unquote(value_text);
    const std::string full = section.empty() ? key : section + "." + key;
    try {
      apply(cfg, full, value);
    } catch (const Error& e) {
      throw Error(e.code(), where + e.what());
    }
  }
}

void apply_file(Config& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::BadInput, "cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  apply_file_text(cfg, buf.str(), path.string());
}

void apply_env(Config& cfg,
               const std::function<std::optional<std::string>(const char*)>& getenv) {
  if (auto v = getenv("GRAPHILOSOPHY_BIND")) cfg.bind = *v;
  if (auto v = getenv("EMBED_ENDPOINT")) cfg.embed_endpoint = *v;
  if (auto v = getenv("EMBED_AUTH_TOKEN")) cfg.embed_auth_token = *v;
}

void apply_env(Config& cfg) {
  apply_env(cfg, [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (v == nullptr || *v == '\0') return std::nullopt;
    return std::string(v);
  });
}

std::pair<std::string, int> parse_bind(std::string_view bind) {
  const auto colon = bind.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw Error(ErrorCode::BadInput, "bind address must be host:port, got " + std::string(bind));
  }
  const auto port = parse_number<int>("bind", bind.substr(colon + 1));
  if (port < 0 || port > 65535) bad_value("bind", bind);
  return {std::string(bind.substr(0, colon)), port};
}

}  // namespace sishu::config
