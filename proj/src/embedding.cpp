#include "sishu/embedding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "sishu/error.hpp"
#include "sishu/text.hpp"

namespace sishu::embedding {

namespace {

int mode_key(Mode m) { return m == Mode::Passage ? 0 : 1; }

std::uint64_t parse_u64(std::string_view s, std::string_view what) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::InvalidArgument, "bad " + std::string(what) + ": " + std::string(s));
  }
  return v;
}

}  // namespace

std::string_view prefix(Mode m) { return m == Mode::Passage ? "passage: " : "query: "; }

Vector Vector::normalized(std::vector<double> values) {
  double sq = 0.0;
  for (double x : values) sq += x * x;
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "empty vector");
  if (sq == 0.0 || !std::isfinite(sq)) return zero_guard(values.size());
  const double inv = 1.0 / std::sqrt(sq);
  Vector v;
  v.values_ = std::move(values);
  for (double& x : v.values_) x *= inv;
  return v;
}

Vector Vector::zero_guard(std::size_t dim) {
  Vector v;
  v.values_.assign(dim, 0.0);
  if (dim > 0) v.values_[0] = 1.0;
  v.flagged_ = true;
  return v;
}

double cosine(const Vector& a, const Vector& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::DimMismatch,
                "dimension " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
  const auto x = a.values();
  const auto y = b.values();
  double dot = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
  return std::clamp(dot, -1.0, 1.0);
}

Vector hash_embed(std::string_view body, Mode mode, std::size_t dim, std::uint64_t seed) {
  if (dim < 8) throw Error(ErrorCode::InvalidArgument, "hash embedder needs dim >= 8");
  if (text::tokenize(body).empty()) return Vector::zero_guard(dim);
  std::string framed(prefix(mode));
  framed += body;
  std::vector<double> counts(dim, 0.0);
  for (const auto& tok : text::token_spans(framed)) {
    const std::uint64_t h = hashing::fnv1a64(tok.text, seed);
    const double sign = (h >> 63) != 0 ? -1.0 : 1.0;
    counts[h % dim] += sign;
  }
  return Vector::normalized(std::move(counts));
}

HashEmbedder::HashEmbedder(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
  if (dim < 8) throw Error(ErrorCode::InvalidArgument, "hash embedder needs dim >= 8");
}

Vector HashEmbedder::embed(std::string_view text, Mode mode) const {
  return hash_embed(text, mode, dim_, seed_);
}

std::string HashEmbedder::id() const {
  return "hash:dim=" + std::to_string(dim_) + ":seed=" + std::to_string(seed_);
}

FileProvider::FileProvider(const std::filesystem::path& path) : path_(path.string()) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open embedding file " + path_);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::BadFormat, path_ + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!row.contains("key") || !row.contains("vector") || !row["vector"].is_array()) {
      throw Error(ErrorCode::MissingField,
                  path_ + ":" + std::to_string(line_no) + ": needs key and vector");
    }
    auto values = row["vector"].get<std::vector<double>>();
    if (dim_ == 0) dim_ = values.size();
    if (values.size() != dim_) {
      throw Error(ErrorCode::DimMismatch, path_ + ":" + std::to_string(line_no));
    }
    table_.insert_or_assign(row["key"].get<std::string>(), Vector::normalized(std::move(values)));
  }
}

Vector FileProvider::embed(std::string_view text, Mode mode) const {
  std::string framed(prefix(mode));
  framed += text;
  if (auto it = table_.find(framed); it != table_.end()) return it->second;
  if (auto it = table_.find(std::string(text)); it != table_.end()) return it->second;
  throw Error(ErrorCode::KeyMiss, "no stored vector for \"" + std::string(text) + "\"");
}

Vector CachingProvider::embed(std::string_view text, Mode mode) const {
  const auto key = std::make_pair(mode_key(mode), std::string(text));
  {
    std::lock_guard lock(mutex_);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  }
  Vector v = inner_.embed(text, mode);
  std::lock_guard lock(mutex_);
  return memo_.emplace(key, std::move(v)).first->second;
}

std::unique_ptr<Provider> make_provider(std::string_view selector, const ProviderEnv& env,
                                        std::size_t default_dim, std::uint64_t default_seed) {
  if (selector == "hash" || selector.starts_with("hash:")) {
    std::size_t dim = default_dim;
    std::uint64_t seed = default_seed;
    std::string_view rest = selector.substr(4);
    while (!rest.empty()) {
      rest.remove_prefix(1);  // ':'
      const auto next = rest.find(':');
      const std::string_view part = rest.substr(0, next);
      rest = next == std::string_view::npos ? std::string_view{} : rest.substr(next);
      if (part.starts_with("dim=")) {
        dim = parse_u64(part.substr(4), "dim");
      } else if (part.starts_with("seed=")) {
        seed = parse_u64(part.substr(5), "seed");
      } else {
        throw Error(ErrorCode::InvalidArgument, "unknown hash option: " + std::string(part));
      }
    }
    return std::make_unique<HashEmbedder>(dim, seed);
  }
  if (selector.starts_with("file:")) {
    return std::make_unique<FileProvider>(std::filesystem::path(std::string(selector.substr(5))));
  }
  if (selector == "http" || selector.starts_with("http:")) {
    HttpOptions opts;
    opts.endpoint = selector == "http" ? env.endpoint : std::string(selector.substr(5));
    opts.auth_token = env.auth_token;
    opts.cache_path = env.cache_path;
    if (opts.endpoint.empty()) {
      throw Error(ErrorCode::InvalidArgument, "http embedder needs EMBED_ENDPOINT");
    }
    return std::make_unique<HttpProvider>(std::move(opts));
  }
  throw Error(ErrorCode::InvalidArgument, "unknown embedder: " + std::string(selector));
}

std::vector<ClusterAssignment> cluster(std::span<const std::pair<std::string, Vector>> items,
                                       double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "cluster threshold must be in (0, 1]");
  }
  std::vector<std::size_t> order(items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return items[a].first < items[b].first; });

  std::vector<ClusterAssignment> out;
  std::vector<const Vector*> leaders;
  std::vector<std::vector<double>> sums;
  for (std::size_t idx : order) {
    const auto& [id, vec] = items[idx];
    std::size_t home = out.size();
    double sim = 1.0;
    for (std::size_t c = 0; c < leaders.size(); ++c) {
      const double s = cosine(vec, *leaders[c]);
      if (s >= threshold) {
        home = c;
        sim = s;
        break;
      }
    }
    if (home == out.size()) {
      out.push_back({static_cast<int>(home), {}, {}, {}});
      leaders.push_back(&vec);
      sums.emplace_back(vec.dim(), 0.0);
    }
    out[home].member_ids.push_back(id);
    out[home].leader_similarity.push_back(sim);
    const auto v = vec.values();
    for (std::size_t k = 0; k < v.size(); ++k) sums[home][k] += v[k];
  }
  for (std::size_t c = 0; c < out.size(); ++c) out[c].centroid = Vector::normalized(sums[c]);
  return out;
}

}  // namespace sishu::embedding
