#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace sishu::embedding {

/// Passage and Query embeddings are framed with different instruction
/// prefixes, so the same text yields different vectors.
enum class Mode { Passage, Query };

std::string_view prefix(Mode m);

/// Unit-norm vector. Construction normalizes; an all-zero input becomes the
/// first basis vector and is flagged so similarity builders can skip it.
class Vector {
 public:
  Vector() = default;
  static Vector normalized(std::vector<double> values);
  /// Zero-guard vector e0 of the given dimension, flagged.
  static Vector zero_guard(std::size_t dim);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t dim() const noexcept { return values_.size(); }
  bool flagged() const noexcept { return flagged_; }

  bool operator==(const Vector&) const = default;

 private:
  std::vector<double> values_;
  bool flagged_ = false;
};

/// Dot product of unit vectors, clamped to [-1, 1]. Throws DimMismatch.
double cosine(const Vector& a, const Vector& b);

class Provider {
 public:
  virtual ~Provider() = default;
  virtual Vector embed(std::string_view text, Mode mode) const = 0;
  virtual std::size_t dim() const = 0;
  /// Stable description sufficient to rebuild an equivalent provider.
  virtual std::string id() const = 0;
};

/// Seeded feature-hashing embedder: token counts of `prefix + text` land in
/// `dim` buckets with a hash-derived sign. Deterministic and offline.
Vector hash_embed(std::string_view text, Mode mode, std::size_t dim, std::uint64_t seed);

class HashEmbedder final : public Provider {
 public:
  explicit HashEmbedder(std::size_t dim = 256, std::uint64_t seed = 0);
  Vector embed(std::string_view text, Mode mode) const override;
  std::size_t dim() const override { return dim_; }
  std::string id() const override;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

/// Precomputed vectors from line-delimited `{key, vector}` records. A lookup
/// tries `prefix(mode) + text` first, then the bare text; misses throw KeyMiss.
class FileProvider final : public Provider {
 public:
  explicit FileProvider(const std::filesystem::path& path);
  Vector embed(std::string_view text, Mode mode) const override;
  std::size_t dim() const override { return dim_; }
  std::string id() const override { return "file:" + path_; }

 private:
  std::string path_;
  std::unordered_map<std::string, Vector> table_;
  std::size_t dim_ = 0;
};

struct HttpOptions {
  std::string endpoint;  // e.g. http://127.0.0.1:9000/embed
  std::string auth_token;
  std::filesystem::path cache_path;  // empty disables the disk cache
  int max_attempts = 3;
  int timeout_seconds = 30;
};

/// Client for an external embedding service: POST `{text, mode}` and expect
/// `{vector}`. Responses are cached in memory and on disk keyed by the
/// sha256 of the framed text. Transport failures and 5xx replies are retried
/// up to `max_attempts` times, then surface as Transport; malformed replies
/// throw BadResponse. There is no fallback to another provider.
class HttpProvider final : public Provider {
 public:
  explicit HttpProvider(HttpOptions opts);
  Vector embed(std::string_view text, Mode mode) const override;
  std::size_t dim() const override;
  std::string id() const override { return "http:" + opts_.endpoint; }

 private:
  Vector fetch(std::string_view text, Mode mode) const;
  void append_cache(const std::string& key, std::string_view text, const Vector& v) const;

  HttpOptions opts_;
  std::string scheme_host_port_;
  std::string path_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::string, Vector> cache_;
  mutable std::size_t dim_ = 0;
};

/// Memoizing adapter; safe for concurrent callers.
class CachingProvider final : public Provider {
 public:
  explicit CachingProvider(const Provider& inner) : inner_(inner) {}
  Vector embed(std::string_view text, Mode mode) const override;
  std::size_t dim() const override { return inner_.dim(); }
  std::string id() const override { return inner_.id(); }

 private:
  const Provider& inner_;
  mutable std::mutex mutex_;
  mutable std::map<std::pair<int, std::string>, Vector, std::less<>> memo_;
};

struct ProviderEnv {
  std::string endpoint;    // EMBED_ENDPOINT
  std::string auth_token;  // EMBED_AUTH_TOKEN
  std::filesystem::path cache_path;
};

/// Builds a provider from a selector: `hash`, `hash:dim=N:seed=S`,
/// `file:<path>`, `http` or `http:<endpoint>`.
std::unique_ptr<Provider> make_provider(std::string_view selector, const ProviderEnv& env = {},
                                        std::size_t default_dim = 256,
                                        std::uint64_t default_seed = 0);

struct ClusterAssignment {
  int cluster_id = 0;
  std::vector<std::string> member_ids;  // first member is the leader
  Vector centroid;
  /// Cosine of each member to the leader, parallel to member_ids.
  std::vector<double> leader_similarity;
};

/// Greedy leader clustering over items sorted by id: an item joins the first
/// cluster whose leader has cosine >= threshold, otherwise it founds one.
/// Throws InvalidArgument unless 0 < threshold <= 1.
std::vector<ClusterAssignment> cluster(std::span<const std::pair<std::string, Vector>> items,
                                       double threshold);

}  // namespace sishu::embedding
