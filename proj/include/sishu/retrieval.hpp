#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sishu/embedding.hpp"

namespace sishu::retrieval {

enum class Method { BM25, Semantic, Hybrid };

std::string_view to_string(Method m);
std::optional<Method> method_from_string(std::string_view s);

struct Scored {
  std::string doc_id;
  double score = 0.0;

  bool operator==(const Scored&) const = default;
};

/// Scores are non-increasing; ties are ordered by doc_id ascending.
struct RankedList {
  std::string query;
  Method method = Method::BM25;
  std::vector<Scored> items;

  std::vector<std::string> ids() const;
};

/// Index terms: tokens that are not pure punctuation, case-folded.
std::vector<std::string> analyze(std::string_view text);

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

struct Document {
  std::string doc_id;
  std::string text;
};

class Bm25Index {
 public:
  explicit Bm25Index(std::span<const Document> docs, Bm25Params params = {});

  /// Top k documents sharing at least one query term. Throws EmptyIndex when
  /// the index holds no documents.
  RankedList search(std::string_view query, std::size_t k) const;

  /// ln(1 + (N - df + 0.5) / (df + 0.5)).
  double idf(std::string_view term) const;
  std::size_t size() const noexcept { return doc_ids_.size(); }
  double average_length() const noexcept { return avg_len_; }

 private:
  struct Posting {
    std::size_t doc;
    int tf;
  };
  Bm25Params params_;
  std::vector<std::string> doc_ids_;
  std::vector<std::size_t> lengths_;
  double avg_len_ = 0.0;
  std::unordered_map<std::string, std::vector<Posting>> postings_;
};

class SemanticIndex {
 public:
  void add(std::string doc_id, embedding::Vector v);
  std::size_t size() const noexcept { return docs_.size(); }

  /// Exact top-k by cosine against the Query-mode embedding of `query`.
  /// Throws NoEmbeddings when empty.
  RankedList search(std::string_view query, const embedding::Provider& embedder,
                    std::size_t k) const;
  RankedList search(const embedding::Vector& query_vec, std::size_t k,
                    std::string_view query = {}) const;

 private:
  std::vector<std::pair<std::string, embedding::Vector>> docs_;
};

/// Reciprocal rank fusion: sum over lists of 1 / (k_rrf + rank), rank from 1.
RankedList rrf_fuse(std::span<const RankedList> lists, int k_rrf = 60);

/// Binary-relevance metrics over a ranking of doc ids. k <= 0 throws
/// InvalidArgument. An empty relevant set scores 0.
double precision_at_k(std::span<const std::string> ranking, const std::set<std::string>& relevant,
                      int k);
double recall_at_k(std::span<const std::string> ranking, const std::set<std::string>& relevant,
                   int k);
double ndcg_at_k(std::span<const std::string> ranking, const std::set<std::string>& relevant,
                 int k);
/// Reciprocal rank of the first relevant document; 0 when none is ranked.
double reciprocal_rank(std::span<const std::string> ranking,
                       const std::set<std::string>& relevant);

struct BenchmarkQuery {
  std::string query;
  std::set<std::string> relevant;
};

/// Reads line-delimited `{query, relevant_doc_ids}`. Throws BadInput.
std::vector<BenchmarkQuery> load_benchmark(const std::filesystem::path& path);

/// Averaged metrics per method. Keys are "P@k" for each requested k, plus
/// "MRR", "NDCG@5", "NDCG@10" and "Recall@5".
struct EvalReport {
  std::size_t query_count = 0;
  std::vector<int> ks;
  std::map<Method, std::map<std::string, double>> metrics;

  nlohmann::json to_json() const;
  std::string to_table() const;
};

struct BenchmarkSetup {
  const Bm25Index* bm25 = nullptr;
  const SemanticIndex* semantic = nullptr;
  const embedding::Provider* embedder = nullptr;
  int k_rrf = 60;
};

/// Runs every query under each method and averages in query order.
/// Throws EmptyQuerySet for no queries.
EvalReport run_benchmark(const BenchmarkSetup& setup, std::span<const BenchmarkQuery> queries,
                         std::span<const Method> methods, std::span<const int> ks);

}  // namespace sishu::retrieval
