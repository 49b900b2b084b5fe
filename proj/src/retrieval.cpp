#include "sishu/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sishu/error.hpp"
#include "sishu/text.hpp"

namespace sishu::retrieval {

namespace {

void check_k(int k) {
  if (k <= 0) throw Error(ErrorCode::InvalidArgument, "k must be positive");
}

void sort_ranked(std::vector<Scored>& items) {
  std::sort(items.begin(), items.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
  });
}

std::size_t cutoff(std::span<const std::string> ranking, int k) {
  return std::min(ranking.size(), static_cast<std::size_t>(k));
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::BM25: return "bm25";
    case Method::Semantic: return "semantic";
    case Method::Hybrid: return "hybrid";
  }
  return "?";
}

std::optional<Method> method_from_string(std::string_view s) {
  for (auto m : {Method::BM25, Method::Semantic, Method::Hybrid}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

std::vector<std::string> RankedList::ids() const {
  std::vector<std::string> out;
  out.reserve(items.size());
  for (const auto& s : items) out.push_back(s.doc_id);
  return out;
}

std::vector<std::string> analyze(std::string_view input) {
  std::vector<std::string> out;
  for (const auto& tok : text::token_spans(input)) {
    if (text::is_word_token(tok.text)) out.push_back(text::fold_case(tok.text));
  }
  return out;
}

Bm25Index::Bm25Index(std::span<const Document> docs, Bm25Params params) : params_(params) {
  std::size_t total = 0;
  for (const auto& d : docs) {
    const std::size_t doc = doc_ids_.size();
    doc_ids_.push_back(d.doc_id);
    const auto terms = analyze(d.text);
    lengths_.push_back(terms.size());
    total += terms.size();
    std::map<std::string, int> tf;
    for (const auto& t : terms) ++tf[t];
    for (const auto& [term, count] : tf) postings_[term].push_back({doc, count});
  }
  avg_len_ = docs.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(docs.size());
}

double Bm25Index::idf(std::string_view term) const {
  auto it = postings_.find(std::string(term));
  const double df = it == postings_.end() ? 0.0 : static_cast<double>(it->second.size());
  const double n = static_cast<double>(doc_ids_.size());
  return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

RankedList Bm25Index::search(std::string_view query, std::size_t k) const {
  if (doc_ids_.empty()) throw Error(ErrorCode::EmptyIndex, "BM25 index is empty");
  RankedList out{std::string(query), Method::BM25, {}};
  std::set<std::string> terms;
  for (auto& t : analyze(query)) terms.insert(std::move(t));

  std::map<std::size_t, double> scores;
  for (const auto& term : terms) {
    auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    const double w = idf(term);
    for (const auto& p : it->second) {
      const double tf = p.tf;
      const double norm = params_.k1 * (1.0 - params_.b +
                                        params_.b * static_cast<double>(lengths_[p.doc]) /
                                            (avg_len_ > 0 ? avg_len_ : 1.0));
      scores[p.doc] += w * tf * (params_.k1 + 1.0) / (tf + norm);
    }
  }
  for (const auto& [doc, s] : scores) out.items.push_back({doc_ids_[doc], s});
  sort_ranked(out.items);
  if (out.items.size() > k) out.items.resize(k);
  return out;
}

void SemanticIndex::add(std::string doc_id, embedding::Vector v) {
  docs_.emplace_back(std::move(doc_id), std::move(v));
}

RankedList SemanticIndex::search(std::string_view query, const embedding::Provider& embedder,
                                 std::size_t k) const {
  if (docs_.empty()) throw Error(ErrorCode::NoEmbeddings, "no embeddings indexed");
  return search(embedder.embed(query, embedding::Mode::Query), k, query);
}

RankedList SemanticIndex::search(const embedding::Vector& query_vec, std::size_t k,
                                 std::string_view query) const {
  if (docs_.empty()) throw Error(ErrorCode::NoEmbeddings, "no embeddings indexed");
  RankedList out{std::string(query), Method::Semantic, {}};
  if (k == 0) return out;
  out.items.reserve(docs_.size());
  for (const auto& [id, v] : docs_) out.items.push_back({id, embedding::cosine(query_vec, v)});
  sort_ranked(out.items);
  if (out.items.size() > k) out.items.resize(k);
  return out;
}

RankedList rrf_fuse(std::span<const RankedList> lists, int k_rrf) {
  RankedList out;
  out.method = Method::Hybrid;
  if (!lists.empty()) out.query = lists.front().query;
  std::map<std::string, double> fused;
  for (const auto& list : lists) {
    for (std::size_t r = 0; r < list.items.size(); ++r) {
      fused[list.items[r].doc_id] += 1.0 / (k_rrf + static_cast<double>(r + 1));
    }
  }
  for (const auto& [id, s] : fused) out.items.push_back({id, s});
  sort_ranked(out.items);
  return out;
}

double precision_at_k(std::span<const std::string> ranking, const std::set<std::string>& relevant,
                      int k) {
  check_k(k);
  if (relevant.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < cutoff(ranking, k); ++i) hits += relevant.count(ranking[i]);
  return static_cast<double>(hits) / static_cast<double>(k);
}

double recall_at_k(std::span<const std::string> ranking, const std::set<std::string>& relevant,
                   int k) {
  check_k(k);
  if (relevant.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < cutoff(ranking, k); ++i) hits += relevant.count(ranking[i]);
  return static_cast<double>(hits) / static_cast<double>(relevant.size());
}

double ndcg_at_k(std::span<const std::string> ranking, const std::set<std::string>& relevant,
                 int k) {
  check_k(k);
  if (relevant.empty()) return 0.0;
  double dcg = 0.0;
  for (std::size_t i = 0; i < cutoff(ranking, k); ++i) {
    if (relevant.contains(ranking[i])) dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  double ideal = 0.0;
  const std::size_t n = std::min(relevant.size(), static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < n; ++i) ideal += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  return dcg / ideal;
}

double reciprocal_rank(std::span<const std::string> ranking,
                       const std::set<std::string>& relevant) {
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    if (relevant.contains(ranking[i])) return 1.0 / static_cast<double>(i + 1);
  }
  return 0.0;
}

std::vector<BenchmarkQuery> load_benchmark(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::BadInput, "cannot open benchmark " + path.string());
  std::vector<BenchmarkQuery> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      const auto row = nlohmann::json::parse(line);
      BenchmarkQuery q;
      q.query = row.at("query").get<std::string>();
      for (const auto& id : row.at("relevant_doc_ids")) q.relevant.insert(id.get<std::string>());
      out.push_back(std::move(q));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::BadInput,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json methods = nlohmann::json::object();
  for (const auto& [m, values] : metrics) methods[std::string(to_string(m))] = values;
  return {{"query_count", query_count}, {"ks", ks}, {"methods", methods}};
}

std::string EvalReport::to_table() const {
  std::vector<std::string> names;
  for (int k : ks) names.push_back("P@" + std::to_string(k));
  for (const char* n : {"MRR", "NDCG@5", "NDCG@10", "Recall@5"}) names.emplace_back(n);

  std::ostringstream out;
  out << "metric     ";
  for (const auto& [m, values] : metrics) {
    std::string label(to_string(m));
    label.resize(std::max<std::size_t>(label.size(), 10), ' ');
    out << label;
  }
  out << '\n';
  char buf[32];
  for (const auto& name : names) {
    std::string label = name;
    label.resize(11, ' ');
    out << label;
    for (const auto& [m, values] : metrics) {
      std::snprintf(buf, sizeof buf, "%-10.3f", values.at(name));
      out << buf;
    }
    out << '\n';
  }
  out << "(" << query_count << " queries)\n";
  return out.str();
}

EvalReport run_benchmark(const BenchmarkSetup& setup, std::span<const BenchmarkQuery> queries,
                         std::span<const Method> methods, std::span<const int> ks) {
  if (queries.empty()) throw Error(ErrorCode::EmptyQuerySet, "benchmark has no queries");
  for (int k : ks) check_k(k);
  EvalReport report;
  report.query_count = queries.size();
  report.ks.assign(ks.begin(), ks.end());

  std::size_t depth = 10;
  for (int k : ks) depth = std::max(depth, static_cast<std::size_t>(k));
  const std::size_t fuse_depth = std::max<std::size_t>(depth, 100);

  for (Method m : methods) {
    auto& acc = report.metrics[m];
    for (const auto& q : queries) {
      RankedList ranked;
      auto lexical = [&] {
        if (setup.bm25 == nullptr) throw Error(ErrorCode::EmptyIndex, "no BM25 index");
        return setup.bm25->search(q.query, fuse_depth);
      };
      auto semantic = [&] {
        if (setup.semantic == nullptr || setup.embedder == nullptr) {
          throw Error(ErrorCode::NoEmbeddings, "no semantic index");
        }
        return setup.semantic->search(q.query, *setup.embedder, fuse_depth);
      };
      if (m == Method::BM25) {
        ranked = lexical();
      } else if (m == Method::Semantic) {
        ranked = semantic();
      } else {
        const std::vector<RankedList> lists = {lexical(), semantic()};
        ranked = rrf_fuse(lists, setup.k_rrf);
      }
      if (ranked.items.size() > depth) ranked.items.resize(depth);
      const auto ids = ranked.ids();
      for (int k : ks) acc["P@" + std::to_string(k)] += precision_at_k(ids, q.relevant, k);
      acc["MRR"] += reciprocal_rank(ids, q.relevant);
      acc["NDCG@5"] += ndcg_at_k(ids, q.relevant, 5);
      acc["NDCG@10"] += ndcg_at_k(ids, q.relevant, 10);
      acc["Recall@5"] += recall_at_k(ids, q.relevant, 5);
    }
    for (auto& [name, v] : acc) v /= static_cast<double>(queries.size());
  }
  return report;
}

}  // namespace sishu::retrieval
