#include "sishu/benchmark.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>

#include "sishu/error.hpp"

namespace sishu::benchmark {

namespace {

/// Raw-output draws keep the generated text identical across standard
/// library implementations (distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
  std::size_t between(std::size_t lo, std::size_t hi) { return lo + below(hi - lo + 1); }
  bool chance(unsigned percent) { return below(100) < percent; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

/// Distinct Vietnamese-looking syllables.
class Lexicon {
 public:
  explicit Lexicon(Rng& rng) : rng_(rng) {}

  std::string fresh() {
    static const std::vector<std::string> onsets = {
        "b", "c", "ch", "d", "đ", "g", "gi", "h", "kh", "l", "m", "n",
        "ng", "nh", "ph", "qu", "s", "t", "th", "tr", "v", "x"};
    static const std::vector<std::string> nuclei = {
        "a", "à", "á", "ả", "ạ", "ă", "ắ", "â", "ấ", "ầ", "e", "é", "ê", "ế", "ề", "i",
        "í", "o", "ó", "ò", "ô", "ố", "ồ", "ơ", "ớ", "ờ", "u", "ú", "ư", "ứ", "ừ", "y"};
    static const std::vector<std::string> codas = {"", "n", "ng", "nh", "m", "c", "t", "p", "i", "o"};
    for (;;) {
      std::string w = onsets[rng_.below(onsets.size())] + nuclei[rng_.below(nuclei.size())] +
                      codas[rng_.below(codas.size())];
      if (used_.insert(w).second) return w;
    }
  }

  std::vector<std::string> fresh(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(fresh());
    return out;
  }

 private:
  Rng& rng_;
  std::set<std::string> used_;
};

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[rng.below(v.size())];
}

}  // namespace

RetrievalBenchmark synthetic_retrieval(std::uint64_t seed, int topics) {
  Rng rng(seed);
  Lexicon lex(rng);
  const auto classical = lex.fresh(400);
  const auto modern = lex.fresh(400);

  RetrievalBenchmark out;
  for (int t = 0; t < topics; ++t) {
    const auto anchors = lex.fresh(2);
    const auto cues = lex.fresh(2);
    char tag[16];
    std::snprintf(tag, sizeof tag, "%02d", t);

    retrieval::BenchmarkQuery q;
    q.query = join({anchors[0], anchors[1], cues[0], cues[1]});
    for (int r = 0; r < 10; ++r) {
      std::vector<std::string> words;
      for (const auto& a : anchors) words.insert(words.end(), 3, a);
      for (int k = 0; k < 6; ++k) words.push_back(pick(rng, classical));
      rng.shuffle(words);
      const std::string id = std::string("t") + tag + "-rel-" + std::to_string(r);
      out.docs.push_back({id, join(words)});
      q.relevant.insert(id);
    }
    for (int n = 0; n < 2; ++n) {
      std::vector<std::string> words;
      for (const auto& c : cues) words.insert(words.end(), 3, c);
      for (int k = 0; k < 24; ++k) words.push_back(pick(rng, modern));
      rng.shuffle(words);
      out.docs.push_back({std::string("t") + tag + "-neg-" + std::to_string(n), join(words)});
    }
    out.queries.push_back(std::move(q));
  }
  return out;
}

ChunkingBenchmark synthetic_chunking(std::uint64_t seed, int docs) {
  Rng rng(seed);
  Lexicon lex(rng);
  const auto common = lex.fresh(200);

  ChunkingBenchmark out;
  for (int d = 0; d < docs; ++d) {
    ChunkingDoc doc;
    doc.id = "doc" + std::to_string(d);
    const std::size_t segments = rng.between(4, 6);
    for (std::size_t s = 0; s < segments; ++s) {
      const auto vocab = lex.fresh(6);
      const std::size_t target = rng.between(120, 450);
      if (!doc.text.empty()) doc.text += '\n';
      const std::size_t begin = doc.text.size();
      std::size_t tokens = 0;
      while (tokens < target) {
        const std::size_t len = std::min(rng.between(8, 14), std::max<std::size_t>(target - tokens, 4));
        std::vector<std::string> words;
        for (std::size_t k = 0; k < len; ++k) {
          words.push_back(rng.chance(80) ? pick(rng, vocab) : pick(rng, common));
        }
        if (tokens > 0) doc.text += ' ';
        doc.text += join(words);
        doc.text += '.';
        tokens += len;
      }
      doc.segments.push_back({begin, doc.text.size()});
      out.queries.push_back({vocab[0] + " " + vocab[1] + " " + vocab[2] + " " + vocab[3],
                             out.docs.size(), s});
    }
    out.docs.push_back(std::move(doc));
  }
  return out;
}

double span_iou(std::size_t a_begin, std::size_t a_end, std::size_t b_begin, std::size_t b_end) {
  const std::size_t lo = std::max(a_begin, b_begin);
  const std::size_t hi = std::min(a_end, b_end);
  const std::size_t inter = hi > lo ? hi - lo : 0;
  const std::size_t uni = (a_end - a_begin) + (b_end - b_begin) - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

nlohmann::json ChunkingComparison::to_json() const {
  auto side = [](const ChunkingScores& s) {
    return nlohmann::json{
        {"Recall@5", s.recall_at_5}, {"NDCG@5", s.ndcg_at_5}, {"chunks", s.chunk_count}};
  };
  return {{"query_count", query_count}, {"adaptive", side(adaptive)}, {"fixed", side(fixed)}};
}

std::string ChunkingComparison::to_table() const {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "method     Recall@5  NDCG@5    chunks\n"
                "adaptive   %-9.3f %-9.3f %zu\n"
                "fixed      %-9.3f %-9.3f %zu\n"
                "(%zu queries)\n",
                adaptive.recall_at_5, adaptive.ndcg_at_5, adaptive.chunk_count, fixed.recall_at_5,
                fixed.ndcg_at_5, fixed.chunk_count, query_count);
  return buf;
}

ChunkingComparison compare_chunking(const ChunkingBenchmark& bench,
                                    const embedding::Provider& embedder,
                                    const chunking::ChunkParams& params) {
  if (bench.queries.empty()) throw Error(ErrorCode::EmptyQuerySet, "benchmark has no queries");

  auto evaluate = [&](bool adaptive) {
    struct Located {
      std::string id;
      std::size_t doc;
      std::size_t begin;
      std::size_t end;
    };
    std::vector<Located> pool;
    retrieval::SemanticIndex index;
    for (std::size_t d = 0; d < bench.docs.size(); ++d) {
      const auto& doc = bench.docs[d];
      const auto chunks =
          adaptive ? chunking::chunk_document(doc.text, embedder, params, doc.id).chunks
                   : chunking::fixed_chunk(doc.text, params.max_tokens, 0, doc.id);
      for (std::size_t k = 0; k < chunks.size(); ++k) {
        Located loc{doc.id + "#" + std::to_string(k), d, chunks[k].source_begin,
                    chunks[k].source_end};
        index.add(loc.id, embedder.embed(chunks[k].text, embedding::Mode::Passage));
        pool.push_back(std::move(loc));
      }
    }
    ChunkingScores scores;
    scores.chunk_count = pool.size();
    for (const auto& q : bench.queries) {
      const auto& seg = bench.docs[q.doc].segments[q.segment];
      std::set<std::string> relevant;
      for (const auto& loc : pool) {
        if (loc.doc == q.doc && span_iou(loc.begin, loc.end, seg.begin, seg.end) >= 0.5) {
          relevant.insert(loc.id);
        }
      }
      const auto ids = index.search(q.query, embedder, 5).ids();
      scores.recall_at_5 += retrieval::recall_at_k(ids, relevant, 5);
      scores.ndcg_at_5 += retrieval::ndcg_at_k(ids, relevant, 5);
    }
    const auto n = static_cast<double>(bench.queries.size());
    scores.recall_at_5 /= n;
    scores.ndcg_at_5 /= n;
    return scores;
  };

  ChunkingComparison out;
  out.query_count = bench.queries.size();
  out.adaptive = evaluate(true);
  out.fixed = evaluate(false);
  return out;
}

}  // namespace sishu::benchmark
