// One line per acceptance criterion: PASS/FAIL, wall time against its budget
// and the measured values. Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

#include "../test_support.hpp"
#include "sishu/benchmark.hpp"
#include "sishu/chunking.hpp"
#include "sishu/config.hpp"
#include "sishu/ontology.hpp"
#include "sishu/query.hpp"

using namespace sishu;
using graph::EntityClass;
using graph::Layer;
using graph::RelationType;

namespace {

/// Collects failed checks; a criterion passes when none failed.
struct Outcome {
  std::vector<std::string> failures;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok && failures.size() < 5) failures.push_back(what);
    if (!ok && failures.size() == 5) failures.push_back("...");
  }
};

struct Criterion {
  std::string name;
  double budget_s;
  std::function<void(Outcome&)> run;
};

std::string fmt(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// ---- density and relation share ---------------------------------------------

constexpr std::size_t kWords = 1723;
constexpr std::size_t kSentences = 2222;
constexpr std::size_t kEmbeddings = 12523;
constexpr std::size_t kAppearsIn = 29417;
constexpr std::size_t kTotalEdges = 71249;

/// 16,468 nodes and 71,249 edges, 29,417 of them APPEARS_IN. Word/sentence
/// pairs (e mod 1723, 7e mod 2222) are distinct because gcd(1723, 2222) = 1;
/// SIMILAR_TO links each embedding to its next four ring neighbours.
graph::Graph target_sized_graph() {
  graph::Graph g;
  std::vector<std::string> words;
  std::vector<std::string> sentences;
  std::vector<std::string> embeddings;
  for (std::size_t i = 0; i < kWords; ++i)
    words.push_back(g.add_node(EntityClass::HAN_WORD, "w" + std::to_string(i)).id);
  for (std::size_t i = 0; i < kSentences; ++i)
    sentences.push_back(g.add_node(EntityClass::HAN_SENTENCE, "s" + std::to_string(i)).id);
  for (std::size_t i = 0; i < kEmbeddings; ++i)
    embeddings.push_back(g.add_node(EntityClass::EMBEDDING, "e" + std::to_string(i)).id);
  for (std::size_t e = 0; e < kAppearsIn; ++e) {
    g.add_edge(graph::make_edge(words[e % kWords], sentences[(7 * e) % kSentences],
                                RelationType::APPEARS_IN));
  }
  std::size_t remaining = kTotalEdges - kAppearsIn;
  for (std::size_t i = 0; i < kEmbeddings && remaining > 0; ++i) {
    for (std::size_t d = 1; d <= 4 && remaining > 0; ++d, --remaining) {
      g.add_edge(graph::make_edge(embeddings[i], embeddings[(i + d) % kEmbeddings],
                                  RelationType::SIMILAR_TO, 0.9));
    }
  }
  return g;
}

void density_reproduction(Outcome& o) {
  const double from_counts = graph::density(16468, 71249);
  const auto g = target_sized_graph();
  const auto s = graph::stats(g);
  o.check(g.node_count() == 16468 && g.edge_count() == 71249, "generated graph size");
  o.check(std::abs(from_counts - 0.000263) <= 5e-7, "density from counts " + fmt(from_counts, 9));
  o.check(std::abs(s.density - 0.000263) <= 5e-7, "density from graph " + fmt(s.density, 9));
  o.detail << "counts " << fmt(from_counts, 9) << ", graph " << fmt(s.density, 9);
}

void relation_share(Outcome& o) {
  const auto g = target_sized_graph();
  const auto s = graph::stats(g);
  const double pct = 100.0 * s.relation_shares.at("APPEARS_IN");
  o.check(s.relation_counts.at("APPEARS_IN") == kAppearsIn, "APPEARS_IN count");
  o.check(std::abs(pct - 41.3) <= 0.05, "APPEARS_IN share " + fmt(pct, 4) + "%");
  o.detail << "APPEARS_IN " << fmt(pct, 3) << "%";
}

void layer_density_ordering(Outcome& o) {
  const auto s = graph::stats(testing::build_mini());
  const double commentary = s.layer_density.at("CommentarySpeaker");
  const double conceptual = s.layer_density.at("Conceptual");
  o.check(commentary > s.density, "Commentary density not above graph density");
  o.check(conceptual > s.density, "Conceptual density not above graph density");
  o.detail << "graph " << fmt(s.density) << ", Commentary " << fmt(commentary) << ", Conceptual "
           << fmt(conceptual);
}

// ---- chunking ---------------------------------------------------------------

/// Two topics whose sentence embeddings live in disjoint coordinate blocks,
/// so every cross-topic cosine is exactly zero.
void two_topic_split(Outcome& o, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.5, 1.0);
  const std::size_t na = 2 + rng() % 6;
  const std::size_t nb = 2 + rng() % 6;
  std::map<std::string, std::vector<double>> table;
  std::vector<std::string> sentences;
  for (std::size_t i = 0; i < na + nb; ++i) {
    std::vector<double> v(16, 0.0);
    const std::size_t base = i < na ? 0 : 8;
    for (std::size_t d = 0; d < 8; ++d) v[base + d] = u(rng);
    sentences.push_back((i < na ? "a" : "b") + std::to_string(i));
    table[sentences.back()] = v;
  }
  const testing::TableProvider p(16, table);
  chunking::ChunkParams params;
  params.min_chars = 0;
  const auto chunks = chunking::adaptive_chunk(sentences, p, params);
  const bool ok = chunks.size() == 2 && chunks[0].span_begin == 0 && chunks[0].span_end == na - 1 &&
                  chunks[1].span_begin == na && chunks[1].span_end == na + nb - 1;
  o.check(ok, "two-topic split at " + std::to_string(na) + "/" + std::to_string(nb));
}

std::string random_document(std::mt19937_64& rng) {
  static const std::vector<std::string> pieces = {"子曰：學而時習之，不亦說乎？",
                                                  "Học mà thường ôn tập, chẳng cũng vui ư.",
                                                  "仁者愛人。",
                                                  "The gentleman is not a vessel.",
                                                  "   ",
                                                  "\n\n",
                                                  "有朋自遠方來",
                                                  "lễ nghĩa liêm sỉ",
                                                  "!!!",
                                                  "吾日三省吾身：為人謀而不忠乎？"};
  // Whitespace-only input is an EmptyInput error, not a coverage case.
  std::string doc = pieces[rng() % 4];
  const int n = static_cast<int>(rng() % 60);
  for (int i = 0; i < n; ++i) {
    doc += pieces[rng() % pieces.size()];
    if (rng() % 4 == 0) doc += ' ';
  }
  if (rng() % 5 == 0) {
    // One run-on sentence far beyond max_tokens.
    for (int i = 0; i < 300; ++i) doc += " word" + std::to_string(i);
  }
  return doc;
}

void chunking_suite(Outcome& o) {
  std::mt19937_64 rng(20240917);
  double worst = 0.0;
  for (int c = 0; c < 100; ++c) {
    const std::size_t n = 2 + rng() % 12;
    const std::size_t dim = 1 + rng() % 32;
    const int w = 1 + static_cast<int>(rng() % 6);
    std::vector<std::vector<double>> raw;
    std::vector<embedding::Vector> embs;
    for (std::size_t i = 0; i < n; ++i) {
      raw.push_back(testing::random_raw(rng, dim));
      embs.push_back(embedding::Vector::normalized(raw.back()));
    }
    const std::size_t i = 1 + rng() % (n - 1);
    const double err =
        std::abs(chunking::coherence(embs, i, w) - testing::coherence_oracle(raw, i, w));
    worst = std::max(worst, err);
    o.check(err <= 1e-9, "coherence case " + std::to_string(c));
  }

  for (int c = 0; c < 50; ++c) two_topic_split(o, rng);

  const embedding::HashEmbedder h;
  double min_cov = 1.0;
  for (int c = 0; c < 60; ++c) {
    const std::string doc = random_document(rng);
    chunking::ChunkParams p;
    p.max_tokens = 20 + static_cast<int>(rng() % 200);
    p.overlap = static_cast<int>(rng() % static_cast<std::uint64_t>(p.max_tokens / 2));
    p.min_chars = static_cast<int>(rng() % 300);
    p.theta = std::uniform_real_distribution<double>(0.0, 0.9)(rng);
    p.window = 1 + static_cast<int>(rng() % 5);
    const auto r = chunking::chunk_document(doc, h, p, "doc");
    min_cov = std::min(min_cov, r.coverage);
    o.check(r.coverage >= 0.95, "pipeline coverage " + fmt(r.coverage));
    o.check(std::abs(r.coverage - chunking::validate_coverage(r.chunks, doc)) < 1e-12,
            "reported coverage differs from validation");
  }
  // Chunks that lose half the text must trigger the fallback.
  const std::string doc = "仁者愛人。義者宜也。禮者履也。智者知也。";
  auto lossy = chunking::chunk_document(doc, h, chunking::ChunkParams{}, "doc").chunks;
  lossy.front().text = lossy.front().text.substr(0, lossy.front().text.size() / 2);
  const auto fixed = chunking::apply_fallback(lossy, doc, chunking::ChunkParams{}, "doc");
  o.check(fixed.fell_back && fixed.coverage >= 0.95, "fallback after lossy chunking");
  min_cov = std::min(min_cov, fixed.coverage);

  o.detail << "coherence max err " << worst << ", 50 two-topic splits, min coverage "
           << fmt(min_cov, 4);
}

void chunking_benchmark(Outcome& o) {
  const auto bench = benchmark::synthetic_chunking();
  const embedding::HashEmbedder h;
  const auto cmp = benchmark::compare_chunking(bench, h, config::Config{}.build.chunk);
  o.check(cmp.query_count >= 40, "query count " + std::to_string(cmp.query_count));
  o.check(cmp.adaptive.recall_at_5 > cmp.fixed.recall_at_5, "Recall@5 not higher for adaptive");
  o.check(cmp.adaptive.ndcg_at_5 > cmp.fixed.ndcg_at_5, "NDCG@5 not higher for adaptive");
  o.detail << cmp.query_count << " queries; Recall@5 " << fmt(cmp.adaptive.recall_at_5, 3) << " vs "
           << fmt(cmp.fixed.recall_at_5, 3) << ", NDCG@5 " << fmt(cmp.adaptive.ndcg_at_5, 3)
           << " vs " << fmt(cmp.fixed.ndcg_at_5, 3);
}

// ---- retrieval --------------------------------------------------------------

void retrieval_suite(Outcome& o) {
  // "cat": N = 3, df = 2, avgdl = 3; idf = ln(1.6), d1 tf 1 len 3, d2 tf 2 len 4.
  const std::vector<retrieval::Document> toy = {
      {"d1", "cat sat mat"}, {"d2", "Cat cat dog bird"}, {"d3", "fish swims"}};
  const retrieval::Bm25Index idx(toy);
  const auto r = idx.search("cat", 5);
  const bool shape = r.items.size() == 2 && r.items[0].doc_id == "d2" && r.items[1].doc_id == "d1";
  o.check(shape, "BM25 toy ranking");
  if (shape) {
    o.check(std::abs(r.items[0].score - 0.5908617053374963) <= 1e-9,
            "BM25 d2 " + fmt(r.items[0].score, 12));
    o.check(std::abs(r.items[1].score - 0.47000362924573563) <= 1e-9,
            "BM25 d1 " + fmt(r.items[1].score, 12));
  }

  const auto sweep = testing::sweep_metrics(6);
  o.check(sweep.mismatches == 0, "metric sweep: " + sweep.first_failure);
  const int rrf_bad = testing::sweep_rrf(200, 4242);
  o.check(rrf_bad == 0, std::to_string(rrf_bad) + " RRF mismatches");

  const auto bench = benchmark::synthetic_retrieval();
  const embedding::HashEmbedder h;
  retrieval::SemanticIndex semantic;
  for (const auto& d : bench.docs)
    semantic.add(d.doc_id, h.embed(d.text, embedding::Mode::Passage));
  const retrieval::Bm25Index bm25(bench.docs);
  const std::vector<retrieval::Method> methods = {retrieval::Method::BM25,
                                                  retrieval::Method::Semantic};
  const std::vector<int> ks = {1, 10};
  const auto rep = retrieval::run_benchmark({&bm25, &semantic, &h, 60}, bench.queries, methods, ks);
  const auto& sem = rep.metrics.at(retrieval::Method::Semantic);
  const auto& lex = rep.metrics.at(retrieval::Method::BM25);
  o.check(sem.at("P@1") == 1.0, "semantic P@1 " + fmt(sem.at("P@1"), 3));
  o.check(lex.at("P@10") < sem.at("P@10"), "BM25 P@10 not below semantic P@10");
  o.detail << "metric instances " << sweep.checked << ", semantic P@1 " << fmt(sem.at("P@1"), 3)
           << ", P@10 bm25 " << fmt(lex.at("P@10"), 3) << " < semantic " << fmt(sem.at("P@10"), 3);
}

// ---- extraction -------------------------------------------------------------

void extraction_suite(Outcome& o) {
  const auto speakers = extraction::default_speakers();
  const auto fixture = testing::speaker_fixture();
  int correct = 0;
  for (const auto& c : fixture) {
    std::vector<extraction::SpeakerHit> expected;
    for (const auto& [name, off] : c.expected) expected.push_back({name, off});
    const bool ok = extraction::detect_speakers(c.han, speakers) == expected;
    correct += ok;
    o.check(ok, "speaker: " + c.han);
  }
  o.check(fixture.size() == 20, "speaker fixture size");

  const auto taxonomy = extraction::default_taxonomy();
  std::map<std::string, std::set<std::string>> sets;
  for (const auto& [id, text] : testing::concept_fixture()) {
    const auto hits = extraction::extract_concepts(text, taxonomy, id);
    std::size_t expected_hits = 0;
    for (const auto& def : taxonomy) {
      const auto [count, first] = testing::char_count_oracle(text, def.character);
      if (count == 0) continue;
      ++expected_hits;
      sets[id].insert(def.character);
      const auto it = std::find_if(hits.begin(), hits.end(), [&](const extraction::ConceptHit& h) {
        return h.concept_def.character == def.character;
      });
      o.check(it != hits.end() && it->count == count && it->position == first,
              "concept " + def.character + " in " + id);
    }
    o.check(hits.size() == expected_hits, "concept hit count in " + id);
  }

  std::map<extraction::ConceptPair, int> expected;
  for (const auto& a : taxonomy) {
    for (const auto& b : taxonomy) {
      if (a.character == b.character) continue;
      int n = 0;
      for (const auto& [id, s] : sets) n += s.contains(a.character) && s.contains(b.character);
      if (n > 0) expected[{a.character, b.character}] = n;
    }
  }
  const auto got = extraction::cooccurrence(sets);
  o.check(got == expected, "co-occurrence differs from enumeration");
  o.detail << "speakers " << correct << "/" << fixture.size() << ", " << got.size()
           << " ordered pairs";
}

// ---- schema and determinism -------------------------------------------------

void schema_determinism(Outcome& o) {
  const auto a = testing::build_mini();
  const auto b = testing::build_mini();
  const std::size_t violations = graph::count_violations(a);
  o.check(violations == 0, std::to_string(violations) + " schema violations");
  const auto s = graph::stats(a);
  auto count = [&](const char* cls) {
    const auto it = s.class_counts.find(cls);
    return it == s.class_counts.end() ? std::size_t{0} : it->second;
  };
  const std::size_t han = count("HAN_SENTENCE");
  o.check(han > 0 && han == count("HANVIET_SENTENCE") && han == count("VIETNAMESE_SENTENCE") &&
              han == count("SENTENCE"),
          "tri-parallel counts differ");

  testing::TempDir dir("acceptance");
  graph::save(a, dir / "a.jsonl");
  graph::save(b, dir / "b.jsonl");
  const auto fa = testing::read_file(dir / "a.jsonl");
  o.check(!fa.empty() && fa == testing::read_file(dir / "b.jsonl"),
          "graph files differ between runs");

  const auto doc = nlohmann::json::parse(ontology::Ontology::standard().to_json());
  o.check(ontology::kAllClasses.size() == 20 && doc["classes"].size() == 20, "class count");
  o.check(ontology::kAllRelations.size() == 18 && doc["relations"].size() == 18, "relation count");
  o.check(ontology::kAllLayers.size() == 6 && doc["layers"].size() == 6, "layer count");
  o.detail << a.node_count() << " nodes, " << a.edge_count() << " edges, " << violations
           << " violations, " << han << " sentences per language, 20/18/6";
}

// ---- query ------------------------------------------------------------------

void query_correctness(Outcome& o) {
  std::mt19937_64 rng(515);
  int compared = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng() % 199;
    const auto g = testing::random_graph(rng, n, 3.0 / static_cast<double>(n));
    std::vector<std::string> seeds;
    for (int s = 0; s < 1 + static_cast<int>(rng() % 3); ++s)
      seeds.push_back(g.nodes()[rng() % n].id);
    std::set<std::string> prev;
    for (int depth = 0; depth <= 4; ++depth) {
      o.check(testing::bfs_matches_oracle(g, seeds, depth, {}),
              "graph " + std::to_string(t) + " depth " + std::to_string(depth));
      std::set<std::string> now;
      for (const auto& node : query::bfs_subgraph(g, seeds, depth).nodes) now.insert(node.id);
      o.check(std::includes(now.begin(), now.end(), prev.begin(), prev.end()),
              "depth monotonicity");
      prev = std::move(now);
      ++compared;
    }
    query::Filters layers;
    layers.layers = std::set<Layer>{Layer::Textual};
    o.check(testing::bfs_matches_oracle(g, seeds, 2, layers),
            "layer filter on graph " + std::to_string(t));
    query::Filters rels;
    rels.relations = std::set<RelationType>{RelationType::SIMILAR_TO, RelationType::FOLLOWS};
    o.check(testing::bfs_matches_oracle(g, seeds, 2, rels),
            "relation filter on graph " + std::to_string(t));
    compared += 2;
  }

  const auto mini = testing::build_mini();
  const auto hits = query::exact_match(mini, "曾子曰:吾日三省吾身");
  o.check(hits == std::vector<std::string>{"HAN_SENTENCE:LN.1-4.1.1"},
          "exact match of the Zengzi sentence");
  o.detail << compared << " oracle comparisons; exact match -> "
           << (hits.empty() ? "none" : hits.front());
}

// ---- dictionary -------------------------------------------------------------

void dictionary_consolidation(Outcome& o) {
  std::mt19937_64 rng(99);
  for (int t = 0; t < 100; ++t) {
    const auto in = testing::random_dictionary(rng);
    const auto out = corpus::consolidate_dictionary(in);
    const auto err = testing::check_consolidation(in, out);
    o.check(err.empty(), "dictionary " + std::to_string(t) + ": " + err);
    o.check(corpus::consolidate_dictionary(out) == out,
            "not idempotent on dictionary " + std::to_string(t));
  }
  auto entry = [](std::string id, std::string ch, std::string reading, std::string meaning) {
    return corpus::DictEntry{std::move(id),        std::move(ch), std::move(reading),
                             {std::move(meaning)}, "LN",          "1"};
  };
  const auto dao = corpus::consolidate_dictionary(
      std::vector{entry("A", "道", "đạo", "con đường"), entry("B", "道", "đạo", "học thuyết")});
  o.check(dao.size() == 1 &&
              dao[0].viet_meanings == std::vector<std::string>{"con đường", "học thuyết"},
          "same-reading merge");
  const auto le = corpus::consolidate_dictionary(
      std::vector{entry("A", "樂", "lạc", "vui"), entry("B", "樂", "nhạc", "âm nhạc")});
  o.check(le.size() == 2, "different readings kept apart");
  const auto c = corpus::load_corpus(testing::mini_corpus_dir());
  std::set<std::string> readings;
  for (const auto& e : c.dictionary) {
    if (e.han_char == "樂") readings.insert(e.hanviet_reading);
  }
  o.check(readings == std::set<std::string>{"lạc", "nhạc"}, "mini corpus keeps both 樂 readings");
  o.detail << "100 random dictionaries; mini " << c.dictionary_raw.size() << " -> "
           << c.dictionary.size();
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"density reproduction", 1, density_reproduction},
      {"relation-share arithmetic", 1, relation_share},
      {"layer-density ordering", 5, layer_density_ordering},
      {"chunking suite", 10, chunking_suite},
      {"chunking benchmark ordering", 60, chunking_benchmark},
      {"retrieval suite", 60, retrieval_suite},
      {"extraction suite", 5, extraction_suite},
      {"schema and determinism", 10, schema_determinism},
      {"query correctness", 30, query_correctness},
      {"dictionary consolidation", 5, dictionary_consolidation},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.failures.push_back(std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs >= c.budget_s) o.failures.push_back("runtime " + fmt(secs, 3) + " s over budget");
    const bool pass = o.failures.empty();
    failed += !pass;
    std::printf("%s  %-28s %7.3f s / %4.0f s  %s\n", pass ? "PASS" : "FAIL", c.name.c_str(), secs,
                c.budget_s, o.detail.str().c_str());
    for (const auto& f : o.failures) std::printf("      - %s\n", f.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  return failed == 0 ? 0 : 1;
}
