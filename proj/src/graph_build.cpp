#include "sishu/graph_build.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <thread>

#include "sishu/error.hpp"
#include "sishu/text.hpp"

namespace sishu::graph {

namespace {

using C = EntityClass;
using R = RelationType;
using nlohmann::json;

std::string chapter_of(std::string_view sect) {
  const auto dash = sect.find('-');
  return std::string(dash == std::string_view::npos ? sect : sect.substr(0, dash));
}

std::string sentence_key(const corpus::SentenceRecord& r) { return r.id().str(); }

std::vector<std::string> distinct_words(std::string_view han) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& tok : text::tokenize(han)) {
    if (text::is_word_token(tok) && seen.insert(tok).second) out.push_back(tok);
  }
  return out;
}

/// Picks ceil(rate * n) distinct indices with a seeded partial shuffle and
/// returns them ascending. Uses the engine's raw output so the selection is
/// identical across standard libraries.
std::vector<std::size_t> sample_indices(std::size_t n, double rate, std::uint64_t seed) {
  const auto want = std::min<std::size_t>(
      n, static_cast<std::size_t>(std::ceil(rate * static_cast<double>(n) - 1e-9)));
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < want; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(want);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

nlohmann::json BuildConfig::to_json() const {
  json classes = json::array();
  for (auto c : embed_classes) classes.push_back(ontology::to_string(c));
  return json{{"domain", domain},
              {"school", school},
              {"chunk",
               {{"window", chunk.window},
                {"theta", chunk.theta},
                {"max_tokens", chunk.max_tokens},
                {"overlap", chunk.overlap},
                {"min_chars", chunk.min_chars},
                {"coverage_min", chunk.coverage_min}}},
              {"contextualize_threshold", contextualize_threshold},
              {"contextualize_whole_corpus", contextualize_whole_corpus},
              {"verify_rate", verify_rate},
              {"verify_seed", verify_seed},
              {"similar_top_k", similar_top_k},
              {"similar_min", similar_min},
              {"cluster_threshold", cluster_threshold},
              {"embed_classes", classes}};
}

void build_textual(Graph& g, std::span<const corpus::SentenceRecord> records,
                   const BuildConfig& cfg) {
  const auto& domain = g.add_node(C::DOMAIN, cfg.domain, {{"name", cfg.domain}});
  const std::string domain_id = domain.id;
  const std::string school_id = g.add_node(C::SCHOOL, cfg.school, {{"name", cfg.school}}).id;
  g.add_edge_once(make_edge(domain_id, school_id, R::CONTAINS));

  const corpus::SentenceRecord* prev = nullptr;
  std::string prev_id;
  for (const auto& r : records) {
    const std::string book_key = r.file_id;
    const std::string chapter_key = r.file_id + "." + chapter_of(r.sect_id);
    const std::string section_key = r.file_id + "." + r.sect_id;
    const std::string page_key = section_key + "." + std::to_string(r.page_id);
    const std::string key = sentence_key(r);

    const std::string book = g.add_node(C::BOOK, book_key, {{"name", r.file_id}}).id;
    const std::string chapter = g.add_node(C::CHAPTER, chapter_key, {{"book", r.file_id}}).id;
    const std::string section =
        g.add_node(C::SECTION, section_key, {{"book", r.file_id}, {"sect_id", r.sect_id}}).id;
    const std::string page =
        g.add_node(C::PAGE, page_key, {{"section", section_key}, {"page", r.page_id}}).id;
    const std::string sentence = g.add_node(C::SENTENCE, key,
                                            {{"corpus_id", key},
                                             {"han", r.han_text},
                                             {"hanviet", r.hanviet_text},
                                             {"viet", r.viet_text}})
                                     .id;
    g.add_edge_once(make_edge(school_id, book, R::CONTAINS));
    g.add_edge_once(make_edge(book, chapter, R::CONTAINS));
    g.add_edge_once(make_edge(chapter, section, R::CONTAINS));
    g.add_edge_once(make_edge(section, page, R::CONTAINS));
    g.add_edge_once(make_edge(page, sentence, R::CONTAINS));

    if (prev != nullptr && prev->file_id == r.file_id && prev->sect_id == r.sect_id) {
      g.add_edge_once(make_edge(prev_id, sentence, R::FOLLOWS));
    }
    prev = &r;
    prev_id = sentence;
  }
}

void build_linguistic(Graph& g, std::span<const corpus::SentenceRecord> records,
                      std::span<const corpus::DictEntry> dictionary,
                      const embedding::Provider& embedder, BuildReport& report) {
  std::map<std::string, std::vector<const corpus::DictEntry*>> by_char;
  for (const auto& e : dictionary) by_char[e.han_char].push_back(&e);
  std::set<std::string> gaps;

  for (const auto& r : records) {
    const std::string key = sentence_key(r);
    const std::string sentence = node_id(C::SENTENCE, key);
    const std::string han =
        g.add_node(C::HAN_SENTENCE, key, {{"text", r.han_text}, {"corpus_id", key}}).id;
    const std::string hanviet =
        g.add_node(C::HANVIET_SENTENCE, key, {{"text", r.hanviet_text}, {"corpus_id", key}}).id;
    const std::string viet =
        g.add_node(C::VIETNAMESE_SENTENCE, key, {{"text", r.viet_text}, {"corpus_id", key}}).id;
    g.add_edge_once(make_edge(sentence, han, R::HAS_HAN_FORM));
    g.add_edge_once(make_edge(sentence, hanviet, R::HAS_HANVIET_FORM));
    g.add_edge_once(make_edge(sentence, viet, R::HAS_VIETNAMESE_TRANSLATION));

    const std::string context = r.han_text + "\n" + r.hanviet_text + "\n" + r.viet_text;
    json audit = json::array();
    for (const auto& w : distinct_words(r.han_text)) {
      const std::string word = g.add_node(C::HAN_WORD, w, {{"text", w}}).id;
      g.add_edge_once(make_edge(word, han, R::APPEARS_IN));

      auto it = by_char.find(w);
      if (it == by_char.end()) {
        gaps.insert(w);
        continue;
      }
      std::vector<std::string> candidates;
      for (const auto* entry : it->second) {
        const std::string reading =
            g.add_node(C::HANVIET_PRONUNCIATION, entry->hanviet_reading,
                       {{"text", entry->hanviet_reading}})
                .id;
        g.add_edge_once(make_edge(word, reading, R::PRONOUNCED_AS));
        for (const auto& m : entry->viet_meanings) {
          if (std::find(candidates.begin(), candidates.end(), m) == candidates.end()) {
            candidates.push_back(m);
          }
        }
      }
      if (candidates.empty()) continue;
      const auto sense = extraction::resolve_sense(w, candidates, context, embedder);
      const std::string meaning =
          g.add_node(C::VIETNAMESE_MEANING, sense.chosen, {{"text", sense.chosen}}).id;
      g.add_edge_once(make_edge(word, meaning, R::TRANSLATES_TO));
      if (candidates.size() > 1) {
        json scores = json::array();
        for (const auto& s : sense.audit) scores.push_back({{"meaning", s.meaning}, {"score", s.score}});
        audit.push_back({{"word", w}, {"chosen", sense.chosen}, {"candidates", scores}});
      }
    }
    if (!audit.empty()) g.find_mutable(han)->attrs["sense_audit"] = std::move(audit);
  }
  report.dictionary_gaps.assign(gaps.begin(), gaps.end());
}

void build_conceptual(Graph& g, std::span<const corpus::SentenceRecord> records,
                      std::span<const extraction::ConceptDef> taxonomy) {
  std::vector<std::string> ids;
  for (const auto& def : taxonomy) {
    ids.push_back(g.add_node(C::PHILOSOPHICAL_CONCEPT, def.character,
                             {{"char", def.character},
                              {"english", def.english},
                              {"vietnamese", def.vietnamese},
                              {"category", extraction::to_string(def.category)}})
                      .id);
  }
  for (std::size_t i = 0; i < taxonomy.size(); ++i) {
    for (std::size_t j = i + 1; j < taxonomy.size(); ++j) {
      if (taxonomy[i].category == taxonomy[j].category) {
        g.add_edge_once(make_edge(ids[i], ids[j], R::RELATED_TO));
      }
    }
  }

  std::map<std::string, std::set<std::string>> by_sentence;
  for (const auto& r : records) {
    const std::string key = sentence_key(r);
    for (const auto& hit : extraction::extract_concepts(r.han_text, taxonomy, key)) {
      g.add_edge_once(make_edge(node_id(C::SENTENCE, key),
                                node_id(C::PHILOSOPHICAL_CONCEPT, hit.concept_def.character),
                                R::EXPRESSES_CONCEPT, static_cast<double>(hit.count)));
      by_sentence[key].insert(hit.concept_def.character);
    }
  }
  const auto pairs = extraction::cooccurrence(by_sentence);
  for (std::size_t i = 0; i < taxonomy.size(); ++i) {
    for (std::size_t j = i + 1; j < taxonomy.size(); ++j) {
      auto it = pairs.find({taxonomy[i].character, taxonomy[j].character});
      if (it == pairs.end()) continue;
      g.add_edge_once(make_edge(ids[i], ids[j], R::CO_OCCURS_WITH, static_cast<double>(it->second)));
    }
  }
}

void build_commentary(Graph& g, std::span<const corpus::CommentaryRecord> commentary,
                      std::span<const corpus::SentenceRecord> records,
                      const embedding::Provider& embedder, const BuildConfig& cfg,
                      BuildReport& report) {
  std::vector<std::size_t> contextualizes;
  for (const auto& c : commentary) {
    const std::string expert = g.add_node(C::EXPERT, c.expert_name, {{"name", c.expert_name}}).id;
    const std::string comm = g.add_node(C::COMMENTARY, c.commentary_id,
                                        {{"text", c.text},
                                         {"sect_id", c.sect_id},
                                         {"expert", c.expert_name},
                                         {"dangling_section", c.dangling_section}})
                                 .id;
    g.add_edge_once(make_edge(expert, comm, R::PROVIDES_COMMENTARY));

    const auto refs = corpus::resolve_section(records, c.sect_id);
    std::set<std::string> books;
    for (const auto& ref : refs) {
      g.add_edge_once(make_edge(comm, node_id(C::SECTION, ref.file_id + "." + ref.sect_id),
                                R::EXPLAINS));
      books.insert(ref.file_id);
    }
    if (c.dangling_section) ++report.dangling_commentary;

    const auto doc = chunking::chunk_document(c.text, embedder, cfg.chunk, c.commentary_id);
    if (doc.fell_back) ++report.fallback_chunked;

    std::string prev_chunk;
    for (std::size_t k = 0; k < doc.chunks.size(); ++k) {
      const auto& ch = doc.chunks[k];
      const std::string chunk =
          g.add_node(C::COMMENTARY_CHUNK, c.commentary_id + "#" + std::to_string(k),
                     {{"text", ch.text},
                      {"commentary_id", c.commentary_id},
                      {"index", k},
                      {"span", {ch.span_begin, ch.span_end}},
                      {"token_count", ch.token_count},
                      {"method", chunking::to_string(ch.method)}})
              .id;
      g.add_edge_once(make_edge(comm, chunk, R::CONTAINS));
      if (!prev_chunk.empty()) g.add_edge_once(make_edge(prev_chunk, chunk, R::FOLLOWS));
      prev_chunk = chunk;

      const auto chunk_vec = embedder.embed(ch.text, embedding::Mode::Passage);
      if (chunk_vec.flagged()) continue;
      for (const auto& r : records) {
        if (!cfg.contextualize_whole_corpus && !books.contains(r.file_id)) continue;
        const std::string sentence = node_id(C::SENTENCE, sentence_key(r));
        const auto sv = embedder.embed(embedding_text(*g.find(sentence)), embedding::Mode::Passage);
        const double cos = embedding::cosine(chunk_vec, sv);
        if (cos >= cfg.contextualize_threshold) {
          if (g.add_edge_once(make_edge(chunk, sentence, R::CONTEXTUALIZES, cos))) {
            contextualizes.push_back(g.edge_count() - 1);
          }
        }
      }
    }
  }
  for (std::size_t i : sample_indices(contextualizes.size(), cfg.verify_rate, cfg.verify_seed)) {
    report.verification_queue.push_back(g.edges()[contextualizes[i]]);
  }
}

void build_speaker(Graph& g, std::span<const corpus::SentenceRecord> records,
                   std::span<const extraction::SpeakerPattern> patterns) {
  std::map<std::string, std::vector<std::string>> markers;
  for (const auto& p : patterns) markers[p.speaker_name].push_back(p.marker);
  for (const auto& r : records) {
    const std::string han = node_id(C::HAN_SENTENCE, sentence_key(r));
    for (const auto& hit : extraction::detect_speakers(r.han_text, patterns)) {
      const std::string speaker =
          g.add_node(C::SPEAKER, hit.speaker_name,
                     {{"name", hit.speaker_name}, {"markers", markers[hit.speaker_name]}})
              .id;
      g.add_edge_once(make_edge(speaker, han, R::QUOTES));
    }
  }
}

std::string embedding_text(const Node& n) {
  if (n.cls == C::SENTENCE) {
    return n.attrs.value("han", "") + "\n" + n.attrs.value("hanviet", "") + "\n" +
           n.attrs.value("viet", "");
  }
  return n.attrs.value("text", "");
}

void build_semantic(Graph& g, const embedding::Provider& embedder, const BuildConfig& cfg) {
  struct Source {
    std::string id;
    std::string text;
  };
  std::vector<Source> sources;
  for (const auto& n : g.nodes()) {
    if (cfg.embed_classes.contains(n.cls)) sources.push_back({n.id, embedding_text(n)});
  }

  std::vector<std::string> emb_ids;
  std::vector<embedding::Vector> vecs;
  for (const auto& s : sources) {
    auto v = embedder.embed(s.text, embedding::Mode::Passage);
    Node n;
    n.id = node_id(C::EMBEDDING, s.id);
    n.cls = C::EMBEDDING;
    n.layer = ontology::home_layer(C::EMBEDDING);
    n.attrs = {{"source", s.id}, {"flagged", v.flagged()}, {"dim", v.dim()}};
    n.vector.assign(v.values().begin(), v.values().end());
    g.add_node(std::move(n));
    g.add_edge_once(make_edge(s.id, node_id(C::EMBEDDING, s.id), R::HAS_SEMANTIC_REP));
    emb_ids.push_back(node_id(C::EMBEDDING, s.id));
    vecs.push_back(std::move(v));
  }

  // Exact top-k neighbours; rows are independent, so they are computed in
  // parallel and inserted afterwards in row order.
  const std::size_t n = vecs.size();
  std::vector<std::vector<std::pair<double, std::size_t>>> neighbours(n);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      if (vecs[i].flagged()) continue;
      auto& row = neighbours[i];
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i || vecs[j].flagged()) continue;
        const double cos = embedding::cosine(vecs[i], vecs[j]);
        if (cos >= cfg.similar_min) row.emplace_back(cos, j);
      }
      std::sort(row.begin(), row.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return emb_ids[a.second] < emb_ids[b.second];
      });
      if (row.size() > static_cast<std::size_t>(cfg.similar_top_k)) {
        row.resize(static_cast<std::size_t>(std::max(cfg.similar_top_k, 0)));
      }
    }
  };
  const std::size_t workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 16);
  if (n < 256 || workers == 1) {
    work(0, n);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t per = (n + workers - 1) / workers;
    for (std::size_t b = 0; b < n; b += per) pool.emplace_back(work, b, std::min(n, b + per));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [cos, j] : neighbours[i]) {
      g.add_edge_once(make_edge(emb_ids[i], emb_ids[j], R::SIMILAR_TO, cos));
    }
  }

  std::vector<std::pair<std::string, embedding::Vector>> items;
  for (std::size_t i = 0; i < n; ++i) {
    if (!vecs[i].flagged()) items.emplace_back(emb_ids[i], vecs[i]);
  }
  if (items.empty()) return;
  for (const auto& c : embedding::cluster(items, cfg.cluster_threshold)) {
    Node node;
    node.id = node_id(C::SEMANTIC_CLUSTER, std::to_string(c.cluster_id));
    node.cls = C::SEMANTIC_CLUSTER;
    node.layer = ontology::home_layer(C::SEMANTIC_CLUSTER);
    node.attrs = {{"size", c.member_ids.size()}, {"leader", c.member_ids.front()}};
    node.vector.assign(c.centroid.values().begin(), c.centroid.values().end());
    const std::string cid = g.add_node(std::move(node)).id;
    for (std::size_t m = 0; m < c.member_ids.size(); ++m) {
      g.add_edge_once(make_edge(c.member_ids[m], cid, R::BELONGS_TO_CLUSTER,
                                c.leader_similarity[m]));
    }
  }
}

Graph build_graph(const corpus::Corpus& corpus, std::span<const extraction::ConceptDef> taxonomy,
                  std::span<const extraction::SpeakerPattern> speakers,
                  const embedding::Provider& embedder, const BuildConfig& cfg,
                  BuildReport* report) {
  cfg.chunk.validate();
  BuildReport local;
  BuildReport& rep = report != nullptr ? *report : local;
  const embedding::CachingProvider cached(embedder);

  Graph g;
  g.header.corpus_hash = corpus.hash;
  g.header.embedder_id = embedder.id();
  g.header.seeds = {{"verify_seed", cfg.verify_seed}};
  g.header.config = cfg.to_json();

  build_textual(g, corpus.sentences, cfg);
  build_linguistic(g, corpus.sentences, corpus.dictionary, cached, rep);
  build_conceptual(g, corpus.sentences, taxonomy);
  build_commentary(g, corpus.commentary, corpus.sentences, cached, cfg, rep);
  build_speaker(g, corpus.sentences, speakers);
  build_semantic(g, cached, cfg);
  return g;
}

}  // namespace sishu::graph
