#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sishu/chunking.hpp"
#include "sishu/corpus.hpp"
#include "sishu/embedding.hpp"
#include "sishu/extraction.hpp"
#include "sishu/graph.hpp"

namespace sishu::graph {

struct BuildConfig {
  std::string domain = "Philosophy";
  std::string school = "Confucianism";
  chunking::ChunkParams chunk;
  double contextualize_threshold = 0.75;
  bool contextualize_whole_corpus = false;
  double verify_rate = 0.10;
  std::uint64_t verify_seed = 42;
  int similar_top_k = 5;
  double similar_min = 0.75;
  double cluster_threshold = 0.75;
  std::set<EntityClass> embed_classes = {EntityClass::SENTENCE, EntityClass::VIETNAMESE_SENTENCE,
                                         EntityClass::COMMENTARY_CHUNK};

  nlohmann::json to_json() const;
};

/// Side products of a build that are not graph content.
struct BuildReport {
  /// Sampled CONTEXTUALIZES edges awaiting human review.
  std::vector<Edge> verification_queue;
  /// HAN_WORD tokens with no dictionary entry.
  std::vector<std::string> dictionary_gaps;
  std::size_t dangling_commentary = 0;
  std::size_t fallback_chunked = 0;
};

/// Textual hierarchy: DOMAIN and SCHOOL roots, BOOK > CHAPTER > SECTION >
/// PAGE > SENTENCE via CONTAINS, FOLLOWS between consecutive sentences of a
/// section. The chapter is the section id up to its first '-'.
void build_textual(Graph& g, std::span<const corpus::SentenceRecord> records,
                   const BuildConfig& cfg);

/// Tri-parallel form nodes, HAN_WORD tokens with APPEARS_IN, and dictionary
/// readings and meanings. Meanings of polysemous words are chosen per
/// sentence by sense resolution; the audit lands on the HAN_SENTENCE node.
void build_linguistic(Graph& g, std::span<const corpus::SentenceRecord> records,
                      std::span<const corpus::DictEntry> dictionary,
                      const embedding::Provider& embedder, BuildReport& report);

/// Concept nodes, EXPRESSES_CONCEPT per sentence hit (weight = count),
/// RELATED_TO within a category and CO_OCCURS_WITH (weight = sentences),
/// both stored once per pair in taxonomy order.
void build_conceptual(Graph& g, std::span<const corpus::SentenceRecord> records,
                      std::span<const extraction::ConceptDef> taxonomy);

/// Experts, commentaries, chunks and their links to the base text.
void build_commentary(Graph& g, std::span<const corpus::CommentaryRecord> commentary,
                      std::span<const corpus::SentenceRecord> records,
                      const embedding::Provider& embedder, const BuildConfig& cfg,
                      BuildReport& report);

/// SPEAKER nodes and QUOTES edges from attribution markers.
void build_speaker(Graph& g, std::span<const corpus::SentenceRecord> records,
                   std::span<const extraction::SpeakerPattern> patterns);

/// EMBEDDING nodes for every node of an embedded class, SIMILAR_TO top-k
/// neighbours above the similarity floor, and leader clusters.
void build_semantic(Graph& g, const embedding::Provider& embedder, const BuildConfig& cfg);

/// Text used to embed a node of an embedded class.
std::string embedding_text(const Node& n);

/// Runs every layer builder in order and fills the header.
Graph build_graph(const corpus::Corpus& corpus, std::span<const extraction::ConceptDef> taxonomy,
                  std::span<const extraction::SpeakerPattern> speakers,
                  const embedding::Provider& embedder, const BuildConfig& cfg,
                  BuildReport* report = nullptr);

}  // namespace sishu::graph
