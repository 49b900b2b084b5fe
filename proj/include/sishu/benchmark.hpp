#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "sishu/chunking.hpp"
#include "sishu/embedding.hpp"
#include "sishu/retrieval.hpp"

// Seed-fixed synthetic benchmarks for the retrieval and chunking comparisons.
namespace sishu::benchmark {

struct RetrievalBenchmark {
  std::vector<retrieval::Document> docs;
  std::vector<retrieval::BenchmarkQuery> queries;
};

/// One query per topic, two anchor words then two cue words. Each topic has
/// ten relevant documents dominated by the anchors and two longer off-topic
/// documents that repeat only the rarer cues among modern filler. Lexical scoring saturates term
/// frequency and rewards the rare cue, so the off-topic pair outranks part of
/// the relevant set; cosine similarity follows the concentrated anchor mass.
RetrievalBenchmark synthetic_retrieval(std::uint64_t seed = 7, int topics = 40);

struct Segment {
  std::size_t begin;  // byte range in the document
  std::size_t end;
};

struct ChunkingDoc {
  std::string id;
  std::string text;
  std::vector<Segment> segments;
};

struct ChunkingQuery {
  std::string query;
  std::size_t doc;      // index into docs
  std::size_t segment;  // index into that doc's segments
};

struct ChunkingBenchmark {
  std::vector<ChunkingDoc> docs;
  std::vector<ChunkingQuery> queries;
};

/// Multi-topic documents: each segment draws most of its words from a small
/// topic vocabulary, the rest from a shared pool. One query per segment.
ChunkingBenchmark synthetic_chunking(std::uint64_t seed = 11, int docs = 10);

/// Intersection over union of two half-open byte ranges.
double span_iou(std::size_t a_begin, std::size_t a_end, std::size_t b_begin, std::size_t b_end);

struct ChunkingScores {
  double recall_at_5 = 0.0;
  double ndcg_at_5 = 0.0;
  std::size_t chunk_count = 0;
};

struct ChunkingComparison {
  std::size_t query_count = 0;
  ChunkingScores adaptive;
  ChunkingScores fixed;

  nlohmann::json to_json() const;
  std::string to_table() const;
};

/// Chunks every document adaptively and with fixed windows (max_tokens,
/// no overlap), retrieves chunks per query by cosine, and counts a chunk as
/// relevant when its span overlaps the query's segment with IoU >= 0.5.
ChunkingComparison compare_chunking(const ChunkingBenchmark& bench,
                                    const embedding::Provider& embedder,
                                    const chunking::ChunkParams& params);

}  // namespace sishu::benchmark
