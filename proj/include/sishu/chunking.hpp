#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sishu/embedding.hpp"
#include "sishu/text.hpp"

namespace sishu::chunking {

using text::tokenize;

struct ChunkParams {
  int window = 3;
  double theta = 0.3;
  int max_tokens = 512;
  int overlap = 100;
  int min_chars = 256;
  double coverage_min = 0.95;

  /// Throws InvalidArgument when a field is out of range.
  void validate() const;
};

enum class ChunkMethod { Adaptive, FixedFallback };

std::string_view to_string(ChunkMethod m);

struct Chunk {
  std::string source_id;
  /// Inclusive span: sentence indices for adaptive chunks, token indices for
  /// fixed-length chunks.
  std::size_t span_begin = 0;
  std::size_t span_end = 0;
  std::string text;
  int token_count = 0;
  ChunkMethod method = ChunkMethod::Adaptive;
  /// Bytes at the front of `text` copied from the previous chunk as context.
  std::size_t overlap_bytes = 0;
  /// Byte range of the chunk's own content in the source document, when the
  /// chunk was cut from one.
  std::size_t source_begin = 0;
  std::size_t source_end = 0;

  std::string_view own_text() const { return std::string_view(text).substr(overlap_bytes); }
  bool operator==(const Chunk&) const = default;
};

/// A sentence as a byte range of its document.
struct SentenceSpan {
  std::size_t begin;
  std::size_t end;
};

/// Splits after 。！？ and after .!? when followed by whitespace or the end of
/// input; trailing closing quotes stay with their sentence.
std::vector<SentenceSpan> split_sentences(std::string_view doc);

/// Mean cosine of embs[i] with its min(i, w) predecessors. Throws IndexError
/// for i == 0 or i out of range, InvalidArgument for w < 1.
double coherence(std::span<const embedding::Vector> embs, std::size_t i, int w);

/// Starts a new chunk at sentence i when coherence(i) < theta (unless the
/// open chunk is under min_chars) or when adding i would exceed max_tokens.
/// Size-forced splits carry up to `overlap` trailing tokens of the previous
/// chunk as a text prefix; spans always partition [0, n-1].
/// Throws EmptyInput for no sentences and InvalidArgument for a sentence
/// longer than max_tokens.
std::vector<Chunk> adaptive_chunk(std::span<const std::string> sentences,
                                  const embedding::Provider& embedder, const ChunkParams& params,
                                  std::string_view source_id = {});

/// Windows of `max_tokens` tokens stepping by max_tokens - overlap.
std::vector<Chunk> fixed_chunk(std::string_view doc, int max_tokens, int overlap,
                               std::string_view source_id = {});

/// Fraction of the source's non-whitespace code points (as a multiset)
/// covered by the chunks' own text, overlap prefixes excluded.
double validate_coverage(std::span<const Chunk> chunks, std::string_view source);

struct ChunkedDocument {
  std::vector<Chunk> chunks;
  double coverage = 0.0;
  bool fell_back = false;
};

/// Replaces `adaptive` with fixed-length chunks of `doc` when its coverage is
/// below params.coverage_min.
ChunkedDocument apply_fallback(std::vector<Chunk> adaptive, std::string_view doc,
                               const ChunkParams& params, std::string_view source_id);

/// Full pipeline for one document: sentence split, over-long sentences cut
/// at token boundaries, adaptive chunking, coverage check and fallback.
ChunkedDocument chunk_document(std::string_view doc, const embedding::Provider& embedder,
                               const ChunkParams& params, std::string_view source_id = {});

}  // namespace sishu::chunking
