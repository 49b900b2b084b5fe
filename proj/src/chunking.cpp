#include "sishu/chunking.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "sishu/error.hpp"

namespace sishu::chunking {

namespace {

using embedding::Vector;

bool is_cjk_stop(char32_t cp) { return cp == U'。' || cp == U'！' || cp == U'？'; }
bool is_ascii_stop(char32_t cp) { return cp == U'.' || cp == U'!' || cp == U'?'; }

bool is_closer(char32_t cp) {
  switch (cp) {
    case U'"': case U'\'': case U')': case U']':
    case U'”': case U'’': case U'」': case U'』': case U'）': case U'》': case U'〉':
      return true;
    default:
      return false;
  }
}

char32_t first_cp(std::string_view s) {
  const auto cps = text::decode(s);
  return cps.empty() ? 0 : cps.front().value;
}

char32_t last_cp(std::string_view s) {
  const auto cps = text::decode(s);
  return cps.empty() ? 0 : cps.back().value;
}

/// Separator used when gluing two pieces of text that were not adjacent.
std::string_view joiner(std::string_view left, std::string_view right) {
  if (left.empty() || right.empty()) return "";
  return text::is_cjk(last_cp(left)) && text::is_cjk(first_cp(right)) ? "" : " ";
}

struct Unit {
  std::string text;
  std::size_t src_begin = 0;
  std::size_t src_end = 0;
  int tokens = 0;
};

/// Shared core of adaptive_chunk and chunk_document. With a non-empty `doc`,
/// chunk content is the exact source substring covering its units.
std::vector<Chunk> chunk_units(const std::vector<Unit>& units, const embedding::Provider& embedder,
                               const ChunkParams& params, std::string_view source_id,
                               std::string_view doc) {
  params.validate();
  if (units.empty()) throw Error(ErrorCode::EmptyInput, "no sentences to chunk");
  for (std::size_t i = 0; i < units.size(); ++i) {
    if (units[i].tokens > params.max_tokens) {
      throw Error(ErrorCode::InvalidArgument,
                  "sentence " + std::to_string(i) + " has " + std::to_string(units[i].tokens) +
                      " tokens, above max_tokens " + std::to_string(params.max_tokens));
    }
  }

  std::vector<Vector> embs;
  embs.reserve(units.size());
  for (const auto& u : units) embs.push_back(embedder.embed(u.text, embedding::Mode::Passage));

  auto content = [&](std::size_t first, std::size_t last) {
    if (!doc.empty()) {
      return std::string(doc.substr(units[first].src_begin,
                                    units[last].src_end - units[first].src_begin));
    }
    std::string out = units[first].text;
    for (std::size_t k = first + 1; k <= last; ++k) {
      out += joiner(out, units[k].text);
      out += units[k].text;
    }
    return out;
  };

  std::vector<Chunk> chunks;
  std::string prefix;  // overlap text, separator included
  int prefix_tokens = 0;
  std::size_t first = 0;
  int open_tokens = units[0].tokens;

  auto close = [&](std::size_t last) {
    Chunk c;
    c.source_id = std::string(source_id);
    c.span_begin = first;
    c.span_end = last;
    c.text = prefix + content(first, last);
    c.overlap_bytes = prefix.size();
    c.token_count = static_cast<int>(text::token_spans(c.text).size());
    c.method = ChunkMethod::Adaptive;
    c.source_begin = units[first].src_begin;
    c.source_end = units[last].src_end;
    chunks.push_back(std::move(c));
  };

  for (std::size_t i = 1; i < units.size(); ++i) {
    const bool over_size = prefix_tokens + open_tokens + units[i].tokens > params.max_tokens;
    const bool topic_shift = coherence(embs, i, params.window) < params.theta;
    const bool long_enough =
        text::length(prefix) + text::length(content(first, i - 1)) >=
        static_cast<std::size_t>(params.min_chars);
    if (!over_size && !(topic_shift && long_enough)) {
      open_tokens += units[i].tokens;
      continue;
    }
    close(i - 1);
    prefix.clear();
    prefix_tokens = 0;
    if (over_size && !topic_shift) {
      const std::string_view prev = chunks.back().own_text();
      const auto spans = text::token_spans(prev);
      const int room = params.max_tokens - units[i].tokens;
      const int k = std::min({params.overlap, room, static_cast<int>(spans.size())});
      if (k > 0) {
        prefix = std::string(prev.substr(spans[spans.size() - k].begin));
        prefix += joiner(prefix, units[i].text);
        prefix_tokens = k;
      }
    }
    first = i;
    open_tokens = units[i].tokens;
  }
  close(units.size() - 1);
  return chunks;
}

}  // namespace

void ChunkParams::validate() const {
  if (window < 1) throw Error(ErrorCode::InvalidArgument, "window must be >= 1");
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "theta must be in [0, 1]");
  }
  if (overlap < 0 || max_tokens <= overlap) {
    throw Error(ErrorCode::InvalidArgument, "need max_tokens > overlap >= 0");
  }
  if (min_chars < 0) throw Error(ErrorCode::InvalidArgument, "min_chars must be >= 0");
  if (!(coverage_min > 0.0 && coverage_min <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "coverage_min must be in (0, 1]");
  }
}

std::string_view to_string(ChunkMethod m) {
  return m == ChunkMethod::Adaptive ? "Adaptive" : "FixedFallback";
}

std::vector<SentenceSpan> split_sentences(std::string_view doc) {
  const auto cps = text::decode(doc);
  std::vector<SentenceSpan> out;
  std::size_t start = 0;
  auto emit = [&](std::size_t end_cp) {
    std::size_t b = start;
    while (b < end_cp && text::is_space(cps[b].value)) ++b;
    std::size_t e = end_cp;
    while (e > b && text::is_space(cps[e - 1].value)) --e;
    if (e > b) out.push_back({cps[b].begin, cps[e - 1].end});
    start = end_cp;
  };
  std::size_t i = 0;
  while (i < cps.size()) {
    const char32_t cp = cps[i].value;
    if (!is_cjk_stop(cp) && !is_ascii_stop(cp)) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < cps.size() && (is_cjk_stop(cps[j].value) || is_ascii_stop(cps[j].value) ||
                              is_closer(cps[j].value))) {
      ++j;
    }
    const bool cjk_run = is_cjk_stop(cp) || (j > i + 1 && is_cjk_stop(cps[j - 1].value));
    if (cjk_run || j == cps.size() || text::is_space(cps[j].value)) emit(j);
    i = j;
  }
  emit(cps.size());
  return out;
}

double coherence(std::span<const Vector> embs, std::size_t i, int w) {
  if (w < 1) throw Error(ErrorCode::InvalidArgument, "window must be >= 1");
  if (i == 0 || i >= embs.size()) {
    throw Error(ErrorCode::IndexError, "coherence undefined at index " + std::to_string(i));
  }
  const std::size_t n = std::min<std::size_t>(i, static_cast<std::size_t>(w));
  double sum = 0.0;
  for (std::size_t j = i - n; j < i; ++j) sum += embedding::cosine(embs[i], embs[j]);
  return sum / static_cast<double>(n);
}

std::vector<Chunk> adaptive_chunk(std::span<const std::string> sentences,
                                  const embedding::Provider& embedder, const ChunkParams& params,
                                  std::string_view source_id) {
  std::vector<Unit> units;
  units.reserve(sentences.size());
  for (const auto& s : sentences) {
    units.push_back({s, 0, 0, static_cast<int>(text::token_spans(s).size())});
  }
  return chunk_units(units, embedder, params, source_id, {});
}

std::vector<Chunk> fixed_chunk(std::string_view doc, int max_tokens, int overlap,
                               std::string_view source_id) {
  if (overlap < 0 || max_tokens <= overlap) {
    throw Error(ErrorCode::InvalidArgument, "need max_tokens > overlap >= 0");
  }
  const auto tokens = text::token_spans(doc);
  std::vector<Chunk> out;
  const std::size_t n = tokens.size();
  const auto window = static_cast<std::size_t>(max_tokens);
  const auto step = static_cast<std::size_t>(max_tokens - overlap);
  for (std::size_t s = 0; s < n; s += step) {
    const std::size_t end = std::min(s + window, n);
    const std::size_t carried = s == 0 ? 0 : static_cast<std::size_t>(overlap);
    Chunk c;
    c.source_id = std::string(source_id);
    c.span_begin = s;
    c.span_end = end - 1;
    c.text = std::string(doc.substr(tokens[s].begin, tokens[end - 1].end - tokens[s].begin));
    c.overlap_bytes = tokens[s + carried].begin - tokens[s].begin;
    c.token_count = static_cast<int>(end - s);
    c.method = ChunkMethod::FixedFallback;
    c.source_begin = tokens[s + carried].begin;
    c.source_end = tokens[end - 1].end;
    out.push_back(std::move(c));
    if (end == n) break;
  }
  return out;
}

double validate_coverage(std::span<const Chunk> chunks, std::string_view source) {
  std::unordered_map<char32_t, long> need;
  long total = 0;
  for (const auto& cp : text::decode(source)) {
    if (text::is_space(cp.value)) continue;
    ++need[cp.value];
    ++total;
  }
  if (total == 0) return 1.0;
  std::unordered_map<char32_t, long> have;
  for (const auto& c : chunks) {
    for (const auto& cp : text::decode(c.own_text())) {
      if (!text::is_space(cp.value)) ++have[cp.value];
    }
  }
  long covered = 0;
  for (const auto& [cp, n] : need) {
    auto it = have.find(cp);
    if (it != have.end()) covered += std::min(n, it->second);
  }
  return static_cast<double>(covered) / static_cast<double>(total);
}

ChunkedDocument apply_fallback(std::vector<Chunk> adaptive, std::string_view doc,
                               const ChunkParams& params, std::string_view source_id) {
  ChunkedDocument out;
  out.coverage = validate_coverage(adaptive, doc);
  if (out.coverage >= params.coverage_min) {
    out.chunks = std::move(adaptive);
    return out;
  }
  out.chunks = fixed_chunk(doc, params.max_tokens, params.overlap, source_id);
  out.coverage = validate_coverage(out.chunks, doc);
  out.fell_back = true;
  return out;
}

ChunkedDocument chunk_document(std::string_view doc, const embedding::Provider& embedder,
                               const ChunkParams& params, std::string_view source_id) {
  params.validate();
  const int piece = params.max_tokens - params.overlap;
  std::vector<Unit> units;
  for (const auto& s : split_sentences(doc)) {
    const std::string_view sentence = doc.substr(s.begin, s.end - s.begin);
    const auto spans = text::token_spans(sentence);
    for (std::size_t k = 0; k < spans.size(); k += static_cast<std::size_t>(piece)) {
      const std::size_t last = std::min(spans.size(), k + static_cast<std::size_t>(piece)) - 1;
      const std::size_t b = s.begin + spans[k].begin;
      const std::size_t e = s.begin + spans[last].end;
      units.push_back({std::string(doc.substr(b, e - b)), b, e, static_cast<int>(last - k + 1)});
    }
  }
  if (units.empty()) throw Error(ErrorCode::EmptyInput, "document has no text");
  return apply_fallback(chunk_units(units, embedder, params, source_id, doc), doc, params,
                        source_id);
}

}  // namespace sishu::chunking
