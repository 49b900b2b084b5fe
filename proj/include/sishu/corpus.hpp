#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace sishu::corpus {

/// Components of a `<File>.<Sect>.<Page>.<STC>` identifier.
struct IdParts {
  std::string file;
  std::string sect;
  int page = 0;
  int stc = 0;

  bool operator==(const IdParts&) const = default;
};

/// Canonical four-segment sentence identifier.
class CorpusId {
 public:
  CorpusId() = default;

  const std::string& str() const noexcept { return value_; }
  IdParts parts() const;

  bool operator==(const CorpusId&) const = default;
  auto operator<=>(const CorpusId&) const = default;

 private:
  explicit CorpusId(std::string v) : value_(std::move(v)) {}
  std::string value_;

  friend CorpusId make_id(std::string_view, std::string_view, int, int);
};

/// Section ids may carry '.', which collides with the id separator; every '.'
/// is re-encoded as '-'.
std::string encode_section(std::string_view sect);

/// Throws Error{BadFormat} on empty components, a file id containing '.', or
/// page/stc < 1.
CorpusId make_id(std::string_view file, std::string_view sect, int page, int stc);

/// Throws Error{BadFormat} unless the input has exactly four non-empty
/// segments with positive integer page and stc.
IdParts parse_id(std::string_view s);

struct SentenceRecord {
  std::string file_id;
  std::string sect_id;  // canonical (separator-free)
  int page_id = 0;
  int sent_id = 0;
  std::string han_text;
  std::string hanviet_text;
  std::string viet_text;

  CorpusId id() const { return make_id(file_id, sect_id, page_id, sent_id); }
  auto key() const { return std::tie(file_id, sect_id, page_id, sent_id); }
  bool operator==(const SentenceRecord&) const = default;
};

struct DictEntry {
  std::string entry_id;
  std::string han_char;
  std::string hanviet_reading;
  std::vector<std::string> viet_meanings;
  std::string source_book;
  std::string source_chapter;

  bool operator==(const DictEntry&) const = default;
};

struct CommentaryRecord {
  std::string commentary_id;
  std::string expert_name;
  std::string sect_id;
  std::string text;
  /// Set when sect_id did not resolve to a section of the main text.
  bool dangling_section = false;

  bool operator==(const CommentaryRecord&) const = default;
};

struct SectionRef {
  std::string file_id;
  std::string sect_id;

  bool operator==(const SectionRef&) const = default;
  auto operator<=>(const SectionRef&) const = default;
};

struct NormalizeOptions {
  /// ECMAScript regexes; a line whose trimmed text fully matches any of them
  /// is treated as a running header/footer and removed.
  std::vector<std::string> drop_line_patterns;
};

/// NFC, header/footer removal, mid-sentence line-break joining, whitespace
/// collapse. Total and idempotent.
std::string normalize_text(std::string_view raw, const NormalizeOptions& opts = {});

/// Reads line-delimited JSON rows with fields
/// `file_id, sect_id, page_id, sent_id, han, hanviet, viet`.
/// Output is sorted by (file_id, sect_id, page_id, sent_id).
std::vector<SentenceRecord> parse_main_text(std::istream& in, const NormalizeOptions& opts = {});

/// Rows with `entry_id, char, reading, meanings, book, chapter`. `meanings`
/// may be a list of strings or a single ';'-separated string.
std::vector<DictEntry> parse_dictionary(std::istream& in, const NormalizeOptions& opts = {});

/// Tab-separated import: entry_id, char, reading, meanings (';'-separated),
/// book, chapter. A first line starting with "entry_id" is taken as header.
std::vector<DictEntry> parse_dictionary_tsv(std::istream& in, const NormalizeOptions& opts = {});

/// Merges entries sharing (han_char, hanviet_reading). Meanings concatenate in
/// first-occurrence order with exact duplicates removed; the first entry of a
/// group supplies id, book and chapter.
std::vector<DictEntry> consolidate_dictionary(std::span<const DictEntry> entries);

/// Sections referenced by a commentary sect_id. Accepts a bare section id
/// ("1-4" or "1.4") or a file-qualified one ("LY.1-4").
std::vector<SectionRef> resolve_section(std::span<const SentenceRecord> sentences,
                                        std::string_view sect_id);

/// Rows with `commentary_id, expert, sect_id, text`, ordered by sect_id then
/// commentary_id. Unresolvable sections set `dangling_section` instead of
/// failing.
std::vector<CommentaryRecord> parse_commentary(std::istream& in,
                                               std::span<const SentenceRecord> sentences,
                                               const NormalizeOptions& opts = {});

struct Corpus {
  std::vector<SentenceRecord> sentences;
  std::vector<DictEntry> dictionary_raw;
  std::vector<DictEntry> dictionary;  // consolidated
  std::vector<CommentaryRecord> commentary;
  /// sha256 over the three source files.
  std::string hash;

  std::size_t dangling_count() const;
};

/// Loads `main_text.jsonl`, `dictionary.jsonl` and `commentary.jsonl` from a
/// corpus root. A missing commentary or dictionary file is treated as empty.
Corpus load_corpus(const std::filesystem::path& root, const NormalizeOptions& opts = {});

}  // namespace sishu::corpus
