#include "sishu/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sishu/error.hpp"
#include "sishu/text.hpp"

namespace sishu::corpus {

using nlohmann::json;

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

bool parse_positive(std::string_view s, int& out) {
  if (s.empty()) return false;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && out >= 1;
}

std::string collapse_spaces(std::string_view line) {
  std::string out;
  bool pending_space = false;
  for (const auto& cp : text::decode(line)) {
    if (text::is_space(cp.value)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.append(line.substr(cp.begin, cp.end - cp.begin));
  }
  return out;
}

char32_t first_cp(std::string_view s) {
  const auto cps = text::decode(s);
  return cps.empty() ? 0 : cps.front().value;
}

char32_t last_cp(std::string_view s) {
  const auto cps = text::decode(s);
  return cps.empty() ? 0 : cps.back().value;
}

/// Line context for error messages.
std::string where(std::size_t line_no) { return "line " + std::to_string(line_no) + ": "; }

template <typename Fn>
void for_each_json_row(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::BadFormat, where(line_no) + e.what());
    }
    if (!row.is_object()) {
      throw Error(ErrorCode::BadFormat, where(line_no) + "expected an object");
    }
    fn(row, line_no);
  }
}

const json& require(const json& row, const char* field, std::size_t line_no) {
  auto it = row.find(field);
  if (it == row.end() || it->is_null()) {
    throw Error(ErrorCode::MissingField, where(line_no) + "missing field '" + field + "'");
  }
  return *it;
}

std::string require_string(const json& row, const char* field, std::size_t line_no) {
  const json& v = require(row, field, line_no);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw Error(ErrorCode::BadFormat, where(line_no) + "field '" + field + "' must be a string");
}

int require_positive(const json& row, const char* field, std::size_t line_no) {
  const json& v = require(row, field, line_no);
  int out = 0;
  if (v.is_number_integer()) {
    const auto n = v.get<long long>();
    if (n >= 1 && n <= std::numeric_limits<int>::max()) return static_cast<int>(n);
  } else if (v.is_string()) {
    if (parse_positive(text::trim(v.get<std::string>()), out)) return out;
  }
  throw Error(ErrorCode::BadFormat,
              where(line_no) + "field '" + field + "' must be an integer >= 1");
}

std::vector<std::string> normalize_meanings(const std::vector<std::string>& raw,
                                            const NormalizeOptions& opts) {
  std::vector<std::string> out;
  for (const auto& m : raw) {
    for (auto piece : split(m, ';')) {
      auto norm = normalize_text(piece, opts);
      if (!norm.empty()) out.push_back(std::move(norm));
    }
  }
  return out;
}

DictEntry make_entry(std::string entry_id, std::string han_char, std::string reading,
                     const std::vector<std::string>& meanings, std::string book,
                     std::string chapter, std::size_t line_no, const NormalizeOptions& opts) {
  DictEntry e;
  e.entry_id = text::trim(entry_id);
  e.han_char = normalize_text(han_char, opts);
  if (e.han_char.empty()) {
    throw Error(ErrorCode::EmptyCharacter, where(line_no) + "blank character field");
  }
  e.hanviet_reading = normalize_text(reading, opts);
  e.viet_meanings = normalize_meanings(meanings, opts);
  if (e.viet_meanings.empty()) {
    throw Error(ErrorCode::MissingField, where(line_no) + "entry has no meanings");
  }
  e.source_book = normalize_text(book, opts);
  e.source_chapter = normalize_text(chapter, opts);
  return e;
}

}  // namespace

// ---------------------------------------------------------------------------
// Identifiers

std::string encode_section(std::string_view sect) {
  std::string out(sect);
  std::replace(out.begin(), out.end(), '.', '-');
  return out;
}

CorpusId make_id(std::string_view file, std::string_view sect, int page, int stc) {
  if (file.empty() || sect.empty()) {
    throw Error(ErrorCode::BadFormat, "identifier components must be non-empty");
  }
  if (file.find('.') != std::string_view::npos) {
    throw Error(ErrorCode::BadFormat, "file id must not contain '.'");
  }
  if (page < 1 || stc < 1) {
    throw Error(ErrorCode::BadFormat, "page and sentence numbers start at 1");
  }
  std::string v;
  v.reserve(file.size() + sect.size() + 16);
  v.append(file).push_back('.');
  v.append(encode_section(sect)).push_back('.');
  v.append(std::to_string(page)).push_back('.');
  v.append(std::to_string(stc));
  return CorpusId(std::move(v));
}

IdParts parse_id(std::string_view s) {
  const auto segs = split(s, '.');
  if (segs.size() != 4) {
    throw Error(ErrorCode::BadFormat, "expected <File>.<Sect>.<Page>.<STC>, got '" +
                                          std::string(s) + "'");
  }
  IdParts p;
  p.file = std::string(segs[0]);
  p.sect = std::string(segs[1]);
  if (p.file.empty() || p.sect.empty() || !parse_positive(segs[2], p.page) ||
      !parse_positive(segs[3], p.stc)) {
    throw Error(ErrorCode::BadFormat, "malformed identifier '" + std::string(s) + "'");
  }
  return p;
}

IdParts CorpusId::parts() const { return parse_id(value_); }

// ---------------------------------------------------------------------------
// Normalization

std::string normalize_text(std::string_view raw, const NormalizeOptions& opts) {
  if (raw.empty()) return {};
  const std::string composed = text::nfc(raw);

  std::vector<std::regex> drops;
  drops.reserve(opts.drop_line_patterns.size());
  for (const auto& p : opts.drop_line_patterns) drops.emplace_back(p);

  std::vector<std::string> lines;
  for (auto line : split(composed, '\n')) {
    auto trimmed = collapse_spaces(text::trim(line));
    if (trimmed.empty()) continue;
    const bool dropped = std::any_of(drops.begin(), drops.end(), [&](const std::regex& re) {
      return std::regex_match(trimmed, re);
    });
    if (!dropped) lines.push_back(std::move(trimmed));
  }

  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i > 0) {
      const char32_t prev = last_cp(lines[i - 1]);
      const char32_t next = first_cp(lines[i]);
      if (text::is_terminal_punct(prev)) {
        out.push_back('\n');
      } else if (!(text::is_cjk(prev) && text::is_cjk(next))) {
        out.push_back(' ');
      }
    }
    out += lines[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parsers

std::vector<SentenceRecord> parse_main_text(std::istream& in, const NormalizeOptions& opts) {
  std::vector<SentenceRecord> records;
  std::set<std::tuple<std::string, std::string, int, int>> seen;
  for_each_json_row(in, [&](const json& row, std::size_t line_no) {
    SentenceRecord r;
    r.file_id = text::trim(require_string(row, "file_id", line_no));
    r.sect_id = encode_section(text::trim(require_string(row, "sect_id", line_no)));
    r.page_id = require_positive(row, "page_id", line_no);
    r.sent_id = require_positive(row, "sent_id", line_no);
    r.han_text = normalize_text(require_string(row, "han", line_no), opts);
    r.hanviet_text = normalize_text(require_string(row, "hanviet", line_no), opts);
    r.viet_text = normalize_text(require_string(row, "viet", line_no), opts);
    if (r.file_id.empty() || r.sect_id.empty() || r.file_id.find('.') != std::string::npos) {
      throw Error(ErrorCode::BadFormat, where(line_no) + "invalid file_id or sect_id");
    }
    for (const auto* layer : {&r.han_text, &r.hanviet_text, &r.viet_text}) {
      if (layer->empty()) {
        throw Error(ErrorCode::EmptyLayer,
                    where(line_no) + "empty text layer in " + r.id().str());
      }
    }
    if (!seen.emplace(r.file_id, r.sect_id, r.page_id, r.sent_id).second) {
      throw Error(ErrorCode::DuplicateId, where(line_no) + "duplicate id " + r.id().str());
    }
    records.push_back(std::move(r));
  });
  std::sort(records.begin(), records.end(),
            [](const SentenceRecord& a, const SentenceRecord& b) { return a.key() < b.key(); });
  return records;
}

std::vector<DictEntry> parse_dictionary(std::istream& in, const NormalizeOptions& opts) {
  std::vector<DictEntry> entries;
  for_each_json_row(in, [&](const json& row, std::size_t line_no) {
    const json& m = require(row, "meanings", line_no);
    std::vector<std::string> meanings;
    if (m.is_string()) {
      meanings.push_back(m.get<std::string>());
    } else if (m.is_array()) {
      for (const auto& v : m) {
        if (!v.is_string()) {
          throw Error(ErrorCode::BadFormat, where(line_no) + "meanings must be strings");
        }
        meanings.push_back(v.get<std::string>());
      }
    } else {
      throw Error(ErrorCode::BadFormat, where(line_no) + "meanings must be a list");
    }
    entries.push_back(make_entry(require_string(row, "entry_id", line_no),
                                 require_string(row, "char", line_no),
                                 require_string(row, "reading", line_no), meanings,
                                 require_string(row, "book", line_no),
                                 require_string(row, "chapter", line_no), line_no, opts));
  });
  return entries;
}

std::vector<DictEntry> parse_dictionary_tsv(std::istream& in, const NormalizeOptions& opts) {
  std::vector<DictEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    if (line_no == 1 && line.rfind("entry_id", 0) == 0) continue;
    const auto cols = split(line, '\t');
    if (cols.size() < 6) {
      throw Error(ErrorCode::MissingField,
                  where(line_no) + "expected 6 tab-separated columns, got " +
                      std::to_string(cols.size()));
    }
    entries.push_back(make_entry(std::string(cols[0]), std::string(cols[1]),
                                 std::string(cols[2]), {std::string(cols[3])},
                                 std::string(cols[4]), std::string(cols[5]), line_no, opts));
  }
  return entries;
}

std::vector<DictEntry> consolidate_dictionary(std::span<const DictEntry> entries) {
  std::vector<DictEntry> out;
  std::map<std::pair<std::string, std::string>, std::size_t> group;
  for (const auto& e : entries) {
    auto [it, inserted] = group.try_emplace({e.han_char, e.hanviet_reading}, out.size());
    if (inserted) {
      DictEntry merged = e;
      merged.viet_meanings.clear();
      out.push_back(std::move(merged));
    }
    auto& target = out[it->second].viet_meanings;
    for (const auto& m : e.viet_meanings) {
      if (std::find(target.begin(), target.end(), m) == target.end()) target.push_back(m);
    }
  }
  return out;
}

std::vector<SectionRef> resolve_section(std::span<const SentenceRecord> sentences,
                                        std::string_view sect_id) {
  std::set<SectionRef> found;
  const std::string bare = encode_section(text::trim(sect_id));
  for (const auto& s : sentences) {
    if (s.sect_id == bare) found.insert({s.file_id, s.sect_id});
  }
  if (found.empty()) {
    const auto trimmed = text::trim(sect_id);
    const auto dot = trimmed.find('.');
    if (dot != std::string::npos) {
      const std::string file = trimmed.substr(0, dot);
      const std::string sect = encode_section(trimmed.substr(dot + 1));
      for (const auto& s : sentences) {
        if (s.file_id == file && s.sect_id == sect) found.insert({s.file_id, s.sect_id});
      }
    }
  }
  return {found.begin(), found.end()};
}

std::vector<CommentaryRecord> parse_commentary(std::istream& in,
                                               std::span<const SentenceRecord> sentences,
                                               const NormalizeOptions& opts) {
  std::vector<CommentaryRecord> records;
  for_each_json_row(in, [&](const json& row, std::size_t line_no) {
    CommentaryRecord r;
    r.commentary_id = text::trim(require_string(row, "commentary_id", line_no));
    r.expert_name = normalize_text(require_string(row, "expert", line_no), opts);
    r.sect_id = text::trim(require_string(row, "sect_id", line_no));
    r.text = normalize_text(require_string(row, "text", line_no), opts);
    if (r.commentary_id.empty() || r.expert_name.empty() || r.sect_id.empty()) {
      throw Error(ErrorCode::MissingField, where(line_no) + "blank commentary field");
    }
    if (r.text.empty()) {
      throw Error(ErrorCode::EmptyLayer, where(line_no) + "empty commentary text");
    }
    r.dangling_section = resolve_section(sentences, r.sect_id).empty();
    records.push_back(std::move(r));
  });
  std::stable_sort(records.begin(), records.end(),
                   [](const CommentaryRecord& a, const CommentaryRecord& b) {
                     return std::tie(a.sect_id, a.commentary_id) <
                            std::tie(b.sect_id, b.commentary_id);
                   });
  return records;
}

std::size_t Corpus::dangling_count() const {
  return static_cast<std::size_t>(std::count_if(
      commentary.begin(), commentary.end(),
      [](const CommentaryRecord& c) { return c.dangling_section; }));
}

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot open " + p.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

Corpus load_corpus(const std::filesystem::path& root, const NormalizeOptions& opts) {
  const auto main_path = root / "main_text.jsonl";
  const auto dict_path = root / "dictionary.jsonl";
  const auto comm_path = root / "commentary.jsonl";
  if (!std::filesystem::exists(main_path)) {
    throw Error(ErrorCode::Io, "corpus root lacks main_text.jsonl: " + root.string());
  }
  const std::string main_src = slurp(main_path);
  const std::string dict_src =
      std::filesystem::exists(dict_path) ? slurp(dict_path) : std::string();
  const std::string comm_src =
      std::filesystem::exists(comm_path) ? slurp(comm_path) : std::string();

  Corpus c;
  {
    std::istringstream in(main_src);
    c.sentences = parse_main_text(in, opts);
  }
  {
    std::istringstream in(dict_src);
    c.dictionary_raw = parse_dictionary(in, opts);
    c.dictionary = consolidate_dictionary(c.dictionary_raw);
  }
  {
    std::istringstream in(comm_src);
    c.commentary = parse_commentary(in, c.sentences, opts);
  }
  std::string all;
  all.reserve(main_src.size() + dict_src.size() + comm_src.size() + 2);
  all.append(main_src).push_back('\x1e');
  all.append(dict_src).push_back('\x1e');
  all.append(comm_src);
  c.hash = hashing::sha256_hex(all);
  return c;
}

}  // namespace sishu::corpus
