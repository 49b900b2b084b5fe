#include "sishu/text.hpp"

#include <openssl/evp.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <array>
#include <cstdio>
#include <stdexcept>

#include "sishu/error.hpp"

namespace sishu {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingField: return "MISSING_FIELD";
    case ErrorCode::DuplicateId: return "DUPLICATE_ID";
    case ErrorCode::EmptyLayer: return "EMPTY_LAYER";
    case ErrorCode::EmptyCharacter: return "EMPTY_CHARACTER";
    case ErrorCode::BadFormat: return "BAD_FORMAT";
    case ErrorCode::DanglingSection: return "DANGLING_SECTION";
    case ErrorCode::IndexError: return "INDEX_ERROR";
    case ErrorCode::EmptyInput: return "EMPTY_INPUT";
    case ErrorCode::DimMismatch: return "DIM_MISMATCH";
    case ErrorCode::KeyMiss: return "KEY_MISS";
    case ErrorCode::Transport: return "TRANSPORT";
    case ErrorCode::BadResponse: return "BAD_RESPONSE";
    case ErrorCode::NoCandidates: return "NO_CANDIDATES";
    case ErrorCode::SchemaViolation: return "SCHEMA_VIOLATION";
    case ErrorCode::EmptyGraph: return "EMPTY_GRAPH";
    case ErrorCode::SerializationError: return "SERIALIZATION_ERROR";
    case ErrorCode::SchemaVersionMismatch: return "SCHEMA_VERSION_MISMATCH";
    case ErrorCode::EmptyIndex: return "EMPTY_INDEX";
    case ErrorCode::NoEmbeddings: return "NO_EMBEDDINGS";
    case ErrorCode::EmptyQuerySet: return "EMPTY_QUERY_SET";
    case ErrorCode::UnknownSeed: return "UNKNOWN_SEED";
    case ErrorCode::UnknownConcept: return "UNKNOWN_CONCEPT";
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::BadInput: return "BAD_INPUT";
    case ErrorCode::Io: return "IO";
  }
  return "UNKNOWN";
}

}  // namespace sishu

namespace sishu::text {

namespace {

constexpr char32_t kReplacement = 0xFFFD;

}  // namespace

std::vector<CodePoint> decode(std::string_view s) {
  std::vector<CodePoint> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    }
    bool ok = len > 0 && i + len <= s.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto bk = static_cast<unsigned char>(s[i + k]);
      if ((bk & 0xC0) != 0x80) {
        ok = false;
      } else {
        cp = (cp << 6) | (bk & 0x3F);
      }
    }
    if (!ok) {
      out.push_back({kReplacement, i, i + 1});
      ++i;
      continue;
    }
    out.push_back({cp, i, i + len});
    i += len;
  }
  return out;
}

std::u32string to_u32(std::string_view s) {
  std::u32string out;
  for (const auto& cp : decode(s)) out.push_back(cp.value);
  return out;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string to_utf8(std::u32string_view s) {
  std::string out;
  out.reserve(s.size() * 3);
  for (char32_t cp : s) append_utf8(out, cp);
  return out;
}

std::size_t length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) {
    if ((c & 0xC0) != 0x80) ++n;
  }
  return n;
}

bool is_ideograph(char32_t cp) {
  return (cp >= 0x4E00 && cp <= 0x9FFF) ||    // unified
         (cp >= 0x3400 && cp <= 0x4DBF) ||    // extension A
         (cp >= 0xF900 && cp <= 0xFAFF) ||    // compatibility
         (cp >= 0x20000 && cp <= 0x323AF);    // extensions B..H
}

bool is_cjk(char32_t cp) {
  if (cp == 0x3000) return false;  // ideographic space is whitespace
  return is_ideograph(cp) ||
         (cp >= 0x3000 && cp <= 0x303F) ||    // symbols and punctuation
         (cp >= 0xFF00 && cp <= 0xFFEF);      // full/half-width forms
}

bool is_space(char32_t cp) {
  return u_isUWhiteSpace(static_cast<UChar32>(cp)) != 0 || cp == 0x200B;
}

bool is_punct(char32_t cp) { return u_ispunct(static_cast<UChar32>(cp)) != 0; }

bool is_word_token(std::string_view token) {
  for (const auto& cp : decode(token)) {
    if (!is_space(cp.value) && !is_punct(cp.value)) return true;
  }
  return false;
}

bool is_terminal_punct(char32_t cp) {
  switch (cp) {
    case U'。':
    case U'？':
    case U'！':
    case U'.':
    case U'?':
    case U'!':
      return true;
    default:
      return false;
  }
}

std::string nfc(std::string_view s) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) {
    throw std::runtime_error("ICU NFC normalizer unavailable");
  }
  icu::UnicodeString in = icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  icu::UnicodeString out = norm->normalize(in, status);
  if (U_FAILURE(status)) {
    throw std::runtime_error("NFC normalization failed");
  }
  std::string result;
  out.toUTF8String(result);
  return result;
}

std::string fold_case(std::string_view s) {
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  u.foldCase();
  std::string result;
  u.toUTF8String(result);
  return result;
}

std::string trim(std::string_view s) {
  const auto cps = decode(s);
  std::size_t first = 0;
  while (first < cps.size() && is_space(cps[first].value)) ++first;
  if (first == cps.size()) return {};
  std::size_t last = cps.size();
  while (last > first && is_space(cps[last - 1].value)) --last;
  return std::string(s.substr(cps[first].begin, cps[last - 1].end - cps[first].begin));
}

std::vector<TokenSpan> token_spans(std::string_view s) {
  std::vector<TokenSpan> out;
  std::size_t run_begin = 0;
  bool in_run = false;
  auto close_run = [&](std::size_t end) {
    if (in_run) out.push_back({s.substr(run_begin, end - run_begin), run_begin, end});
    in_run = false;
  };
  for (const auto& cp : decode(s)) {
    if (is_space(cp.value)) {
      close_run(cp.begin);
    } else if (is_cjk(cp.value)) {
      close_run(cp.begin);
      out.push_back({s.substr(cp.begin, cp.end - cp.begin), cp.begin, cp.end});
    } else if (!in_run) {
      in_run = true;
      run_begin = cp.begin;
    }
  }
  close_run(s.size());
  return out;
}

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> out;
  for (const auto& t : token_spans(s)) out.emplace_back(t.text);
  return out;
}

}  // namespace sishu::text

namespace sishu::hashing {

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed) {
  std::uint64_t h = 14695981039346656037ULL ^ (seed * 0x9E3779B97F4A7C15ULL);
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  // final avalanche so nearby seeds give unrelated buckets
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  return h;
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  std::string hex;
  hex.reserve(len * 2);
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

}  // namespace sishu::hashing
