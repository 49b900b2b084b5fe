#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// UTF-8 helpers and character classes shared by every text-facing module.
namespace sishu::text {

/// One decoded code point with its byte range in the source string.
struct CodePoint {
  char32_t value;
  std::size_t begin;
  std::size_t end;
};

/// Decodes UTF-8. Malformed sequences decode to U+FFFD, one byte at a time.
std::vector<CodePoint> decode(std::string_view s);
std::u32string to_u32(std::string_view s);
void append_utf8(std::string& out, char32_t cp);
std::string to_utf8(std::u32string_view s);

/// Number of code points.
std::size_t length(std::string_view s);

/// CJK ideographs, CJK symbols/punctuation, and full/half-width forms.
bool is_cjk(char32_t cp);
/// CJK ideographs only (no punctuation blocks).
bool is_ideograph(char32_t cp);
bool is_space(char32_t cp);
bool is_punct(char32_t cp);

/// True when the string holds at least one code point that is neither
/// whitespace nor punctuation.
bool is_word_token(std::string_view token);

/// Terminal punctuation that closes a sentence: 。？！.?! and full-width ？！.
bool is_terminal_punct(char32_t cp);

/// Unicode NFC composition.
std::string nfc(std::string_view s);

/// Full Unicode case folding.
std::string fold_case(std::string_view s);

std::string trim(std::string_view s);

/// A token as a byte range into the string it was cut from.
struct TokenSpan {
  std::string_view text;
  std::size_t begin;
  std::size_t end;
};

/// Each CJK code point is its own token; maximal runs of other non-space
/// code points form one token; whitespace only separates.
std::vector<TokenSpan> token_spans(std::string_view s);
std::vector<std::string> tokenize(std::string_view s);

}  // namespace sishu::text

namespace sishu::hashing {

/// 64-bit FNV-1a, with the seed mixed into the offset basis.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0);

std::string sha256_hex(std::string_view data);

}  // namespace sishu::hashing
