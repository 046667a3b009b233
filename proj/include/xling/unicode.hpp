#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

// UTF-8 helpers. Offsets throughout this codebase are counted in Unicode
// code points of the decoded text unless a name says "_byte". Character
// counts for billing use the same convention (what per-character translation
// APIs meter).

namespace xling {

inline bool is_utf8_continuation(unsigned char b) { return (b & 0xC0) == 0x80; }

// Number of code points in a (valid) UTF-8 string.
inline std::size_t cp_count(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) {
    n += !is_utf8_continuation(c);
  }
  return n;
}

// Byte offset of the cp-th code point; s.size() when cp == cp_count(s).
inline std::size_t cp_to_byte(std::string_view s, std::size_t cp) {
  std::size_t seen = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!is_utf8_continuation(static_cast<unsigned char>(s[i]))) {
      if (seen == cp) return i;
      ++seen;
    }
  }
  if (seen == cp || cp == 0) return s.size();
  throw std::out_of_range("cp_to_byte: code point offset past end of string");
}

// Code point index of the byte at `byte` (must sit on a code point boundary
// or equal s.size()).
inline std::size_t byte_to_cp(std::string_view s, std::size_t byte) {
  if (byte > s.size()) throw std::out_of_range("byte_to_cp: byte offset past end");
  std::size_t n = 0;
  for (std::size_t i = 0; i < byte; ++i) {
    n += !is_utf8_continuation(static_cast<unsigned char>(s[i]));
  }
  return n;
}

// Substring by code point offsets.
inline std::string_view substr_cp(std::string_view s, std::size_t cp_start, std::size_t cp_len) {
  std::size_t b0 = cp_to_byte(s, cp_start);
  std::size_t b1 = cp_to_byte(s, cp_start + cp_len);
  return s.substr(b0, b1 - b0);
}

// Decodes the code point starting at byte `pos`; returns (code point, byte length).
// Malformed sequences decode byte-wise as Latin-1 so text processing never throws.
inline std::pair<std::uint32_t, std::size_t> decode_cp(std::string_view s, std::size_t pos) {
  unsigned char b0 = static_cast<unsigned char>(s[pos]);
  auto cont = [&](std::size_t k) {
    return pos + k < s.size() && is_utf8_continuation(static_cast<unsigned char>(s[pos + k]));
  };
  if (b0 < 0x80) return {b0, 1};
  if ((b0 & 0xE0) == 0xC0 && cont(1)) {
    return {static_cast<std::uint32_t>((b0 & 0x1F) << 6 | (s[pos + 1] & 0x3F)), 2};
  }
  if ((b0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
    return {static_cast<std::uint32_t>((b0 & 0x0F) << 12 | (s[pos + 1] & 0x3F) << 6 |
                                       (s[pos + 2] & 0x3F)),
            3};
  }
  if ((b0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
    return {static_cast<std::uint32_t>((b0 & 0x07) << 18 | (s[pos + 1] & 0x3F) << 12 |
                                       (s[pos + 2] & 0x3F) << 6 | (s[pos + 3] & 0x3F)),
            4};
  }
  return {b0, 1};
}

inline void encode_cp(std::uint32_t cp, std::string& out) {
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

// ASCII + Latin-1 lowercase test, enough for English and Portuguese.
inline bool is_lowercase_cp(std::uint32_t cp) {
  if (cp >= 'a' && cp <= 'z') return true;
  if (cp >= 0xDF && cp <= 0xFF && cp != 0xF7) return true;  // ß à-ö ø-ÿ, not ÷
  return false;
}

inline std::uint32_t to_lower_cp(std::uint32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;  // À-Þ, not ×
  return cp;
}

}  // namespace xling
