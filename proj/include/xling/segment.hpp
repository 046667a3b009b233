#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "xling/errors.hpp"
#include "xling/unicode.hpp"

// Lossless rule-based sentence segmentation. Open-source translation models
// handle single sentences better than whole paragraphs, so contexts are split
// before translation. The segmentation must be lossless: the concatenation of
// segments reproduces the input byte-for-byte, which is what lets a marked
// answer span survive the split/translate/reassemble cycle.

namespace xling {

struct Segment {
  std::string text;
  std::size_t start_byte = 0;
  bool operator==(const Segment&) const = default;
};

struct Segmentation {
  std::vector<Segment> segments;

  std::string join() const {
    std::string out;
    for (const auto& s : segments) out += s.text;
    return out;
  }
  std::size_t total_bytes() const {
    return segments.empty() ? 0 : segments.back().start_byte + segments.back().text.size();
  }
};

// Tokens that end with '.' and must not terminate a sentence. Mixed
// English/Portuguese defaults; mirrored in data/abbreviations.txt.
inline const std::vector<std::string>& default_abbreviations() {
  static const std::vector<std::string> abbrevs = {
      "Mr.",   "Mrs.",  "Ms.",   "Dr.",    "Prof.",  "Sr.",    "Sra.",   "Srta.",
      "Dra.",  "Profa.", "Eng.", "Exmo.",  "Ilmo.",  "Jr.",    "Ph.D.",  "M.Sc.",
      "St.",   "Sta.",  "Av.",   "R.",     "Al.",    "Rod.",   "Est.",   "Trav.",
      "etc.",  "e.g.",  "i.e.",  "cf.",    "vs.",    "et al.", "al.",    "ca.",
      "fig.",  "Fig.",  "figs.", "cap.",   "Cap.",   "art.",   "Art.",   "inc.",
      "p.",    "pp.",   "pág.",  "págs.",  "vol.",   "Vol.",   "n.",     "núm.",
      "no.",   "No.",   "tel.",  "Tel.",   "a.C.",   "d.C.",   "U.S.",   "U.K.",
      "E.U.A.", "S.A.", "Ltda.", "Ltd.",   "Co.",    "Inc.",   "obs.",   "Obs.",
      "aprox.", "min.", "máx.",  "séc.",   "Gen.",   "Col.",   "Cia.",   "ed.",
  };
  return abbrevs;
}

struct SegmenterOptions {
  std::vector<std::string> abbreviations = default_abbreviations();
};

// One entry per line; blank lines and '#' comments ignored.
inline std::vector<std::string> load_abbreviations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(errc::io_error, "cannot open abbreviation file " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    out.push_back(line);
  }
  return out;
}

namespace detail {

inline bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline bool is_terminator_at(std::string_view text, std::size_t i, std::size_t* len) {
  char c = text[i];
  if (c == '.' || c == '!' || c == '?') {
    *len = 1;
    return true;
  }
  // U+2026 HORIZONTAL ELLIPSIS
  if (text.compare(i, 3, "\xE2\x80\xA6") == 0) {
    *len = 3;
    return true;
  }
  return false;
}

inline bool is_closer_at(std::string_view text, std::size_t i, std::size_t* len) {
  char c = text[i];
  if (c == '"' || c == '\'' || c == ')' || c == ']' || c == '}') {
    *len = 1;
    return true;
  }
  if (text.compare(i, 2, "\xC2\xBB") == 0) {  // »
    *len = 2;
    return true;
  }
  if (text.compare(i, 3, "\xE2\x80\x9D") == 0 || text.compare(i, 3, "\xE2\x80\x99") == 0) {  // ” ’
    *len = 3;
    return true;
  }
  return false;
}

}  // namespace detail

// Splits text at sentence terminators {. ! ? …}. A split requires whitespace
// after the terminator (and any closing quotes/brackets), is suppressed when
// the dot ends a known abbreviation or when the next sentence would begin
// with a lowercase letter, and attaches trailing whitespace to the preceding
// segment. Worst case the whole text is one segment; the segmentation is
// always lossless.
inline Segmentation split_sentences(std::string_view text, const SegmenterOptions& opts = {}) {
  Segmentation out;
  if (text.empty()) return out;

  std::unordered_set<std::string_view> abbrevs(opts.abbreviations.begin(),
                                               opts.abbreviations.end());

  std::size_t seg_start = 0;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    std::size_t tlen = 0;
    if (!detail::is_terminator_at(text, i, &tlen)) {
      ++i;
      continue;
    }
    // Consume the whole terminator run ("?!", "...").
    std::size_t run_begin = i;
    std::size_t run_count = 0;
    char last_term = 0;
    while (i < n && detail::is_terminator_at(text, i, &tlen)) {
      last_term = text[i];
      i += tlen;
      ++run_count;
    }
    // Closing quotes/brackets belong to the sentence.
    std::size_t clen = 0;
    while (i < n && detail::is_closer_at(text, i, &clen)) i += clen;

    if (i >= n) break;  // remainder is the last segment
    if (!detail::is_ascii_space(text[i])) continue;  // "3.5", "U.S.A" internals

    // Abbreviation guard applies to a single '.' ending a token.
    if (run_count == 1 && last_term == '.') {
      std::size_t w = run_begin;
      while (w > seg_start && !detail::is_ascii_space(text[w - 1])) --w;
      std::string_view token = text.substr(w, run_begin - w + 1);
      while (!token.empty() && (token.front() == '(' || token.front() == '[' ||
                                token.front() == '{' || token.front() == '"' ||
                                token.front() == '\'')) {
        token.remove_prefix(1);
      }
      if (abbrevs.count(token)) continue;
    }

    std::size_t ws_end = i;
    while (ws_end < n && detail::is_ascii_space(text[ws_end])) ++ws_end;
    if (ws_end < n) {
      auto [cp, cplen] = decode_cp(text, ws_end);
      if (is_lowercase_cp(cp)) continue;  // mid-sentence dot, keep going
    }

    out.segments.push_back({std::string(text.substr(seg_start, ws_end - seg_start)), seg_start});
    seg_start = ws_end;
    i = ws_end;
  }
  if (seg_start < n) {
    out.segments.push_back({std::string(text.substr(seg_start)), seg_start});
  }
  return out;
}

// Merges the segments overlapping [begin_byte, end_byte) into a single unit so
// a marked span never straddles translation units. Neighboring segments are
// untouched; the result is lossless like the input.
inline Segmentation group_for_span(const Segmentation& seg, std::size_t begin_byte,
                                   std::size_t end_byte) {
  const std::size_t total = seg.total_bytes();
  if (begin_byte > end_byte || end_byte > total) {
    raise(errc::span_out_of_bounds,
          "span [" + std::to_string(begin_byte) + ", " + std::to_string(end_byte) +
              ") outside text of " + std::to_string(total) + " bytes");
  }
  Segmentation out;
  std::size_t k = 0;
  while (k < seg.segments.size()) {
    const Segment& s = seg.segments[k];
    const std::size_t s_end = s.start_byte + s.text.size();
    const bool overlaps = begin_byte < end_byte
                              ? (s.start_byte < end_byte && begin_byte < s_end)
                              : (s.start_byte <= begin_byte && begin_byte < s_end);
    if (!overlaps) {
      out.segments.push_back(s);
      ++k;
      continue;
    }
    Segment merged = s;
    ++k;
    while (k < seg.segments.size()) {
      const Segment& t = seg.segments[k];
      const std::size_t t_end = t.start_byte + t.text.size();
      const bool t_overlaps = begin_byte < end_byte
                                  ? (t.start_byte < end_byte && begin_byte < t_end)
                                  : false;
      if (!t_overlaps) break;
      merged.text += t.text;
      ++k;
    }
    out.segments.push_back(std::move(merged));
  }
  return out;
}

}  // namespace xling
