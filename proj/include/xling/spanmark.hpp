#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "xling/errors.hpp"
#include "xling/unicode.hpp"

// Delimiter algebra for carrying an answer span through machine translation:
// insert a start/end token pair around the span before translating, then
// recover the span and the clean context from the translated text. Recovery
// can fail in exactly four ways (a token missing, duplicated, or out of
// order); callers turn those into per-example discards.

namespace xling {

struct DelimiterPair {
  std::string start_token = "<answer_start>";
  std::string end_token = "<answer_end>";

  // Tokens must be non-empty, distinct, and neither a substring of the other,
  // otherwise occurrence counting is ambiguous.
  void validate() const {
    if (start_token.empty() || end_token.empty()) {
      raise(errc::invalid_config, "delimiter tokens must be non-empty");
    }
    if (start_token == end_token) {
      raise(errc::invalid_config, "delimiter tokens must differ");
    }
    if (start_token.find(end_token) != std::string::npos ||
        end_token.find(start_token) != std::string::npos) {
      raise(errc::invalid_config, "delimiter tokens must not contain each other");
    }
  }

  bool operator==(const DelimiterPair&) const = default;
};

enum class SpanError {
  none,
  invalid_span,
  delimiter_collision,
  missing_start_delimiter,
  missing_end_delimiter,
  out_of_order_delimiters,
  duplicate_delimiters,
};

inline std::string_view to_string(SpanError e) {
  switch (e) {
    case SpanError::none: return "None";
    case SpanError::invalid_span: return "InvalidSpan";
    case SpanError::delimiter_collision: return "DelimiterCollision";
    case SpanError::missing_start_delimiter: return "MissingStartDelimiter";
    case SpanError::missing_end_delimiter: return "MissingEndDelimiter";
    case SpanError::out_of_order_delimiters: return "OutOfOrderDelimiters";
    case SpanError::duplicate_delimiters: return "DuplicateDelimiters";
  }
  return "None";
}

// A context with exactly one start token followed by exactly one end token.
struct MarkedContext {
  std::string text;
  DelimiterPair delims;
  // Byte extent of the delimited region in `text`, from the first byte of the
  // start token through the last byte of the end token. Kept so callers can
  // merge sentence segments over it without re-searching.
  std::size_t span_begin_byte = 0;
  std::size_t span_end_byte = 0;
};

struct MarkResult {
  SpanError error = SpanError::none;
  MarkedContext marked;
  bool ok() const { return error == SpanError::none; }
};

struct RecoverResult {
  SpanError error = SpanError::none;
  std::string context;           // delimiters removed, whitespace rule applied
  std::string answer;            // text between the delimiters after cleanup
  std::size_t answer_start = 0;  // code points into `context`
  bool ok() const { return error == SpanError::none; }
};

namespace detail {

// Non-overlapping occurrence count; also reports the first match position.
inline std::size_t count_occurrences(std::string_view text, std::string_view token,
                                     std::size_t* first = nullptr) {
  std::size_t n = 0;
  std::size_t pos = text.find(token);
  if (first) *first = pos;
  while (pos != std::string_view::npos) {
    ++n;
    pos = text.find(token, pos + token.size());
  }
  return n;
}

}  // namespace detail

// Wraps the answer span of `context` in delimiter tokens. `answer_start` is a
// code point offset. The answer itself is never translated separately: the
// tokens ride through translation with the surrounding text.
inline MarkResult mark(std::string_view context, std::size_t answer_start,
                       std::string_view answer_text, const DelimiterPair& delims = {}) {
  delims.validate();
  const std::size_t context_cps = cp_count(context);
  const std::size_t answer_cps = cp_count(answer_text);
  if (answer_start > context_cps || answer_start + answer_cps > context_cps) {
    return {SpanError::invalid_span, {}};
  }
  const std::size_t b0 = cp_to_byte(context, answer_start);
  const std::size_t b1 = cp_to_byte(context, answer_start + answer_cps);
  if (context.substr(b0, b1 - b0) != answer_text) {
    return {SpanError::invalid_span, {}};
  }
  if (context.find(delims.start_token) != std::string_view::npos ||
      context.find(delims.end_token) != std::string_view::npos) {
    return {SpanError::delimiter_collision, {}};
  }

  MarkedContext out;
  out.delims = delims;
  out.text.reserve(context.size() + delims.start_token.size() + delims.end_token.size());
  out.text.append(context.substr(0, b0));
  out.span_begin_byte = out.text.size();
  out.text.append(delims.start_token);
  out.text.append(answer_text);
  out.text.append(delims.end_token);
  out.span_end_byte = out.text.size();
  out.text.append(context.substr(b1));
  return {SpanError::none, std::move(out)};
}

// Extracts (clean context, answer, answer offset) from translated text.
//
// Whitespace rule: translation models like to set the tokens off with spaces
// ("... has <answer_start> 26 states <answer_end> today"). When a token is
// flanked by spaces on both sides, the pair collapses to a single space and
// the answer-side space is dropped, so recovered answers stay trimmed.
// Offsets are computed on the cleaned string.
//
// The error taxonomy is total and checked in a fixed order: missing start,
// missing end, duplicates, out of order. Overlapping token occurrences count
// as out of order.
inline RecoverResult recover(std::string_view translated, const DelimiterPair& delims = {}) {
  delims.validate();
  std::size_t start_pos = 0;
  std::size_t end_pos = 0;
  const std::size_t n_start = detail::count_occurrences(translated, delims.start_token, &start_pos);
  const std::size_t n_end = detail::count_occurrences(translated, delims.end_token, &end_pos);
  if (n_start == 0) return {SpanError::missing_start_delimiter, {}, {}, 0};
  if (n_end == 0) return {SpanError::missing_end_delimiter, {}, {}, 0};
  if (n_start > 1 || n_end > 1) return {SpanError::duplicate_delimiters, {}, {}, 0};
  if (end_pos < start_pos + delims.start_token.size()) {
    return {SpanError::out_of_order_delimiters, {}, {}, 0};
  }

  std::string_view prefix = translated.substr(0, start_pos);
  std::string_view middle = translated.substr(start_pos + delims.start_token.size(),
                                              end_pos - start_pos - delims.start_token.size());
  std::string_view suffix = translated.substr(end_pos + delims.end_token.size());

  const bool drop_leading = !prefix.empty() && prefix.back() == ' ' && !middle.empty() &&
                            middle.front() == ' ';
  const bool drop_trailing = !middle.empty() && middle.back() == ' ' && !suffix.empty() &&
                             suffix.front() == ' ';
  if (drop_leading) middle.remove_prefix(1);
  if (drop_trailing && !middle.empty()) middle.remove_suffix(1);

  RecoverResult out;
  out.context.reserve(prefix.size() + middle.size() + suffix.size());
  out.context.append(prefix);
  out.context.append(middle);
  out.context.append(suffix);
  out.answer.assign(middle);
  out.answer_start = cp_count(prefix);
  return out;
}

}  // namespace xling
