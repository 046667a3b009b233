#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace xling {

enum class errc {
  malformed_schema,
  offset_mismatch,
  unknown_label,
  ragged_record,
  duplicate_id,
  unmapped_label,
  invalid_span,
  delimiter_collision,
  transport_error,
  rate_limited,
  length_mismatch,
  span_out_of_bounds,
  unknown_query,
  missing_passage_id,
  stale_checkpoint,
  no_measurements,
  missing_statistic,
  unknown_example_id,
  invalid_config,
  io_error,
};

inline std::string_view to_string(errc c) {
  switch (c) {
    case errc::malformed_schema: return "MalformedSchema";
    case errc::offset_mismatch: return "OffsetMismatch";
    case errc::unknown_label: return "UnknownLabel";
    case errc::ragged_record: return "RaggedRecord";
    case errc::duplicate_id: return "DuplicateId";
    case errc::unmapped_label: return "UnmappedLabel";
    case errc::invalid_span: return "InvalidSpan";
    case errc::delimiter_collision: return "DelimiterCollision";
    case errc::transport_error: return "TransportError";
    case errc::rate_limited: return "RateLimited";
    case errc::length_mismatch: return "LengthMismatch";
    case errc::span_out_of_bounds: return "SpanOutOfBounds";
    case errc::unknown_query: return "UnknownQuery";
    case errc::missing_passage_id: return "MissingPassageId";
    case errc::stale_checkpoint: return "StaleCheckpoint";
    case errc::no_measurements: return "NoMeasurements";
    case errc::missing_statistic: return "MissingStatistic";
    case errc::unknown_example_id: return "UnknownExampleId";
    case errc::invalid_config: return "InvalidConfig";
    case errc::io_error: return "IoError";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace xling
