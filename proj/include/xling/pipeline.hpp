#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "xling/backend.hpp"
#include "xling/errors.hpp"
#include "xling/formats.hpp"
#include "xling/segment.hpp"
#include "xling/spanmark.hpp"
#include "xling/unicode.hpp"

// End-to-end translation scenarios: translate-train for QA/NLI/passages and
// the two translate-infer ranking strategies, all built on one batched,
// checkpointed unit job. Individual example failures become discards and
// never abort a job; backend transport failures abort after persisting a
// checkpoint so long jobs are restartable.

namespace xling {

// ---------------------------------------------------------------------------
// Discard accounting

enum class DiscardReason {
  invalid_span,
  delimiter_collision,
  missing_start_delimiter,
  missing_end_delimiter,
  out_of_order_delimiters,
  duplicate_delimiters,
  length_mismatch,
};

inline std::string_view to_string(DiscardReason r) {
  switch (r) {
    case DiscardReason::invalid_span: return "InvalidSpan";
    case DiscardReason::delimiter_collision: return "DelimiterCollision";
    case DiscardReason::missing_start_delimiter: return "MissingStartDelimiter";
    case DiscardReason::missing_end_delimiter: return "MissingEndDelimiter";
    case DiscardReason::out_of_order_delimiters: return "OutOfOrderDelimiters";
    case DiscardReason::duplicate_delimiters: return "DuplicateDelimiters";
    case DiscardReason::length_mismatch: return "LengthMismatch";
  }
  return "InvalidSpan";
}

inline DiscardReason discard_reason_from(SpanError e) {
  switch (e) {
    case SpanError::invalid_span: return DiscardReason::invalid_span;
    case SpanError::delimiter_collision: return DiscardReason::delimiter_collision;
    case SpanError::missing_start_delimiter: return DiscardReason::missing_start_delimiter;
    case SpanError::missing_end_delimiter: return DiscardReason::missing_end_delimiter;
    case SpanError::out_of_order_delimiters: return DiscardReason::out_of_order_delimiters;
    case SpanError::duplicate_delimiters: return DiscardReason::duplicate_delimiters;
    case SpanError::none: break;
  }
  raise(errc::invalid_config, "not a discardable span state");
}

struct DiscardReport {
  std::size_t total_examples = 0;
  std::size_t kept = 0;
  std::map<DiscardReason, std::size_t> discarded_by_reason;

  void discard(DiscardReason r) { ++discarded_by_reason[r]; }
  std::size_t discarded() const {
    std::size_t n = 0;
    for (const auto& [r, c] : discarded_by_reason) n += c;
    return n;
  }
  double discard_rate() const {
    return total_examples ? static_cast<double>(discarded()) / static_cast<double>(total_examples)
                          : 0.0;
  }
  // kept + discarded == total, on every run.
  bool conserved() const { return kept + discarded() == total_examples; }

  nlohmann::json to_json() const {
    nlohmann::json reasons = nlohmann::json::object();
    for (const auto& [r, c] : discarded_by_reason) reasons[std::string(to_string(r))] = c;
    return {{"total_examples", total_examples},
            {"kept", kept},
            {"discarded", discarded()},
            {"discarded_by_reason", reasons}};
  }
};

// ---------------------------------------------------------------------------
// The unit job: translate a flat list of texts in fixed consecutive batches.

struct JobOptions {
  // When set, a checkpoint is written after every completed batch and an
  // existing file resumes the job (StaleCheckpoint if it belongs to a
  // different job).
  std::filesystem::path checkpoint;
};

struct UnitJobResult {
  // One slot per unit; nullopt means the unit's batch failed with
  // LengthMismatch and its examples must be discarded.
  std::vector<std::optional<std::string>> outputs;
  std::vector<std::size_t> failed_batches;
  std::uint64_t characters_planned = 0;  // characters of every unit handed to the job
  std::uint64_t characters_billed = 0;   // characters of units that translated successfully
};

namespace detail {

inline std::string job_hash_hex(std::string_view kind, const std::vector<std::string>& units,
                                std::size_t batch_size, std::string_view backend_identity) {
  std::uint64_t h = fnv1a(kind);
  h = fnv1a(backend_identity, h);
  h = fnv1a(std::to_string(batch_size), h);
  for (const std::string& u : units) {
    h = fnv1a(std::to_string(u.size()), h);
    h = fnv1a(u, h);
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) raise(errc::io_error, "cannot write " + tmp.string());
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(errc::io_error, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace detail

// Checkpoint contents, loadable for inspection. The file carries the job
// identity, the completed-batch prefix, the partial outputs and a meter
// snapshot; resuming from it and running to completion yields output
// identical to an uninterrupted run given a deterministic backend.
struct Checkpoint {
  std::string job_hash;
  std::size_t total_units = 0;
  std::size_t batch_size = 0;
  std::size_t completed_batches = 0;
  std::vector<std::optional<std::string>> outputs;
  std::vector<std::size_t> failed_batches;
  Meter meter;

  bool complete() const {
    const std::size_t batches = batch_size ? (total_units + batch_size - 1) / batch_size : 0;
    return completed_batches >= batches;
  }

  nlohmann::json to_json() const {
    nlohmann::json outs = nlohmann::json::array();
    for (const auto& o : outputs) {
      if (o) outs.push_back(*o);
      else outs.push_back(nullptr);
    }
    return {{"version", 1},
            {"job_hash", job_hash},
            {"total_units", total_units},
            {"batch_size", batch_size},
            {"completed_batches", completed_batches},
            {"outputs", std::move(outs)},
            {"failed_batches", failed_batches},
            {"meter", meter.to_json()}};
  }

  static Checkpoint from_json(const nlohmann::json& j) {
    if (j.value("version", 0) != 1) raise(errc::stale_checkpoint, "unknown checkpoint version");
    Checkpoint c;
    c.job_hash = j.at("job_hash").get<std::string>();
    c.total_units = j.at("total_units").get<std::size_t>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.completed_batches = j.at("completed_batches").get<std::size_t>();
    for (const auto& o : j.at("outputs")) {
      if (o.is_null()) c.outputs.push_back(std::nullopt);
      else c.outputs.push_back(o.get<std::string>());
    }
    c.failed_batches = j.at("failed_batches").get<std::vector<std::size_t>>();
    c.meter = Meter::from_json(j.at("meter"));
    return c;
  }
};

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  nlohmann::json j = nlohmann::json::parse(detail::read_file(path), nullptr, false);
  if (j.is_discarded()) raise(errc::stale_checkpoint, "checkpoint is not valid JSON");
  return Checkpoint::from_json(j);
}

// Translates `units` in consecutive batches of the client's max batch size,
// keeping up to max_in_flight batches open. Outputs are reassembled in
// submission order, so results are deterministic for any in-flight limit.
// LengthMismatch marks the batch failed and the job continues; transport
// failures persist a checkpoint (when enabled) and propagate.
inline UnitJobResult run_unit_job(const std::vector<std::string>& units, BatchClient& client,
                                  const JobOptions& opts = {}, std::string_view job_kind = "units") {
  const std::size_t batch_size = client.config().max_batch_size;
  const std::size_t n_batches = (units.size() + batch_size - 1) / batch_size;
  const std::string job_hash =
      detail::job_hash_hex(job_kind, units, batch_size, client.translator().describe());

  UnitJobResult result;
  result.outputs.assign(units.size(), std::nullopt);
  for (const std::string& u : units) result.characters_planned += cp_count(u);

  std::size_t start_batch = 0;
  if (!opts.checkpoint.empty() && std::filesystem::exists(opts.checkpoint)) {
    Checkpoint ckpt = load_checkpoint(opts.checkpoint);
    if (ckpt.job_hash != job_hash || ckpt.total_units != units.size() ||
        ckpt.batch_size != batch_size) {
      raise(errc::stale_checkpoint,
            "checkpoint " + opts.checkpoint.string() + " does not match this job");
    }
    for (std::size_t i = 0; i < ckpt.outputs.size() && i < result.outputs.size(); ++i) {
      result.outputs[i] = std::move(ckpt.outputs[i]);
    }
    result.failed_batches = ckpt.failed_batches;
    client.restore_meter(ckpt.meter);
    start_batch = ckpt.completed_batches;
  }

  auto batch_range = [&](std::size_t b) {
    const std::size_t begin = b * batch_size;
    const std::size_t end = std::min(units.size(), begin + batch_size);
    return std::pair<std::size_t, std::size_t>(begin, end);
  };

  auto save_checkpoint = [&](std::size_t completed) {
    if (opts.checkpoint.empty()) return;
    Checkpoint ckpt;
    ckpt.job_hash = job_hash;
    ckpt.total_units = units.size();
    ckpt.batch_size = batch_size;
    ckpt.completed_batches = completed;
    const std::size_t covered = std::min(units.size(), completed * batch_size);
    ckpt.outputs.assign(result.outputs.begin(), result.outputs.begin() + covered);
    ckpt.failed_batches = result.failed_batches;
    ckpt.meter = client.meter();
    detail::write_file_atomic(opts.checkpoint, ckpt.to_json().dump());
  };

  const std::size_t in_flight = static_cast<std::size_t>(client.config().max_in_flight);
  std::size_t wave_start = start_batch;
  while (wave_start < n_batches) {
    const std::size_t wave_end = std::min(n_batches, wave_start + in_flight);
    std::vector<std::future<std::vector<std::string>>> futures;
    futures.reserve(wave_end - wave_start);
    for (std::size_t b = wave_start; b < wave_end; ++b) {
      futures.push_back(std::async(std::launch::async, [&, b] {
        auto [begin, end] = batch_range(b);
        return client.translate_batch(
            std::vector<std::string>(units.begin() + begin, units.begin() + end));
      }));
    }
    for (std::size_t b = wave_start; b < wave_end; ++b) {
      auto [begin, end] = batch_range(b);
      try {
        std::vector<std::string> translated = futures[b - wave_start].get();
        for (std::size_t i = begin; i < end; ++i) {
          result.characters_billed += cp_count(units[i]);
          result.outputs[i] = std::move(translated[i - begin]);
        }
      } catch (const Error& e) {
        if (e.code() == errc::length_mismatch) {
          result.failed_batches.push_back(b);
        } else {
          // Drain the rest of the wave, keep the last good checkpoint, and
          // surface the failure to the caller.
          for (std::size_t rest = b - wave_start + 1; rest < futures.size(); ++rest) {
            try {
              futures[rest].get();
            } catch (...) {
            }
          }
          save_checkpoint(b);
          throw;
        }
      }
      save_checkpoint(b + 1);
    }
    wave_start = wave_end;
  }
  return result;
}

// ---------------------------------------------------------------------------
// QA

enum class ContextMode { per_sentence, whole_context };

struct QATranslateOptions {
  DelimiterPair delims;
  // Open-source models translate single sentences better than paragraphs, so
  // per-sentence is the default; whole-context is kept for ablations.
  ContextMode mode = ContextMode::per_sentence;
  SegmenterOptions segmenter;
  JobOptions job;
};

struct QATranslateResult {
  QADataset dataset;
  DiscardReport report;
  std::uint64_t characters_planned = 0;
  std::uint64_t characters_billed = 0;
  // Billed characters that belonged to examples later discarded.
  std::uint64_t characters_discarded = 0;
  // Original answer lists of multi-answer examples; the pipeline marks only
  // the first answer, the rest are retained here.
  std::map<std::string, std::vector<QAAnswer>> source_answers;
};

// Marks the first answer of each example, translates the context (sentence
// by sentence, the marked span kept in one piece) and the question, then
// recovers the answer span from the translated context. Failed examples are
// discarded with the reason recorded; the job itself only fails on backend
// transport errors.
inline QATranslateResult translate_qa_dataset(const QADataset& input, BatchClient& client,
                                              const QATranslateOptions& opts = {}) {
  struct Plan {
    std::size_t example = 0;
    std::size_t unit_begin = 0;
    std::size_t context_units = 0;  // question unit follows the context units
  };

  QATranslateResult result;
  result.report.total_examples = input.examples.size();

  std::vector<std::string> units;
  std::vector<Plan> plans;
  for (std::size_t i = 0; i < input.examples.size(); ++i) {
    const QAExample& ex = input.examples[i];
    if (ex.answers.empty()) {
      result.report.discard(DiscardReason::invalid_span);
      continue;
    }
    if (ex.answers.size() > 1) result.source_answers[ex.id] = ex.answers;
    MarkResult marked = mark(ex.context, ex.answers[0].answer_start, ex.answers[0].text,
                             opts.delims);
    if (!marked.ok()) {
      result.report.discard(discard_reason_from(marked.error));
      continue;
    }
    Plan plan;
    plan.example = i;
    plan.unit_begin = units.size();
    if (opts.mode == ContextMode::per_sentence) {
      Segmentation seg = split_sentences(marked.marked.text, opts.segmenter);
      seg = group_for_span(seg, marked.marked.span_begin_byte, marked.marked.span_end_byte);
      for (const Segment& s : seg.segments) units.push_back(s.text);
      plan.context_units = seg.segments.size();
    } else {
      units.push_back(marked.marked.text);
      plan.context_units = 1;
    }
    units.push_back(ex.question);
    plans.push_back(plan);
  }

  UnitJobResult job = run_unit_job(units, client, opts.job, "translate-qa");
  result.characters_planned = job.characters_planned;
  result.characters_billed = job.characters_billed;

  for (const Plan& plan : plans) {
    const QAExample& ex = input.examples[plan.example];
    const std::size_t unit_end = plan.unit_begin + plan.context_units + 1;
    std::uint64_t billed_here = 0;
    bool batch_failed = false;
    for (std::size_t u = plan.unit_begin; u < unit_end; ++u) {
      if (job.outputs[u]) billed_here += cp_count(units[u]);
      else batch_failed = true;
    }
    if (batch_failed) {
      result.report.discard(DiscardReason::length_mismatch);
      result.characters_discarded += billed_here;
      continue;
    }
    std::string translated_context;
    for (std::size_t u = plan.unit_begin; u < plan.unit_begin + plan.context_units; ++u) {
      translated_context += *job.outputs[u];
    }
    RecoverResult rec = recover(translated_context, opts.delims);
    if (!rec.ok()) {
      result.report.discard(discard_reason_from(rec.error));
      result.characters_discarded += billed_here;
      continue;
    }
    QAExample out;
    out.id = ex.id;
    out.context = std::move(rec.context);
    out.question = *job.outputs[unit_end - 1];
    out.answers.push_back({std::move(rec.answer), rec.answer_start});
    result.dataset.examples.push_back(std::move(out));
    ++result.report.kept;
  }
  result.dataset.provenance.source = input.provenance.source;
  result.dataset.provenance.language = client.config().target_lang;
  return result;
}

// ---------------------------------------------------------------------------
// NLI

struct NLITranslateResult {
  std::vector<NLIPair> pairs;
  DiscardReport report;
  std::uint64_t characters_planned = 0;
  std::uint64_t characters_billed = 0;
  std::uint64_t characters_discarded = 0;
};

// Premise and hypothesis are translated independently, each as one segment;
// labels are copied unchanged. Only backend length mismatches can discard a
// pair.
inline NLITranslateResult translate_nli_dataset(const std::vector<NLIPair>& input,
                                                BatchClient& client, const JobOptions& opts = {}) {
  NLITranslateResult result;
  result.report.total_examples = input.size();

  std::vector<std::string> units;
  units.reserve(input.size() * 2);
  for (const NLIPair& p : input) {
    units.push_back(p.premise);
    units.push_back(p.hypothesis);
  }

  UnitJobResult job = run_unit_job(units, client, opts, "translate-nli");
  result.characters_planned = job.characters_planned;
  result.characters_billed = job.characters_billed;

  for (std::size_t i = 0; i < input.size(); ++i) {
    const auto& premise = job.outputs[2 * i];
    const auto& hypothesis = job.outputs[2 * i + 1];
    if (!premise || !hypothesis) {
      result.report.discard(DiscardReason::length_mismatch);
      if (premise) result.characters_discarded += cp_count(units[2 * i]);
      if (hypothesis) result.characters_discarded += cp_count(units[2 * i + 1]);
      continue;
    }
    NLIPair out = input[i];
    out.premise = *premise;
    out.hypothesis = *hypothesis;
    result.pairs.push_back(std::move(out));
    ++result.report.kept;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Passages and queries

struct TableTranslateResult {
  IdTextTable table;
  DiscardReport report;
  std::uint64_t characters_planned = 0;
  std::uint64_t characters_billed = 0;
  std::uint64_t characters_discarded = 0;
};

// Passages are short enough to translate as single pieces of text; ids are
// preserved and order is kept.
inline TableTranslateResult translate_table(const IdTextTable& input, BatchClient& client,
                                            const JobOptions& opts = {},
                                            std::string_view kind = "translate-table") {
  TableTranslateResult result;
  result.report.total_examples = input.size();

  std::vector<std::string> units;
  units.reserve(input.size());
  for (const auto& [id, text] : input.entries()) units.push_back(text);

  UnitJobResult job = run_unit_job(units, client, opts, kind);
  result.characters_planned = job.characters_planned;
  result.characters_billed = job.characters_billed;

  for (std::size_t i = 0; i < input.size(); ++i) {
    if (!job.outputs[i]) {
      result.report.discard(DiscardReason::length_mismatch);
      continue;
    }
    result.table.add(input.entries()[i].first, std::move(*job.outputs[i]));
    ++result.report.kept;
  }
  return result;
}

inline TableTranslateResult translate_collection(const PassageCollection& input,
                                                 BatchClient& client, const JobOptions& opts = {}) {
  return translate_table(input, client, opts, "translate-passages");
}

inline TableTranslateResult translate_queries(const QuerySet& input, BatchClient& client,
                                              const JobOptions& opts = {}) {
  return translate_table(input, client, opts, "translate-queries");
}

// Strategy 1: translate every query up front, before any reranking. The
// collection itself is covered by the one-time translate-train cost; queries
// are the recurring part.
inline TableTranslateResult run_strategy1(const QuerySet& queries, BatchClient& client,
                                          const JobOptions& opts = {}) {
  return translate_table(queries, client, opts, "strategy1-queries");
}

// ---------------------------------------------------------------------------
// Strategy 2: one query plus its top-k retrieved passages.

struct Strategy2Passage {
  std::string passage_id;
  std::uint32_t rank = 1;
  std::string text;
};

struct Strategy2Bundle {
  std::string query_id;
  std::string query;
  std::vector<Strategy2Passage> passages;  // rank order

  nlohmann::json to_json() const {
    nlohmann::json passages_json = nlohmann::json::array();
    for (const auto& p : passages) {
      passages_json.push_back(
          {{"passage_id", p.passage_id}, {"rank", p.rank}, {"text", p.text}});
    }
    return {{"query_id", query_id}, {"query", query}, {"passages", std::move(passages_json)}};
  }
};

struct Strategy2Result {
  Strategy2Bundle bundle;
  DiscardReport report;
  std::uint64_t characters_planned = 0;  // |query| + sum of top-k passage lengths, exactly
  std::uint64_t characters_billed = 0;
  std::uint64_t characters_discarded = 0;
};

inline Strategy2Result run_strategy2(const std::string& query_id, const RunFile& run,
                                     const PassageCollection& collection, const QuerySet& queries,
                                     BatchClient& client, std::size_t top_k = 1000,
                                     const JobOptions& opts = {}) {
  const std::string* query = queries.find(query_id);
  if (!query) raise(errc::unknown_query, "query \"" + query_id + "\" not in the query set");
  std::vector<RunEntry> entries = run.entries_for(query_id);
  if (entries.empty()) raise(errc::unknown_query, "query \"" + query_id + "\" has no run entries");
  if (entries.size() > top_k) entries.resize(top_k);

  std::vector<std::string> units;
  units.reserve(entries.size() + 1);
  units.push_back(*query);
  for (const RunEntry& e : entries) {
    const std::string* passage = collection.find(e.passage_id);
    if (!passage) {
      raise(errc::missing_passage_id,
            "run references passage \"" + e.passage_id + "\" absent from the collection");
    }
    units.push_back(*passage);
  }

  Strategy2Result result;
  result.report.total_examples = units.size();
  UnitJobResult job = run_unit_job(units, client, opts, "strategy2:" + query_id);
  result.characters_planned = job.characters_planned;
  result.characters_billed = job.characters_billed;

  result.bundle.query_id = query_id;
  if (job.outputs[0]) {
    result.bundle.query = *job.outputs[0];
    ++result.report.kept;
  } else {
    result.report.discard(DiscardReason::length_mismatch);
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!job.outputs[i + 1]) {
      result.report.discard(DiscardReason::length_mismatch);
      continue;
    }
    result.bundle.passages.push_back(
        {entries[i].passage_id, entries[i].rank, std::move(*job.outputs[i + 1])});
    ++result.report.kept;
  }
  return result;
}

}  // namespace xling
