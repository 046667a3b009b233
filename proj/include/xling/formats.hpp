#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "xling/errors.hpp"
#include "xling/unicode.hpp"

// Parsers and writers for the dataset families the pipelines consume:
// extractive QA (SQuAD v1.1 JSON), NLI records (TSV with a schema
// descriptor), and MS MARCO-style collection/query/run TSV files. All
// parsers are pure; parsed structures are plain values safe for concurrent
// reads. Files are UTF-8 with LF newlines.

namespace xling {

using json = nlohmann::json;

struct Provenance {
  std::string source;    // file identity
  std::string language;  // BCP-47 tag, e.g. "en", "pt"
  bool operator==(const Provenance&) const = default;
};

// ---------------------------------------------------------------------------
// Extractive QA

struct QAAnswer {
  std::string text;
  std::size_t answer_start = 0;  // code point offset into the context
  bool operator==(const QAAnswer&) const = default;
};

struct QAExample {
  std::string id;
  std::string context;
  std::string question;
  std::vector<QAAnswer> answers;
  bool operator==(const QAExample&) const = default;
};

struct QADataset {
  std::vector<QAExample> examples;
  Provenance provenance;
  bool operator==(const QADataset&) const = default;
};

// True iff the context substring at answer_start with the answer's length
// equals the answer text exactly.
inline bool answer_matches_context(const QAExample& ex, const QAAnswer& a) {
  const std::size_t len = cp_count(a.text);
  if (a.answer_start + len > cp_count(ex.context)) return false;
  return substr_cp(ex.context, a.answer_start, len) == a.text;
}

enum class OffsetRepair {
  search_unique,  // fix the offset when the answer text occurs exactly once, else reject
  reject,         // never repair, reject any mismatching example
  strict,         // throw OffsetMismatch on the first bad offset
};

struct QAParseOptions {
  OffsetRepair repair = OffsetRepair::search_unique;
  bool require_answers = true;  // SQuAD v1.1 training convention
};

struct QAParseReport {
  std::size_t examples_seen = 0;
  std::vector<std::string> repaired_ids;
  std::vector<std::pair<std::string, std::string>> rejected;  // (id, reason)
};

namespace detail {

// All occurrences (overlapping included): a repair is only safe when the
// answer text occurs exactly once, counting every possible placement.
inline std::vector<std::size_t> find_all(std::string_view text, std::string_view needle) {
  std::vector<std::size_t> hits;
  if (needle.empty()) return hits;
  std::size_t pos = text.find(needle);
  while (pos != std::string_view::npos) {
    hits.push_back(pos);
    pos = text.find(needle, pos + 1);
  }
  return hits;
}

inline const json& require_field(const json& obj, const char* key, const char* where) {
  if (!obj.is_object() || !obj.contains(key)) {
    raise(errc::malformed_schema, std::string("missing \"") + key + "\" in " + where);
  }
  return obj.at(key);
}

inline std::string require_string(const json& obj, const char* key, const char* where) {
  const json& v = require_field(obj, key, where);
  if (!v.is_string()) {
    raise(errc::malformed_schema, std::string("\"") + key + "\" must be a string in " + where);
  }
  return v.get<std::string>();
}

}  // namespace detail

// Parses the SQuAD v1.1 layout (data -> paragraphs -> qas -> answers).
// answer_start values are character offsets of the decoded text. Examples
// whose offsets cannot be validated or repaired are dropped and recorded in
// the report, never silently kept.
inline QADataset parse_qa(std::string_view bytes, QAParseReport* report = nullptr,
                          const QAParseOptions& opts = {}) {
  json doc = json::parse(bytes, nullptr, false);
  if (doc.is_discarded()) raise(errc::malformed_schema, "input is not valid JSON");
  const json& data = detail::require_field(doc, "data", "top-level object");
  if (!data.is_array()) raise(errc::malformed_schema, "\"data\" must be an array");

  QADataset out;
  if (doc.contains("xling_provenance") && doc["xling_provenance"].is_object()) {
    const json& p = doc["xling_provenance"];
    out.provenance.source = p.value("source", "");
    out.provenance.language = p.value("language", "");
  }

  QAParseReport local;
  QAParseReport& rep = report ? *report : local;
  std::unordered_set<std::string> seen_ids;

  for (const json& article : data) {
    const json& paragraphs = detail::require_field(article, "paragraphs", "data entry");
    if (!paragraphs.is_array()) raise(errc::malformed_schema, "\"paragraphs\" must be an array");
    for (const json& para : paragraphs) {
      QAExample base;
      base.context = detail::require_string(para, "context", "paragraph");
      const json& qas = detail::require_field(para, "qas", "paragraph");
      if (!qas.is_array()) raise(errc::malformed_schema, "\"qas\" must be an array");
      for (const json& qa : qas) {
        ++rep.examples_seen;
        QAExample ex = base;
        ex.id = detail::require_string(qa, "id", "qa entry");
        ex.question = detail::require_string(qa, "question", "qa entry");
        if (!seen_ids.insert(ex.id).second) {
          raise(errc::duplicate_id, "duplicate qa id \"" + ex.id + "\"");
        }
        const json& answers = detail::require_field(qa, "answers", "qa entry");
        if (!answers.is_array()) raise(errc::malformed_schema, "\"answers\" must be an array");

        bool rejected = false;
        for (const json& ans : answers) {
          QAAnswer a;
          a.text = detail::require_string(ans, "text", "answer");
          const json& start = detail::require_field(ans, "answer_start", "answer");
          if (!start.is_number_integer() || start.get<std::int64_t>() < 0) {
            raise(errc::malformed_schema, "\"answer_start\" must be a non-negative integer");
          }
          a.answer_start = start.get<std::size_t>();
          if (!answer_matches_context(ex, a)) {
            switch (opts.repair) {
              case OffsetRepair::strict:
                raise(errc::offset_mismatch, "answer \"" + a.text + "\" not at offset " +
                                                 std::to_string(a.answer_start) + " in \"" +
                                                 ex.id + "\"");
              case OffsetRepair::reject:
                rejected = true;
                break;
              case OffsetRepair::search_unique: {
                auto hits = detail::find_all(ex.context, a.text);
                if (hits.size() == 1) {
                  a.answer_start = byte_to_cp(ex.context, hits[0]);
                  rep.repaired_ids.push_back(ex.id);
                } else {
                  rejected = true;
                }
                break;
              }
            }
          }
          if (rejected) break;
          ex.answers.push_back(std::move(a));
        }
        if (rejected) {
          rep.rejected.emplace_back(ex.id, "offset mismatch");
          continue;
        }
        if (opts.require_answers && ex.answers.empty()) {
          rep.rejected.emplace_back(ex.id, "no answers");
          continue;
        }
        out.examples.push_back(std::move(ex));
      }
    }
  }
  return out;
}

// Inverse of parse_qa. Consecutive examples sharing a context are grouped
// back into one paragraph so parse(write(d)) == d including example order.
inline std::string write_qa(const QADataset& ds) {
  json paragraphs = json::array();
  for (const QAExample& ex : ds.examples) {
    json answers = json::array();
    for (const QAAnswer& a : ex.answers) {
      answers.push_back({{"text", a.text}, {"answer_start", a.answer_start}});
    }
    json qa = {{"id", ex.id}, {"question", ex.question}, {"answers", std::move(answers)}};
    if (!paragraphs.empty() && paragraphs.back()["context"] == ex.context) {
      paragraphs.back()["qas"].push_back(std::move(qa));
    } else {
      paragraphs.push_back({{"context", ex.context}, {"qas", json::array({std::move(qa)})}});
    }
  }
  json data = json::array();
  if (!paragraphs.empty()) {
    data.push_back({{"title", ds.provenance.source}, {"paragraphs", std::move(paragraphs)}});
  }
  json doc = {
      {"version", "1.1"},
      {"xling_provenance",
       {{"source", ds.provenance.source}, {"language", ds.provenance.language}}},
      {"data", std::move(data)},
  };
  return doc.dump(1) + "\n";
}

// ---------------------------------------------------------------------------
// NLI

struct NLIPair {
  std::string id;
  std::string premise;
  std::string hypothesis;
  std::string label;
  bool operator==(const NLIPair&) const = default;
};

// Column order and label vocabulary differ between corpora (MNLI is
// three-class, ASSIN2 is binary), so the layout is data, not code.
struct NLISchema {
  std::vector<std::string> columns;  // of {"id","premise","hypothesis","label","ignore"}
  std::vector<std::string> labels;   // declared vocabulary
  bool has_header = false;

  void validate() const {
    int premise = 0, hypothesis = 0, label = 0;
    for (const auto& c : columns) {
      if (c == "premise") ++premise;
      else if (c == "hypothesis") ++hypothesis;
      else if (c == "label") ++label;
      else if (c != "id" && c != "ignore") {
        raise(errc::invalid_config, "unknown NLI column \"" + c + "\"");
      }
    }
    if (premise != 1 || hypothesis != 1 || label != 1) {
      raise(errc::invalid_config, "schema needs exactly one premise, hypothesis and label column");
    }
    if (labels.empty()) raise(errc::invalid_config, "schema declares no labels");
  }

  static NLISchema mnli() {
    return {{"premise", "hypothesis", "label"}, {"entailment", "neutral", "contradiction"}, false};
  }
  static NLISchema assin2() {
    return {{"premise", "hypothesis", "label"}, {"entailment", "none"}, false};
  }
  static NLISchema from_json(const json& j) {
    NLISchema s;
    for (const auto& c : j.at("columns")) s.columns.push_back(c.get<std::string>());
    for (const auto& l : j.at("labels")) s.labels.push_back(l.get<std::string>());
    s.has_header = j.value("has_header", false);
    s.validate();
    return s;
  }
};

namespace detail {

inline std::vector<std::string_view> split_lines(std::string_view bytes) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    std::size_t nl = bytes.find('\n', pos);
    if (nl == std::string_view::npos) nl = bytes.size();
    std::string_view line = bytes.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  return lines;
}

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    std::size_t tab = line.find('\t', pos);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, tab - pos));
    pos = tab + 1;
  }
  return fields;
}

inline void check_tsv_field(std::string_view field, const char* what) {
  if (field.find('\t') != std::string_view::npos || field.find('\n') != std::string_view::npos) {
    raise(errc::ragged_record, std::string(what) + " contains a tab or newline");
  }
}

}  // namespace detail

inline std::vector<NLIPair> parse_nli(std::string_view bytes, const NLISchema& schema) {
  schema.validate();
  std::unordered_set<std::string> vocab(schema.labels.begin(), schema.labels.end());
  std::vector<NLIPair> out;
  auto lines = detail::split_lines(bytes);
  std::size_t row = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i == 0 && schema.has_header) continue;
    std::string_view line = lines[i];
    if (line.empty()) continue;
    auto fields = detail::split_tabs(line);
    if (fields.size() != schema.columns.size()) {
      raise(errc::ragged_record, "line " + std::to_string(i + 1) + " has " +
                                     std::to_string(fields.size()) + " fields, expected " +
                                     std::to_string(schema.columns.size()));
    }
    NLIPair p;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const std::string& col = schema.columns[c];
      if (col == "id") p.id.assign(fields[c]);
      else if (col == "premise") p.premise.assign(fields[c]);
      else if (col == "hypothesis") p.hypothesis.assign(fields[c]);
      else if (col == "label") p.label.assign(fields[c]);
    }
    if (p.id.empty()) p.id = std::to_string(row);
    if (!vocab.count(p.label)) {
      raise(errc::unknown_label, "label \"" + p.label + "\" on line " + std::to_string(i + 1) +
                                     " not in the declared scheme");
    }
    out.push_back(std::move(p));
    ++row;
  }
  return out;
}

inline std::string write_nli(const std::vector<NLIPair>& pairs, const NLISchema& schema) {
  schema.validate();
  std::string out;
  for (const NLIPair& p : pairs) {
    detail::check_tsv_field(p.premise, "premise");
    detail::check_tsv_field(p.hypothesis, "hypothesis");
    bool first = true;
    for (const std::string& col : schema.columns) {
      if (!first) out += '\t';
      first = false;
      if (col == "id") out += p.id;
      else if (col == "premise") out += p.premise;
      else if (col == "hypothesis") out += p.hypothesis;
      else if (col == "label") out += p.label;
    }
    out += '\n';
  }
  return out;
}

// Relabels every pair through `mapping`, which must cover every label present.
// Size and order are conserved.
inline std::vector<NLIPair> remap_labels(std::vector<NLIPair> pairs,
                                         const std::map<std::string, std::string>& mapping) {
  for (NLIPair& p : pairs) {
    auto it = mapping.find(p.label);
    if (it == mapping.end()) {
      raise(errc::unmapped_label, "no mapping for label \"" + p.label + "\"");
    }
    p.label = it->second;
  }
  return pairs;
}

// ---------------------------------------------------------------------------
// Passage ranking (MS MARCO TSV conventions)

// Ordered id -> text table. Keeps file order for byte-stable round trips;
// lookups go through a side index.
class IdTextTable {
 public:
  void add(std::string id, std::string text) {
    if (index_.count(id)) raise(errc::duplicate_id, "duplicate id \"" + id + "\"");
    index_.emplace(id, entries_.size());
    entries_.emplace_back(std::move(id), std::move(text));
  }
  const std::string* find(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &entries_[it->second].second;
  }
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  bool operator==(const IdTextTable& o) const { return entries_ == o.entries_; }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

using PassageCollection = IdTextTable;
using QuerySet = IdTextTable;

inline IdTextTable parse_id_text_tsv(std::string_view bytes) {
  IdTextTable out;
  auto lines = detail::split_lines(bytes);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto fields = detail::split_tabs(lines[i]);
    if (fields.size() != 2) {
      raise(errc::ragged_record, "line " + std::to_string(i + 1) + ": expected id<TAB>text");
    }
    out.add(std::string(fields[0]), std::string(fields[1]));
  }
  return out;
}

inline PassageCollection parse_collection(std::string_view bytes) { return parse_id_text_tsv(bytes); }
inline QuerySet parse_queries(std::string_view bytes) { return parse_id_text_tsv(bytes); }

inline std::string write_id_text_tsv(const IdTextTable& table) {
  std::string out;
  for (const auto& [id, text] : table.entries()) {
    detail::check_tsv_field(id, "id");
    detail::check_tsv_field(text, "text");
    out += id;
    out += '\t';
    out += text;
    out += '\n';
  }
  return out;
}

struct RunEntry {
  std::string query_id;
  std::string passage_id;
  std::uint32_t rank = 1;
  bool operator==(const RunEntry&) const = default;
};

struct RunFile {
  std::vector<RunEntry> entries;
  // Optional binary relevance judgments.
  std::map<std::string, std::set<std::string>> qrels;

  // Entries of one query sorted by ascending rank.
  std::vector<RunEntry> entries_for(const std::string& query_id) const {
    std::vector<RunEntry> out;
    for (const RunEntry& e : entries) {
      if (e.query_id == query_id) out.push_back(e);
    }
    std::sort(out.begin(), out.end(),
              [](const RunEntry& a, const RunEntry& b) { return a.rank < b.rank; });
    return out;
  }
  bool operator==(const RunFile& o) const { return entries == o.entries; }
};

// Lines of "qid<TAB>pid<TAB>rank". Within one query, ranks must be distinct
// and duplicate (qid, pid) pairs are rejected; rank sets that do not form
// 1..n are reported as warnings, not errors.
inline RunFile parse_run(std::string_view bytes, std::vector<std::string>* warnings = nullptr) {
  RunFile out;
  std::unordered_set<std::string> seen_pairs;
  std::unordered_map<std::string, std::set<std::uint32_t>> ranks_by_query;
  auto lines = detail::split_lines(bytes);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto fields = detail::split_tabs(lines[i]);
    if (fields.size() != 3) {
      raise(errc::ragged_record, "line " + std::to_string(i + 1) + ": expected qid<TAB>pid<TAB>rank");
    }
    RunEntry e;
    e.query_id.assign(fields[0]);
    e.passage_id.assign(fields[1]);
    std::uint64_t rank = 0;
    for (char c : fields[2]) {
      if (c < '0' || c > '9') raise(errc::malformed_schema,
                                    "line " + std::to_string(i + 1) + ": rank is not an integer");
      rank = rank * 10 + static_cast<std::uint64_t>(c - '0');
    }
    if (fields[2].empty() || rank == 0) {
      raise(errc::malformed_schema, "line " + std::to_string(i + 1) + ": rank must be positive");
    }
    e.rank = static_cast<std::uint32_t>(rank);
    if (!seen_pairs.insert(e.query_id + '\t' + e.passage_id).second) {
      raise(errc::duplicate_id,
            "duplicate (" + e.query_id + ", " + e.passage_id + ") on line " + std::to_string(i + 1));
    }
    if (!ranks_by_query[e.query_id].insert(e.rank).second) {
      raise(errc::duplicate_id, "duplicate rank " + std::to_string(e.rank) + " for query " +
                                    e.query_id + " on line " + std::to_string(i + 1));
    }
    out.entries.push_back(std::move(e));
  }
  if (warnings) {
    for (const auto& [qid, ranks] : ranks_by_query) {
      if (*ranks.begin() != 1 || *ranks.rbegin() != ranks.size()) {
        warnings->push_back("query " + qid + ": ranks do not form a contiguous 1..n sequence");
      }
    }
  }
  return out;
}

inline std::string write_run(const RunFile& run) {
  std::string out;
  for (const RunEntry& e : run.entries) {
    out += e.query_id;
    out += '\t';
    out += e.passage_id;
    out += '\t';
    out += std::to_string(e.rank);
    out += '\n';
  }
  return out;
}

// Accepts both "qid<TAB>pid" and the TREC 4-column "qid<TAB>0<TAB>pid<TAB>rel"
// layout (entries with rel 0 are skipped).
inline std::map<std::string, std::set<std::string>> parse_qrels(std::string_view bytes) {
  std::map<std::string, std::set<std::string>> out;
  auto lines = detail::split_lines(bytes);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto fields = detail::split_tabs(lines[i]);
    if (fields.size() == 2) {
      out[std::string(fields[0])].insert(std::string(fields[1]));
    } else if (fields.size() == 4) {
      if (fields[3] != "0") out[std::string(fields[0])].insert(std::string(fields[2]));
    } else {
      raise(errc::ragged_record, "line " + std::to_string(i + 1) + ": expected 2 or 4 columns");
    }
  }
  return out;
}

}  // namespace xling
