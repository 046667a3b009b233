#pragma once

#include <algorithm>
#include <cfenv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "xling/errors.hpp"
#include "xling/formats.hpp"
#include "xling/unicode.hpp"

// Development/deployment cost model for cross-lingual transfer: one-time cost
// of translating a training corpus, recurring cost per 1,000 inference
// examples, and the latency a translation step adds per batch. Commercial
// pricing is per character, open-source pricing is GPU hours. All arithmetic
// is exact; rounding happens only at presentation time.

namespace xling {

struct PricingModel {
  std::vector<double> commercial_per_million;  // USD per 1e6 characters, one per provider
  std::vector<double> gpu_per_hour;            // USD per hour, one per cloud

  void validate() const {
    if (commercial_per_million.empty() || gpu_per_hour.empty()) {
      raise(errc::invalid_config, "pricing model needs at least one rate of each kind");
    }
    for (double r : commercial_per_million) {
      if (!(r > 0)) raise(errc::invalid_config, "commercial rates must be positive");
    }
    for (double r : gpu_per_hour) {
      if (!(r > 0)) raise(errc::invalid_config, "GPU rates must be positive");
    }
  }

  // April 2021 price points: Google/IBM/Microsoft per-character APIs and
  // V100 hourly rates at Google Cloud / IBM Cloud.
  static PricingModel paper2021() { return {{20.0, 20.0, 10.0}, {2.48, 3.06}}; }

  nlohmann::json to_json() const {
    return {{"commercial_per_million", commercial_per_million}, {"gpu_per_hour", gpu_per_hour}};
  }
  static PricingModel from_json(const nlohmann::json& j) {
    PricingModel p;
    p.commercial_per_million = j.at("commercial_per_million").get<std::vector<double>>();
    p.gpu_per_hour = j.at("gpu_per_hour").get<std::vector<double>>();
    p.validate();
    return p;
  }
};

struct ThroughputProfile {
  double seconds_per_batch = 0.0;
  std::size_t batch_size = 32;
  std::optional<double> examples_per_second;

  void validate(double tolerance = 0.05) const {
    if (!(seconds_per_batch > 0)) raise(errc::invalid_config, "seconds_per_batch must be positive");
    if (batch_size < 1) raise(errc::invalid_config, "batch_size must be >= 1");
    if (examples_per_second) {
      const double implied = static_cast<double>(batch_size) / seconds_per_batch;
      if (std::abs(*examples_per_second - implied) > tolerance * implied) {
        raise(errc::invalid_config, "examples_per_second inconsistent with batch throughput");
      }
    }
  }

  // Measured profile from per-batch latencies (e.g. Meter.batch_latencies).
  static ThroughputProfile from_latencies(const std::vector<double>& batch_latencies,
                                          std::size_t batch_size) {
    if (batch_latencies.empty()) {
      raise(errc::no_measurements, "no batch latencies recorded");
    }
    ThroughputProfile t;
    t.seconds_per_batch =
        std::accumulate(batch_latencies.begin(), batch_latencies.end(), 0.0) /
        static_cast<double>(batch_latencies.size());
    t.batch_size = batch_size;
    return t;
  }
};

struct DatasetStats {
  std::uint64_t total_characters = 0;
  std::uint64_t examples = 0;
  double avg_chars_per_example = 0.0;

  // avg must agree with total/examples up to reporting precision (stats are
  // commonly quoted to two decimals).
  void validate(double tolerance = 0.01) const {
    if (examples == 0) {
      if (total_characters != 0 || avg_chars_per_example != 0.0) {
        raise(errc::invalid_config, "empty dataset must have zero totals");
      }
      return;
    }
    const double implied =
        static_cast<double>(total_characters) / static_cast<double>(examples);
    if (std::abs(avg_chars_per_example - implied) > tolerance) {
      raise(errc::invalid_config, "avg_chars_per_example inconsistent with total/examples");
    }
  }

  static DatasetStats from_counts(std::uint64_t total, std::uint64_t examples) {
    DatasetStats s;
    s.total_characters = total;
    s.examples = examples;
    s.avg_chars_per_example =
        examples ? static_cast<double>(total) / static_cast<double>(examples) : 0.0;
    return s;
  }

  // From published (total, avg) pairs; the example count is implied.
  static DatasetStats from_table(std::uint64_t total, double avg) {
    DatasetStats s;
    s.total_characters = total;
    s.examples = avg > 0 ? static_cast<std::uint64_t>(std::llround(static_cast<double>(total) / avg))
                         : 0;
    s.avg_chars_per_example = avg;
    return s;
  }

  nlohmann::json to_json() const {
    return {{"total_characters", total_characters},
            {"examples", examples},
            {"avg_chars_per_example", avg_chars_per_example}};
  }
  static DatasetStats from_json(const nlohmann::json& j) {
    DatasetStats s;
    s.total_characters = j.at("total_characters").get<std::uint64_t>();
    s.examples = j.at("examples").get<std::uint64_t>();
    s.avg_chars_per_example = j.at("avg_chars_per_example").get<double>();
    return s;
  }
};

// Character counts cover exactly the fields a pipeline would translate.
inline DatasetStats dataset_stats(const QADataset& ds) {
  std::uint64_t total = 0;
  for (const QAExample& ex : ds.examples) total += cp_count(ex.context) + cp_count(ex.question);
  return DatasetStats::from_counts(total, ds.examples.size());
}

inline DatasetStats dataset_stats(const std::vector<NLIPair>& pairs) {
  std::uint64_t total = 0;
  for (const NLIPair& p : pairs) total += cp_count(p.premise) + cp_count(p.hypothesis);
  return DatasetStats::from_counts(total, pairs.size());
}

inline DatasetStats dataset_stats(const IdTextTable& table) {
  std::uint64_t total = 0;
  for (const auto& [id, text] : table.entries()) total += cp_count(text);
  return DatasetStats::from_counts(total, table.size());
}

// ---------------------------------------------------------------------------

inline double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double avg_commercial_rate(const PricingModel& pricing) {
  pricing.validate();
  return mean(pricing.commercial_per_million);
}

inline double avg_gpu_rate(const PricingModel& pricing) {
  pricing.validate();
  return mean(pricing.gpu_per_hour);
}

inline double one_time_commercial(double chars, const PricingModel& pricing) {
  if (chars < 0) raise(errc::invalid_config, "character count must be non-negative");
  return chars * avg_commercial_rate(pricing) / 1e6;
}

inline double one_time_opensource(double wall_hours, const PricingModel& pricing) {
  if (wall_hours < 0) raise(errc::invalid_config, "wall hours must be non-negative");
  return wall_hours * avg_gpu_rate(pricing);
}

inline double recurring_commercial(double avg_chars_per_example, const PricingModel& pricing,
                                   double n_examples = 1000.0) {
  return avg_chars_per_example * n_examples * avg_commercial_rate(pricing) / 1e6;
}

inline double recurring_opensource(const ThroughputProfile& throughput,
                                   const PricingModel& pricing, double n_examples = 1000.0) {
  throughput.validate();
  const double examples_per_second =
      static_cast<double>(throughput.batch_size) / throughput.seconds_per_batch;
  return n_examples / examples_per_second / 3600.0 * avg_gpu_rate(pricing);
}

inline double added_latency(const ThroughputProfile& throughput) {
  throughput.validate();
  return throughput.seconds_per_batch;
}

inline double added_latency(const std::vector<double>& batch_latencies) {
  if (batch_latencies.empty()) raise(errc::no_measurements, "no batch latencies recorded");
  return mean(batch_latencies);
}

// ---------------------------------------------------------------------------

enum class Scenario {
  zero_shot,
  translate_train,
  translate_infer,     // QA/NLI style: translate each test input at inference
  translate_infer_s1,  // ranking: whole collection up front, queries at inference
  translate_infer_s2,  // ranking: query + its top-k passages per request
};

inline std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::zero_shot: return "zero-shot";
    case Scenario::translate_train: return "translate-train";
    case Scenario::translate_infer: return "translate-infer";
    case Scenario::translate_infer_s1: return "translate-infer-s1";
    case Scenario::translate_infer_s2: return "translate-infer-s2";
  }
  return "zero-shot";
}

inline Scenario scenario_from_string(std::string_view s) {
  if (s == "zero-shot") return Scenario::zero_shot;
  if (s == "translate-train") return Scenario::translate_train;
  if (s == "translate-infer") return Scenario::translate_infer;
  if (s == "translate-infer-s1") return Scenario::translate_infer_s1;
  if (s == "translate-infer-s2") return Scenario::translate_infer_s2;
  raise(errc::invalid_config, "unknown scenario \"" + std::string(s) + "\"");
}

struct ScenarioInputs {
  std::optional<DatasetStats> train_stats;  // corpus translated once
  std::optional<DatasetStats> infer_stats;  // per-example characters at inference
  std::optional<double> wall_hours;         // measured one-time translation time
  std::optional<ThroughputProfile> throughput;
};

struct CostReport {
  Scenario scenario = Scenario::zero_shot;
  double one_time_commercial = 0.0;
  double one_time_opensource = 0.0;
  double recurring_commercial = 0.0;  // USD per n examples
  double recurring_opensource = 0.0;
  double added_latency = 0.0;  // seconds per batch

  nlohmann::json to_json() const {
    return {{"scenario", std::string(to_string(scenario))},
            {"one_time_commercial_usd", one_time_commercial},
            {"one_time_opensource_usd", one_time_opensource},
            {"recurring_commercial_usd_per_1k", recurring_commercial},
            {"recurring_opensource_usd_per_1k", recurring_opensource},
            {"added_latency_s_per_batch", added_latency}};
  }
};

// Per-query character load of ranking Strategy 2: the query plus its top-k
// retrieved passages.
inline DatasetStats strategy2_stats(const DatasetStats& queries, const DatasetStats& passages,
                                    std::size_t top_k) {
  DatasetStats s;
  s.avg_chars_per_example =
      queries.avg_chars_per_example + static_cast<double>(top_k) * passages.avg_chars_per_example;
  s.examples = queries.examples;
  s.total_characters = static_cast<std::uint64_t>(
      std::llround(s.avg_chars_per_example * static_cast<double>(s.examples)));
  return s;
}

inline CostReport build_report(Scenario scenario, const ScenarioInputs& in,
                               const PricingModel& pricing, double n_examples = 1000.0) {
  pricing.validate();
  CostReport r;
  r.scenario = scenario;
  auto need = [&](bool present, const char* what) {
    if (!present) {
      raise(errc::missing_statistic,
            std::string(what) + " required for scenario " + std::string(to_string(scenario)));
    }
  };
  switch (scenario) {
    case Scenario::zero_shot:
      break;  // no translation anywhere; every cost is zero
    case Scenario::translate_train:
      need(in.train_stats.has_value(), "training-corpus stats");
      need(in.wall_hours.has_value(), "wall hours");
      r.one_time_commercial =
          one_time_commercial(static_cast<double>(in.train_stats->total_characters), pricing);
      r.one_time_opensource = one_time_opensource(*in.wall_hours, pricing);
      break;
    case Scenario::translate_infer:
    case Scenario::translate_infer_s2:
      need(in.infer_stats.has_value(), "inference stats");
      need(in.throughput.has_value(), "throughput profile");
      r.recurring_commercial =
          recurring_commercial(in.infer_stats->avg_chars_per_example, pricing, n_examples);
      r.recurring_opensource = recurring_opensource(*in.throughput, pricing, n_examples);
      r.added_latency = added_latency(*in.throughput);
      break;
    case Scenario::translate_infer_s1:
      // Strategy 1 pays the whole-collection translation once and the query
      // translation per request.
      need(in.train_stats.has_value(), "collection stats");
      need(in.wall_hours.has_value(), "wall hours");
      need(in.infer_stats.has_value(), "query stats");
      need(in.throughput.has_value(), "throughput profile");
      r.one_time_commercial =
          one_time_commercial(static_cast<double>(in.train_stats->total_characters), pricing);
      r.one_time_opensource = one_time_opensource(*in.wall_hours, pricing);
      r.recurring_commercial =
          recurring_commercial(in.infer_stats->avg_chars_per_example, pricing, n_examples);
      r.recurring_opensource = recurring_opensource(*in.throughput, pricing, n_examples);
      r.added_latency = added_latency(*in.throughput);
      break;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Presentation

// Round-half-even at `decimals` places. Internal arithmetic stays unrounded;
// this is for display only.
inline double round_half_even(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  const int prev = std::fegetround();
  std::fesetround(FE_TONEAREST);
  const double r = std::nearbyint(value * scale) / scale;
  std::fesetround(prev);
  return r;
}

inline std::string format_usd(double value, int decimals = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, round_half_even(value, decimals));
  return buf;
}

// Aligned text table with the same columns as the published cost comparison;
// zero cells print as "-" the way zero-shot rows do.
inline std::string render_cost_table(
    const std::vector<std::pair<std::string, CostReport>>& rows) {
  auto cell = [](double v, int decimals = 2) {
    return v == 0.0 ? std::string("-") : format_usd(v, decimals);
  };
  std::vector<std::vector<std::string>> grid;
  grid.push_back({"Method", "One-time (USD)", "", "Recurring (USD/1k)", "", "Latency (s/batch)"});
  grid.push_back({"", "Comm.", "Open S", "Comm.", "Open S", ""});
  for (const auto& [label, r] : rows) {
    grid.push_back({label, cell(r.one_time_commercial), cell(r.one_time_opensource),
                    cell(r.recurring_commercial), cell(r.recurring_opensource),
                    cell(r.added_latency)});
  }
  std::vector<std::size_t> width(grid[0].size(), 0);
  for (const auto& row : grid) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (const auto& row : grid) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out += row[c];
      if (c + 1 < row.size()) out.append(width[c] - row[c].size() + 2, ' ');
    }
    out += '\n';
  }
  return out;
}

}  // namespace xling
