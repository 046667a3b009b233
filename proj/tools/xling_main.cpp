// xling — translate NLP datasets across languages and model what it costs.
//
// One subcommand per pipeline plus stats, cost-report, score and resume.
// Every translate run captures its effective JobConfig into the output
// directory so the run is reproducible from that file alone, and always
// writes a discard report and meter summary on (partial) completion.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "xling/xling.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) xling::raise(xling::errc::invalid_config, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) xling::raise(xling::errc::io_error, "cannot write " + path.string());
  out << content;
}

struct JobConfig {
  std::string task;  // qa | nli | passages | queries | strategy2
  std::string input;
  std::string output;
  std::string endpoint = "mock:identity";
  std::string source_lang = "en";
  std::string target_lang = "pt";
  std::size_t batch_size = 32;
  int max_attempts = 3;
  double backoff_base_seconds = 0.5;
  double timeout_seconds = 30.0;
  int max_in_flight = 4;
  std::string delim_start = "<answer_start>";
  std::string delim_end = "<answer_end>";
  std::string checkpoint;
  std::string mode = "per-sentence";  // qa contexts: per-sentence | whole-context
  std::string schema;                 // nli schema descriptor file
  std::string abbreviations;          // sentence splitter resource
  std::vector<std::string> remap;     // nli label remaps, "from=to"
  // strategy2 inputs
  std::string query_id;
  std::string run_path;
  std::string collection_path;
  std::string queries_path;
  std::size_t top_k = 1000;

  json to_json() const {
    return {{"task", task},
            {"input", input},
            {"output", output},
            {"endpoint", endpoint},
            {"source_lang", source_lang},
            {"target_lang", target_lang},
            {"batch_size", batch_size},
            {"max_attempts", max_attempts},
            {"backoff_base_seconds", backoff_base_seconds},
            {"timeout_seconds", timeout_seconds},
            {"max_in_flight", max_in_flight},
            {"delim_start", delim_start},
            {"delim_end", delim_end},
            {"checkpoint", checkpoint},
            {"mode", mode},
            {"schema", schema},
            {"abbreviations", abbreviations},
            {"remap", remap},
            {"query_id", query_id},
            {"run", run_path},
            {"collection", collection_path},
            {"queries", queries_path},
            {"top_k", top_k}};
  }

  static JobConfig from_json(const json& j) {
    JobConfig c;
    c.task = j.value("task", c.task);
    c.input = j.value("input", c.input);
    c.output = j.value("output", c.output);
    c.endpoint = j.value("endpoint", c.endpoint);
    c.source_lang = j.value("source_lang", c.source_lang);
    c.target_lang = j.value("target_lang", c.target_lang);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.max_attempts = j.value("max_attempts", c.max_attempts);
    c.backoff_base_seconds = j.value("backoff_base_seconds", c.backoff_base_seconds);
    c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
    c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
    c.delim_start = j.value("delim_start", c.delim_start);
    c.delim_end = j.value("delim_end", c.delim_end);
    c.checkpoint = j.value("checkpoint", c.checkpoint);
    c.mode = j.value("mode", c.mode);
    c.schema = j.value("schema", c.schema);
    c.abbreviations = j.value("abbreviations", c.abbreviations);
    c.remap = j.value("remap", c.remap);
    c.query_id = j.value("query_id", c.query_id);
    c.run_path = j.value("run", c.run_path);
    c.collection_path = j.value("collection", c.collection_path);
    c.queries_path = j.value("queries", c.queries_path);
    c.top_k = j.value("top_k", c.top_k);
    return c;
  }
};

xling::BackendConfig backend_config(const JobConfig& cfg) {
  xling::BackendConfig b;
  b.endpoint = cfg.endpoint;
  b.source_lang = cfg.source_lang;
  b.target_lang = cfg.target_lang;
  b.max_batch_size = cfg.batch_size;
  b.max_attempts = cfg.max_attempts;
  b.backoff_base_seconds = cfg.backoff_base_seconds;
  b.timeout_seconds = cfg.timeout_seconds;
  b.max_in_flight = cfg.max_in_flight;
  return b;
}

xling::DelimiterPair delims_of(const JobConfig& cfg) {
  xling::DelimiterPair d{cfg.delim_start, cfg.delim_end};
  d.validate();
  return d;
}

void require_input(const std::string& path, const char* what) {
  if (path.empty()) xling::raise(xling::errc::invalid_config, std::string(what) + " not set");
  if (!fs::exists(path)) {
    xling::raise(xling::errc::invalid_config, std::string(what) + " \"" + path + "\" does not exist");
  }
}

xling::NLISchema load_schema(const JobConfig& cfg) {
  if (cfg.schema.empty()) return xling::NLISchema::mnli();
  json j = json::parse(read_file(cfg.schema));
  return xling::NLISchema::from_json(j);
}

xling::SegmenterOptions segmenter_options(const JobConfig& cfg) {
  xling::SegmenterOptions opts;
  if (!cfg.abbreviations.empty()) {
    opts.abbreviations = xling::load_abbreviations(cfg.abbreviations);
  }
  return opts;
}

// Captures the effective config before running, so the run is reproducible
// even if it dies halfway through.
fs::path prepare_output_dir(const JobConfig& cfg) {
  if (cfg.output.empty()) xling::raise(xling::errc::invalid_config, "--output not set");
  fs::path dir(cfg.output);
  fs::create_directories(dir);
  write_file(dir / "job_config.json", cfg.to_json().dump(1) + "\n");
  return dir;
}

void write_run_summary(const fs::path& dir, const xling::BatchClient& client,
                       const xling::DiscardReport& report, json extra = json::object()) {
  json report_json = report.to_json();
  for (auto& [key, value] : extra.items()) report_json[key] = value;
  write_file(dir / "discard_report.json", report_json.dump(1) + "\n");
  write_file(dir / "meter.json", client.meter().to_json().dump(1) + "\n");
  const xling::Meter m = client.meter();
  std::cout << "kept " << report.kept << "/" << report.total_examples << " (discarded "
            << report.discarded() << "); billed " << m.characters_submitted << " characters in "
            << m.requests_made << " requests\n";
}

// Meter summary still gets written when a job dies so partial work is
// accounted for.
void write_failure_summary(const fs::path& dir, const xling::BatchClient& client,
                           const std::string& error) {
  write_file(dir / "meter.json", client.meter().to_json().dump(1) + "\n");
  write_file(dir / "error.json", json{{"error", error}}.dump(1) + "\n");
}

int run_translate_qa(const JobConfig& cfg) {
  require_input(cfg.input, "--input");
  fs::path dir = prepare_output_dir(cfg);
  xling::QAParseReport parse_report;
  xling::QADataset dataset = xling::parse_qa(read_file(cfg.input), &parse_report);
  dataset.provenance.source = cfg.input;
  if (dataset.provenance.language.empty()) dataset.provenance.language = cfg.source_lang;

  auto delims = delims_of(cfg);
  xling::BatchClient client(xling::make_backend(backend_config(cfg), delims), backend_config(cfg));
  xling::QATranslateOptions opts;
  opts.delims = delims;
  opts.mode = cfg.mode == "whole-context" ? xling::ContextMode::whole_context
                                          : xling::ContextMode::per_sentence;
  opts.segmenter = segmenter_options(cfg);
  if (!cfg.checkpoint.empty()) opts.job.checkpoint = cfg.checkpoint;

  try {
    xling::QATranslateResult result = xling::translate_qa_dataset(dataset, client, opts);
    write_file(dir / "translated.json", xling::write_qa(result.dataset));
    json extra = {{"characters_planned", result.characters_planned},
                  {"characters_billed", result.characters_billed},
                  {"characters_discarded", result.characters_discarded},
                  {"parse_rejected", parse_report.rejected.size()},
                  {"parse_repaired", parse_report.repaired_ids.size()}};
    if (!result.source_answers.empty()) {
      json answers = json::object();
      for (const auto& [id, list] : result.source_answers) {
        json arr = json::array();
        for (const auto& a : list) arr.push_back({{"text", a.text}, {"answer_start", a.answer_start}});
        answers[id] = std::move(arr);
      }
      extra["source_answers"] = std::move(answers);
    }
    write_run_summary(dir, client, result.report, std::move(extra));
    return 0;
  } catch (const xling::Error& e) {
    write_failure_summary(dir, client, e.what());
    throw;
  }
}

int run_translate_nli(const JobConfig& cfg) {
  require_input(cfg.input, "--input");
  fs::path dir = prepare_output_dir(cfg);
  xling::NLISchema schema = load_schema(cfg);
  std::vector<xling::NLIPair> pairs = xling::parse_nli(read_file(cfg.input), schema);
  if (!cfg.remap.empty()) {
    std::map<std::string, std::string> mapping;
    for (const std::string& label : schema.labels) mapping[label] = label;
    for (const std::string& rule : cfg.remap) {
      std::size_t eq = rule.find('=');
      if (eq == std::string::npos) {
        xling::raise(xling::errc::invalid_config, "--remap expects from=to, got \"" + rule + "\"");
      }
      mapping[rule.substr(0, eq)] = rule.substr(eq + 1);
    }
    pairs = xling::remap_labels(std::move(pairs), mapping);
  }

  xling::BatchClient client(xling::make_backend(backend_config(cfg)), backend_config(cfg));
  xling::JobOptions job;
  if (!cfg.checkpoint.empty()) job.checkpoint = cfg.checkpoint;

  try {
    xling::NLITranslateResult result = xling::translate_nli_dataset(pairs, client, job);
    write_file(dir / "translated.tsv", xling::write_nli(result.pairs, schema));
    write_run_summary(dir, client, result.report,
                      {{"characters_planned", result.characters_planned},
                       {"characters_billed", result.characters_billed},
                       {"characters_discarded", result.characters_discarded}});
    return 0;
  } catch (const xling::Error& e) {
    write_failure_summary(dir, client, e.what());
    throw;
  }
}

int run_translate_table(const JobConfig& cfg, bool as_queries) {
  require_input(cfg.input, "--input");
  fs::path dir = prepare_output_dir(cfg);
  xling::IdTextTable table = xling::parse_id_text_tsv(read_file(cfg.input));

  xling::BatchClient client(xling::make_backend(backend_config(cfg)), backend_config(cfg));
  xling::JobOptions job;
  if (!cfg.checkpoint.empty()) job.checkpoint = cfg.checkpoint;

  try {
    xling::TableTranslateResult result = as_queries ? xling::translate_queries(table, client, job)
                                                    : xling::translate_collection(table, client, job);
    write_file(dir / "translated.tsv", xling::write_id_text_tsv(result.table));
    write_run_summary(dir, client, result.report,
                      {{"characters_planned", result.characters_planned},
                       {"characters_billed", result.characters_billed},
                       {"characters_discarded", result.characters_discarded}});
    return 0;
  } catch (const xling::Error& e) {
    write_failure_summary(dir, client, e.what());
    throw;
  }
}

int run_strategy2_cmd(const JobConfig& cfg) {
  require_input(cfg.run_path, "--run");
  require_input(cfg.collection_path, "--collection");
  require_input(cfg.queries_path, "--queries");
  if (cfg.query_id.empty()) xling::raise(xling::errc::invalid_config, "--query-id not set");
  fs::path dir = prepare_output_dir(cfg);

  xling::RunFile run = xling::parse_run(read_file(cfg.run_path));
  xling::PassageCollection collection = xling::parse_collection(read_file(cfg.collection_path));
  xling::QuerySet queries = xling::parse_queries(read_file(cfg.queries_path));

  xling::BatchClient client(xling::make_backend(backend_config(cfg)), backend_config(cfg));
  xling::JobOptions job;
  if (!cfg.checkpoint.empty()) job.checkpoint = cfg.checkpoint;

  try {
    xling::Strategy2Result result =
        xling::run_strategy2(cfg.query_id, run, collection, queries, client, cfg.top_k, job);
    write_file(dir / "bundle.json", result.bundle.to_json().dump(1) + "\n");
    write_run_summary(dir, client, result.report,
                      {{"characters_planned", result.characters_planned},
                       {"characters_billed", result.characters_billed},
                       {"characters_discarded", result.characters_discarded}});
    return 0;
  } catch (const xling::Error& e) {
    write_failure_summary(dir, client, e.what());
    throw;
  }
}

int dispatch_task(const JobConfig& cfg) {
  if (cfg.task == "qa") return run_translate_qa(cfg);
  if (cfg.task == "nli") return run_translate_nli(cfg);
  if (cfg.task == "passages") return run_translate_table(cfg, false);
  if (cfg.task == "queries") return run_translate_table(cfg, true);
  if (cfg.task == "strategy2") return run_strategy2_cmd(cfg);
  xling::raise(xling::errc::invalid_config, "unknown task \"" + cfg.task + "\"");
}

int run_stats(const std::string& task, const std::string& input, const std::string& schema_path,
              const std::string& output) {
  require_input(input, "--input");
  xling::DatasetStats stats;
  if (task == "qa") {
    stats = xling::dataset_stats(xling::parse_qa(read_file(input)));
  } else if (task == "nli") {
    xling::NLISchema schema = schema_path.empty()
                                  ? xling::NLISchema::mnli()
                                  : xling::NLISchema::from_json(json::parse(read_file(schema_path)));
    stats = xling::dataset_stats(xling::parse_nli(read_file(input), schema));
  } else if (task == "collection" || task == "queries") {
    stats = xling::dataset_stats(xling::parse_id_text_tsv(read_file(input)));
  } else {
    xling::raise(xling::errc::invalid_config, "unknown stats task \"" + task + "\"");
  }
  std::string text = stats.to_json().dump(1) + "\n";
  if (!output.empty()) write_file(output, text);
  std::cout << text;
  return 0;
}

xling::PricingModel load_pricing(const std::string& profile) {
  if (profile.empty() || profile == "paper-2021") return xling::PricingModel::paper2021();
  return xling::PricingModel::from_json(json::parse(read_file(profile)));
}

int run_cost_report(const std::string& scenario_name, const std::string& profile,
                    const std::string& train_stats_path, const std::string& infer_stats_path,
                    const std::string& collection_stats_path, const std::string& query_stats_path,
                    std::size_t top_k, double wall_hours, double latency, std::size_t batch_size,
                    double n_examples, const std::string& output) {
  xling::PricingModel pricing = load_pricing(profile);
  xling::Scenario scenario = xling::scenario_from_string(scenario_name);

  xling::ScenarioInputs inputs;
  auto load_stats = [](const std::string& path) {
    return xling::DatasetStats::from_json(json::parse(read_file(path)));
  };
  if (!train_stats_path.empty()) inputs.train_stats = load_stats(train_stats_path);
  if (!infer_stats_path.empty()) inputs.infer_stats = load_stats(infer_stats_path);
  if (!collection_stats_path.empty() && !query_stats_path.empty()) {
    xling::DatasetStats collection = load_stats(collection_stats_path);
    xling::DatasetStats queries = load_stats(query_stats_path);
    inputs.infer_stats = xling::strategy2_stats(queries, collection, top_k);
    if (!inputs.train_stats) inputs.train_stats = collection;
  }
  if (wall_hours >= 0) inputs.wall_hours = wall_hours;
  if (latency > 0) {
    xling::ThroughputProfile t;
    t.seconds_per_batch = latency;
    t.batch_size = batch_size;
    inputs.throughput = t;
  }

  xling::CostReport report = xling::build_report(scenario, inputs, pricing, n_examples);
  std::cout << xling::render_cost_table({{std::string(xling::to_string(scenario)), report}});
  std::string text = report.to_json().dump(1) + "\n";
  if (!output.empty()) write_file(output, text);
  else std::cout << text;
  return 0;
}

int run_score(const std::string& task, const std::string& gold_path, const std::string& pred_path,
              const std::string& run_path, const std::string& qrels_path,
              const std::string& schema_path, const std::string& articles, int k,
              const std::string& output) {
  json result;
  if (task == "qa") {
    require_input(gold_path, "--gold");
    require_input(pred_path, "--pred");
    xling::QADataset gold = xling::parse_qa(read_file(gold_path));
    json pred_json = json::parse(read_file(pred_path));
    xling::QAPrediction predictions;
    for (auto& [id, text] : pred_json.items()) predictions[id] = text.get<std::string>();
    xling::NormalizationRules rules = articles == "pt" ? xling::NormalizationRules::portuguese()
                                                       : xling::NormalizationRules::english();
    if (articles == "none") rules.articles.clear();
    xling::QAScore score = xling::score_qa(gold, predictions, rules);
    result = {{"exact_match", score.exact_match}, {"f1", score.f1}, {"examples", score.examples}};
  } else if (task == "nli") {
    require_input(gold_path, "--gold");
    require_input(pred_path, "--pred");
    xling::NLISchema schema = schema_path.empty()
                                  ? xling::NLISchema::mnli()
                                  : xling::NLISchema::from_json(json::parse(read_file(schema_path)));
    std::vector<xling::NLIPair> gold = xling::parse_nli(read_file(gold_path), schema);
    std::vector<std::string> gold_labels, pred_labels;
    for (const auto& p : gold) gold_labels.push_back(p.label);
    for (std::string_view line : xling::detail::split_lines(read_file(pred_path))) {
      if (line.empty()) continue;
      std::size_t tab = line.find('\t');
      pred_labels.emplace_back(tab == std::string_view::npos ? line : line.substr(tab + 1));
    }
    result = {{"accuracy", xling::accuracy(pred_labels, gold_labels)},
              {"examples", gold_labels.size()}};
  } else if (task == "ranking") {
    require_input(run_path, "--run");
    require_input(qrels_path, "--qrels");
    xling::RunFile run = xling::parse_run(read_file(run_path));
    auto qrels = xling::parse_qrels(read_file(qrels_path));
    result = {{"mrr_at_" + std::to_string(k), xling::mrr_at_k(run, qrels, k)},
              {"queries", qrels.size()}};
  } else {
    xling::raise(xling::errc::invalid_config, "unknown score task \"" + task + "\"");
  }
  std::string text = result.dump(1) + "\n";
  if (!output.empty()) write_file(output, text);
  std::cout << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"xling — cross-lingual dataset translation and cost analysis"};
  app.require_subcommand(1);

  JobConfig cfg;
  std::string config_path;
  int rc = 0;

  auto add_backend_flags = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JobConfig JSON; flags override its values");
    sub->add_option("--backend", cfg.endpoint,
                    "http(s)://host[:port] or mock:<kind>[:params] "
                    "(identity, reverse-words, dictionary-swap:seed=N, dropper:p=X,seed=N)");
    sub->add_option("--source-lang", cfg.source_lang, "BCP-47 source language tag");
    sub->add_option("--target-lang", cfg.target_lang, "BCP-47 target language tag");
    sub->add_option("--batch-size", cfg.batch_size, "translation batch size")->check(CLI::PositiveNumber);
    sub->add_option("--max-attempts", cfg.max_attempts, "attempts per batch before giving up");
    sub->add_option("--backoff", cfg.backoff_base_seconds, "retry backoff base seconds");
    sub->add_option("--timeout", cfg.timeout_seconds, "request timeout seconds");
    sub->add_option("--max-in-flight", cfg.max_in_flight, "concurrent batches in flight");
    sub->add_option("--checkpoint", cfg.checkpoint, "checkpoint file (resume if it exists)");
    sub->add_option("--delims", [&cfg](const std::vector<std::string>& values) {
      const std::string& v = values.back();
      std::size_t comma = v.find(',');
      if (comma == std::string::npos) return false;
      cfg.delim_start = v.substr(0, comma);
      cfg.delim_end = v.substr(comma + 1);
      return true;
    }, "delimiter pair as start,end");
  };

  auto apply_config_file = [&](CLI::App* sub) {
    // Config values fill in everything the command line did not set.
    if (config_path.empty()) return;
    JobConfig from_file = JobConfig::from_json(json::parse(read_file(config_path)));
    JobConfig merged = from_file;
    merged.task = cfg.task;
    if (sub->count("--input")) merged.input = cfg.input;
    if (sub->count("--output")) merged.output = cfg.output;
    if (sub->count("--backend")) merged.endpoint = cfg.endpoint;
    if (sub->count("--source-lang")) merged.source_lang = cfg.source_lang;
    if (sub->count("--target-lang")) merged.target_lang = cfg.target_lang;
    if (sub->count("--batch-size")) merged.batch_size = cfg.batch_size;
    if (sub->count("--max-attempts")) merged.max_attempts = cfg.max_attempts;
    if (sub->count("--backoff")) merged.backoff_base_seconds = cfg.backoff_base_seconds;
    if (sub->count("--timeout")) merged.timeout_seconds = cfg.timeout_seconds;
    if (sub->count("--max-in-flight")) merged.max_in_flight = cfg.max_in_flight;
    if (sub->count("--checkpoint")) merged.checkpoint = cfg.checkpoint;
    if (sub->count("--delims")) {
      merged.delim_start = cfg.delim_start;
      merged.delim_end = cfg.delim_end;
    }
    if (sub->count("--mode")) merged.mode = cfg.mode;
    if (sub->count("--schema")) merged.schema = cfg.schema;
    if (sub->count("--abbreviations")) merged.abbreviations = cfg.abbreviations;
    if (sub->count("--remap")) merged.remap = cfg.remap;
    if (sub->count("--query-id")) merged.query_id = cfg.query_id;
    if (sub->count("--run")) merged.run_path = cfg.run_path;
    if (sub->count("--collection")) merged.collection_path = cfg.collection_path;
    if (sub->count("--queries")) merged.queries_path = cfg.queries_path;
    if (sub->count("--k")) merged.top_k = cfg.top_k;
    cfg = merged;
  };

  // translate-qa
  auto* qa = app.add_subcommand("translate-qa", "Translate an extractive QA dataset (SQuAD JSON)");
  qa->add_option("--input", cfg.input, "SQuAD v1.1 JSON file");
  qa->add_option("--output", cfg.output, "output directory");
  qa->add_option("--mode", cfg.mode, "context handling: per-sentence | whole-context");
  qa->add_option("--abbreviations", cfg.abbreviations, "abbreviation list for the splitter");
  add_backend_flags(qa);
  qa->callback([&] {
    cfg.task = "qa";
    apply_config_file(qa);
    rc = run_translate_qa(cfg);
  });

  // translate-nli
  auto* nli = app.add_subcommand("translate-nli", "Translate an NLI dataset (TSV)");
  nli->add_option("--input", cfg.input, "NLI TSV file");
  nli->add_option("--output", cfg.output, "output directory");
  nli->add_option("--schema", cfg.schema, "schema descriptor JSON (columns + labels)");
  nli->add_option("--remap", cfg.remap, "label remap rules, from=to (repeatable)");
  add_backend_flags(nli);
  nli->callback([&] {
    cfg.task = "nli";
    apply_config_file(nli);
    rc = run_translate_nli(cfg);
  });

  // translate-passages / translate-queries
  auto* passages = app.add_subcommand("translate-passages", "Translate a passage collection (id\\ttext)");
  passages->add_option("--input", cfg.input, "collection TSV");
  passages->add_option("--output", cfg.output, "output directory");
  add_backend_flags(passages);
  passages->callback([&] {
    cfg.task = "passages";
    apply_config_file(passages);
    rc = run_translate_table(cfg, false);
  });

  auto* queries = app.add_subcommand("translate-queries", "Translate a query set (id\\ttext)");
  queries->add_option("--input", cfg.input, "queries TSV");
  queries->add_option("--output", cfg.output, "output directory");
  add_backend_flags(queries);
  queries->callback([&] {
    cfg.task = "queries";
    apply_config_file(queries);
    rc = run_translate_table(cfg, true);
  });

  // strategy2
  auto* s2 = app.add_subcommand("strategy2",
                                "Translate one query plus its top-k run passages");
  s2->add_option("--query-id", cfg.query_id, "query to bundle");
  s2->add_option("--run", cfg.run_path, "run file (qid\\tpid\\trank)");
  s2->add_option("--collection", cfg.collection_path, "collection TSV");
  s2->add_option("--queries", cfg.queries_path, "queries TSV");
  s2->add_option("--k", cfg.top_k, "passages per query");
  s2->add_option("--output", cfg.output, "output directory");
  add_backend_flags(s2);
  s2->callback([&] {
    cfg.task = "strategy2";
    apply_config_file(s2);
    rc = run_strategy2_cmd(cfg);
  });

  // stats
  std::string stats_task, stats_input, stats_schema, stats_output;
  auto* stats = app.add_subcommand("stats", "Character statistics of a dataset");
  stats->add_option("--task", stats_task, "qa | nli | collection | queries")->required();
  stats->add_option("--input", stats_input, "dataset file")->required();
  stats->add_option("--schema", stats_schema, "NLI schema descriptor JSON");
  stats->add_option("--output", stats_output, "also write the JSON here");
  stats->callback([&] { rc = run_stats(stats_task, stats_input, stats_schema, stats_output); });

  // cost-report
  std::string cr_scenario, cr_profile = "paper-2021", cr_train, cr_infer, cr_collection, cr_query,
              cr_output;
  std::size_t cr_k = 1000, cr_batch = 32;
  double cr_hours = -1.0, cr_latency = 0.0, cr_n = 1000.0;
  auto* cost = app.add_subcommand("cost-report", "One-time/recurring cost and added latency");
  cost->add_option("--scenario", cr_scenario,
                   "zero-shot | translate-train | translate-infer | translate-infer-s1 | "
                   "translate-infer-s2")
      ->required();
  cost->add_option("--profile", cr_profile, "pricing profile name or JSON file (default paper-2021)");
  cost->add_option("--train-stats", cr_train, "stats JSON of the corpus translated once");
  cost->add_option("--infer-stats", cr_infer, "stats JSON of the inference inputs");
  cost->add_option("--collection-stats", cr_collection, "collection stats JSON (strategy 2)");
  cost->add_option("--query-stats", cr_query, "query stats JSON (strategy 2)");
  cost->add_option("--k", cr_k, "passages per query for strategy 2");
  cost->add_option("--wall-hours", cr_hours, "measured one-time translation wall hours");
  cost->add_option("--latency", cr_latency, "measured seconds per translated batch");
  cost->add_option("--batch-size", cr_batch, "batch size behind --latency");
  cost->add_option("--n", cr_n, "recurring cost is per this many examples");
  cost->add_option("--output", cr_output, "write the report JSON here");
  cost->callback([&] {
    rc = run_cost_report(cr_scenario, cr_profile, cr_train, cr_infer, cr_collection, cr_query,
                         cr_k, cr_hours, cr_latency, cr_batch, cr_n, cr_output);
  });

  // score
  std::string sc_task, sc_gold, sc_pred, sc_run, sc_qrels, sc_schema, sc_articles = "en", sc_output;
  int sc_k = 10;
  auto* score = app.add_subcommand("score", "Score predictions (EM/F1, accuracy, MRR@k)");
  score->add_option("--task", sc_task, "qa | nli | ranking")->required();
  score->add_option("--gold", sc_gold, "gold dataset file");
  score->add_option("--pred", sc_pred, "predictions file (QA: JSON id->answer; NLI: labels)");
  score->add_option("--run", sc_run, "run file for ranking");
  score->add_option("--qrels", sc_qrels, "relevance judgments for ranking");
  score->add_option("--schema", sc_schema, "NLI schema descriptor JSON");
  score->add_option("--articles", sc_articles, "article list for QA normalization: en | pt | none");
  score->add_option("--k", sc_k, "MRR cutoff");
  score->add_option("--output", sc_output, "write the score JSON here");
  score->callback([&] {
    rc = run_score(sc_task, sc_gold, sc_pred, sc_run, sc_qrels, sc_schema, sc_articles, sc_k,
                   sc_output);
  });

  // resume
  std::string resume_config;
  auto* resume = app.add_subcommand("resume", "Resume a checkpointed translate job");
  resume->add_option("--config", resume_config, "job_config.json captured by the original run")
      ->required();
  resume->callback([&] {
    cfg = JobConfig::from_json(json::parse(read_file(resume_config)));
    if (cfg.checkpoint.empty()) {
      xling::raise(xling::errc::invalid_config, "job config has no checkpoint path");
    }
    rc = dispatch_task(cfg);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const xling::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == xling::errc::invalid_config ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return rc;
}
