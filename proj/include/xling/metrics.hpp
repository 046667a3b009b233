#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "xling/errors.hpp"
#include "xling/formats.hpp"
#include "xling/unicode.hpp"

// Evaluation metrics: exact match and token-level F1 for extractive QA,
// accuracy for NLI, MRR@k for passage ranking. QA answers are normalized
// (lowercase, punctuation stripped, articles removed, whitespace collapsed)
// before comparison; the article list is per-language since the toolkit
// scores Portuguese datasets too.

namespace xling {

struct NormalizationRules {
  bool lowercase = true;
  bool strip_punctuation = true;
  std::vector<std::string> articles;

  static NormalizationRules english() { return {true, true, {"a", "an", "the"}}; }
  static NormalizationRules portuguese() {
    return {true, true, {"o", "a", "os", "as", "um", "uma", "uns", "umas"}};
  }
};

namespace detail {

inline bool is_punct_cp(std::uint32_t cp) {
  if (cp < 0x80) {
    char c = static_cast<char>(cp);
    return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') || (c >= '[' && c <= '`') ||
           (c >= '{' && c <= '~');
  }
  switch (cp) {
    case 0x00A1: case 0x00BF:               // ¡ ¿
    case 0x00AB: case 0x00BB:               // « »
    case 0x2018: case 0x2019: case 0x201C: case 0x201D:  // ‘ ’ “ ”
    case 0x2013: case 0x2014: case 0x2026:  // – — …
      return true;
    default:
      return false;
  }
}

}  // namespace detail

// Lowercase, drop punctuation, drop article tokens, collapse whitespace.
inline std::string normalize_answer(std::string_view text, const NormalizationRules& rules) {
  std::string folded;
  folded.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto [cp, len] = decode_cp(text, pos);
    pos += len;
    if (rules.strip_punctuation && detail::is_punct_cp(cp)) continue;
    encode_cp(rules.lowercase ? to_lower_cp(cp) : cp, folded);
  }

  std::string out;
  std::size_t i = 0;
  while (i < folded.size()) {
    while (i < folded.size() && (folded[i] == ' ' || folded[i] == '\t' || folded[i] == '\n' ||
                                 folded[i] == '\r' || folded[i] == '\f' || folded[i] == '\v')) {
      ++i;
    }
    std::size_t start = i;
    while (i < folded.size() && folded[i] != ' ' && folded[i] != '\t' && folded[i] != '\n' &&
           folded[i] != '\r' && folded[i] != '\f' && folded[i] != '\v') {
      ++i;
    }
    if (start == i) continue;
    std::string_view token(folded.data() + start, i - start);
    if (std::find(rules.articles.begin(), rules.articles.end(), token) != rules.articles.end()) {
      continue;
    }
    if (!out.empty()) out += ' ';
    out += token;
  }
  return out;
}

inline std::vector<std::string> answer_tokens(std::string_view text,
                                              const NormalizationRules& rules) {
  std::string norm = normalize_answer(text, rules);
  std::vector<std::string> tokens;
  std::size_t pos = 0;
  while (pos < norm.size()) {
    std::size_t sp = norm.find(' ', pos);
    if (sp == std::string::npos) sp = norm.size();
    tokens.push_back(norm.substr(pos, sp - pos));
    pos = sp + 1;
  }
  return tokens;
}

// 1 iff the normalized prediction equals any normalized gold answer.
inline double exact_match(std::string_view prediction, const std::vector<std::string>& golds,
                          const NormalizationRules& rules = NormalizationRules::english()) {
  const std::string p = normalize_answer(prediction, rules);
  for (const std::string& g : golds) {
    if (p == normalize_answer(g, rules)) return 1.0;
  }
  return 0.0;
}

// Bag-of-tokens F1 with multiset semantics, maximised over gold answers.
inline double token_f1(std::string_view prediction, const std::vector<std::string>& golds,
                       const NormalizationRules& rules = NormalizationRules::english()) {
  const std::vector<std::string> pred = answer_tokens(prediction, rules);
  double best = 0.0;
  for (const std::string& g : golds) {
    const std::vector<std::string> gold = answer_tokens(g, rules);
    if (pred.empty() && gold.empty()) {
      best = std::max(best, 1.0);
      continue;
    }
    if (pred.empty() || gold.empty()) continue;
    std::unordered_map<std::string, std::size_t> counts;
    for (const std::string& t : gold) ++counts[t];
    std::size_t same = 0;
    for (const std::string& t : pred) {
      auto it = counts.find(t);
      if (it != counts.end() && it->second > 0) {
        --it->second;
        ++same;
      }
    }
    if (same == 0) continue;
    const double precision = static_cast<double>(same) / static_cast<double>(pred.size());
    const double recall = static_cast<double>(same) / static_cast<double>(gold.size());
    best = std::max(best, 2.0 * precision * recall / (precision + recall));
  }
  return best;
}

// Predictions keyed by example id.
using QAPrediction = std::map<std::string, std::string>;

struct QAScore {
  double exact_match = 0.0;
  double f1 = 0.0;
  std::size_t examples = 0;
};

// Corpus scores: mean over examples of the per-example max over golds.
// Prediction ids that do not exist in the dataset are an error; examples with
// no prediction score zero.
inline QAScore score_qa(const QADataset& gold, const QAPrediction& predictions,
                        const NormalizationRules& rules = NormalizationRules::english()) {
  std::unordered_map<std::string, const QAExample*> by_id;
  for (const QAExample& ex : gold.examples) by_id.emplace(ex.id, &ex);
  for (const auto& [id, text] : predictions) {
    if (!by_id.count(id)) raise(errc::unknown_example_id, "prediction for unknown id \"" + id + "\"");
  }
  QAScore score;
  score.examples = gold.examples.size();
  if (gold.examples.empty()) return score;
  for (const QAExample& ex : gold.examples) {
    auto pit = predictions.find(ex.id);
    if (pit == predictions.end()) continue;
    std::vector<std::string> golds;
    for (const QAAnswer& a : ex.answers) golds.push_back(a.text);
    score.exact_match += exact_match(pit->second, golds, rules);
    score.f1 += token_f1(pit->second, golds, rules);
  }
  score.exact_match /= static_cast<double>(gold.examples.size());
  score.f1 /= static_cast<double>(gold.examples.size());
  return score;
}

inline double accuracy(const std::vector<std::string>& predicted,
                       const std::vector<std::string>& gold) {
  if (predicted.size() != gold.size()) {
    raise(errc::length_mismatch, "prediction and gold label counts differ");
  }
  if (gold.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) correct += predicted[i] == gold[i];
  return static_cast<double>(correct) / static_cast<double>(gold.size());
}

// Mean over judged queries of 1/rank of the first relevant passage within the
// top k; queries with no qualifying entry score 0.
inline double mrr_at_k(const RunFile& run,
                       const std::map<std::string, std::set<std::string>>& qrels, int k = 10) {
  if (qrels.empty()) return 0.0;
  std::unordered_map<std::string, std::vector<const RunEntry*>> by_query;
  for (const RunEntry& e : run.entries) by_query[e.query_id].push_back(&e);
  double total = 0.0;
  for (const auto& [qid, relevant] : qrels) {
    auto it = by_query.find(qid);
    if (it == by_query.end()) continue;
    std::vector<const RunEntry*> entries = it->second;
    std::sort(entries.begin(), entries.end(),
              [](const RunEntry* a, const RunEntry* b) { return a->rank < b->rank; });
    for (const RunEntry* e : entries) {
      if (e->rank > static_cast<std::uint32_t>(k)) break;
      if (relevant.count(e->passage_id)) {
        total += 1.0 / static_cast<double>(e->rank);
        break;
      }
    }
  }
  return total / static_cast<double>(qrels.size());
}

inline double mrr_at_k(const RunFile& run, int k = 10) { return mrr_at_k(run, run.qrels, k); }

}  // namespace xling
