#pragma once

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "xling/formats.hpp"
#include "xling/unicode.hpp"

// Deterministic generators shared by the property tests. Everything is seeded
// explicitly so failures reproduce.

namespace testutil {

inline const std::vector<std::string>& word_pool() {
  static const std::vector<std::string> words = {
      "casa",    "rio",     "verde",  "tempo",  "luz",      "terra",   "sol",
      "mar",     "ponte",   "livro",  "porta",  "flor",     "céu",     "vento",
      "pedra",   "fogo",    "noite",  "dia",    "chuva",    "campo",   "cidade",
      "estado",  "país",    "região", "ações",  "coração",  "história", "número",
      "water",   "stone",   "river",  "light",  "answer",   "question", "people",
      "system",  "market",  "model",  "paper",  "result",   "método",  "análise",
  };
  return words;
}

inline std::string random_sentence(std::mt19937_64& rng, int min_words = 3, int max_words = 10) {
  std::uniform_int_distribution<int> n_words(min_words, max_words);
  std::uniform_int_distribution<std::size_t> pick(0, word_pool().size() - 1);
  std::uniform_int_distribution<int> punct(0, 9);
  std::string out;
  const int n = n_words(rng);
  for (int i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += word_pool()[pick(rng)];
  }
  switch (punct(rng)) {
    case 0: out += '?'; break;
    case 1: out += '!'; break;
    default: out += '.'; break;
  }
  return out;
}

// A paragraph of 1..max_sentences sentences separated by single spaces.
inline std::string random_context(std::mt19937_64& rng, int max_sentences = 4) {
  std::uniform_int_distribution<int> n_sents(1, max_sentences);
  std::string out;
  const int n = n_sents(rng);
  for (int i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += random_sentence(rng);
  }
  return out;
}

// Picks a word-aligned span of the context: never empty, never starting or
// ending in whitespace, so gold answers look like real annotation.
inline xling::QAAnswer random_answer(std::mt19937_64& rng, const std::string& context) {
  std::vector<std::pair<std::size_t, std::size_t>> words;  // byte ranges
  std::size_t pos = 0;
  while (pos < context.size()) {
    while (pos < context.size() && context[pos] == ' ') ++pos;
    std::size_t start = pos;
    while (pos < context.size() && context[pos] != ' ') ++pos;
    if (pos > start) words.emplace_back(start, pos);
  }
  std::uniform_int_distribution<std::size_t> first(0, words.size() - 1);
  const std::size_t w0 = first(rng);
  std::uniform_int_distribution<std::size_t> last(w0, std::min(words.size() - 1, w0 + 3));
  const std::size_t w1 = last(rng);
  const std::size_t b0 = words[w0].first;
  const std::size_t b1 = words[w1].second;
  xling::QAAnswer a;
  a.text = context.substr(b0, b1 - b0);
  a.answer_start = xling::byte_to_cp(context, b0);
  return a;
}

inline xling::QADataset random_qa_dataset(std::mt19937_64& rng, std::size_t n_examples) {
  xling::QADataset ds;
  ds.provenance = {"synthetic", "pt"};
  for (std::size_t i = 0; i < n_examples; ++i) {
    xling::QAExample ex;
    ex.id = "ex" + std::to_string(i);
    // The index salt keeps contexts unique so content-keyed mocks make
    // independent decisions per example.
    ex.context = "Exemplo " + std::to_string(i) + ": " + random_context(rng);
    ex.question = random_sentence(rng, 3, 6);
    ex.answers.push_back(random_answer(rng, ex.context));
    ds.examples.push_back(std::move(ex));
  }
  return ds;
}

inline std::vector<xling::NLIPair> random_nli_pairs(std::mt19937_64& rng, std::size_t n,
                                                    const std::vector<std::string>& labels = {
                                                        "entailment", "neutral", "contradiction"}) {
  std::vector<xling::NLIPair> out;
  std::uniform_int_distribution<std::size_t> pick(0, labels.size() - 1);
  for (std::size_t i = 0; i < n; ++i) {
    xling::NLIPair p;
    p.id = std::to_string(i);
    p.premise = random_sentence(rng);
    p.hypothesis = random_sentence(rng);
    p.label = labels[pick(rng)];
    out.push_back(std::move(p));
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(XLING_FIXTURE_DIR) / name;
}

// Unique scratch directory under the system temp dir, cleaned up on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    path = std::filesystem::temp_directory_path() /
           ("xling_" + tag + "_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

}  // namespace testutil
