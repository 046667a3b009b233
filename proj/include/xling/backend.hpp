#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <iterator>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "xling/errors.hpp"
#include "xling/spanmark.hpp"
#include "xling/unicode.hpp"

// The translation boundary. A Translator turns a batch of texts into a batch
// of translations; the real one speaks a small JSON protocol over HTTP, the
// mocks are deterministic test doubles. BatchClient sits on top and owns
// batch-size enforcement, retries with backoff, length checking and exact
// character metering.

namespace xling {

struct BackendConfig {
  std::string endpoint = "mock:identity";  // http(s)://host[:port] or mock:<kind>[:params]
  std::string source_lang = "en";
  std::string target_lang = "pt";
  std::size_t max_batch_size = 32;
  int max_attempts = 3;
  double backoff_base_seconds = 0.5;
  double timeout_seconds = 30.0;
  int max_in_flight = 4;  // concurrent batches upstream code may keep open
  std::string api_key_env = "XLING_API_KEY";

  void validate() const {
    if (max_batch_size < 1) raise(errc::invalid_config, "max batch size must be >= 1");
    if (max_attempts < 1) raise(errc::invalid_config, "max attempts must be >= 1");
    if (max_in_flight < 1) raise(errc::invalid_config, "max in-flight must be >= 1");
    if (endpoint.empty()) raise(errc::invalid_config, "endpoint must be set");
  }
};

// Counters are monotone. characters_submitted counts the characters of every
// successfully translated segment, exactly once each: failed attempts that
// were later retried land in retried_characters instead, so cost arithmetic
// never double-bills a segment.
struct Meter {
  std::uint64_t characters_submitted = 0;
  std::uint64_t characters_received = 0;
  std::uint64_t segments_translated = 0;
  std::uint64_t requests_made = 0;       // successful batch requests
  std::uint64_t retried_characters = 0;  // characters of attempts that had to be retried
  double wall_seconds = 0.0;
  std::vector<double> batch_latencies;   // seconds per successful batch

  nlohmann::json to_json() const {
    return {{"characters_submitted", characters_submitted},
            {"characters_received", characters_received},
            {"segments_translated", segments_translated},
            {"requests_made", requests_made},
            {"retried_characters", retried_characters},
            {"wall_seconds", wall_seconds},
            {"batch_latencies", batch_latencies}};
  }
  static Meter from_json(const nlohmann::json& j) {
    Meter m;
    m.characters_submitted = j.value("characters_submitted", std::uint64_t{0});
    m.characters_received = j.value("characters_received", std::uint64_t{0});
    m.segments_translated = j.value("segments_translated", std::uint64_t{0});
    m.requests_made = j.value("requests_made", std::uint64_t{0});
    m.retried_characters = j.value("retried_characters", std::uint64_t{0});
    m.wall_seconds = j.value("wall_seconds", 0.0);
    if (j.contains("batch_latencies")) {
      m.batch_latencies = j["batch_latencies"].get<std::vector<double>>();
    }
    return m;
  }
};

class Translator {
 public:
  virtual ~Translator() = default;
  virtual std::vector<std::string> translate(const std::vector<std::string>& texts) = 0;
  // Stable identity string; feeds the checkpoint job hash.
  virtual std::string describe() const = 0;
};

// ---------------------------------------------------------------------------
// Mock backends. All of them are deterministic functions of (content, seed),
// never of call order, so pipelines stay reproducible under any in-flight
// batch interleaving.

namespace detail {

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace detail

class IdentityTranslator final : public Translator {
 public:
  std::vector<std::string> translate(const std::vector<std::string>& texts) override {
    return texts;
  }
  std::string describe() const override { return "mock:identity"; }
};

class ReverseWordsTranslator final : public Translator {
 public:
  std::vector<std::string> translate(const std::vector<std::string>& texts) override {
    std::vector<std::string> out;
    out.reserve(texts.size());
    for (const std::string& t : texts) {
      std::vector<std::string> words;
      std::size_t pos = 0;
      while (pos < t.size()) {
        std::size_t sp = t.find(' ', pos);
        if (sp == std::string::npos) sp = t.size();
        if (sp > pos) words.push_back(t.substr(pos, sp - pos));
        pos = sp + 1;
      }
      std::string r;
      for (auto it = words.rbegin(); it != words.rend(); ++it) {
        if (!r.empty()) r += ' ';
        r += *it;
      }
      out.push_back(std::move(r));
    }
    return out;
  }
  std::string describe() const override { return "mock:reverse-words"; }
};

// Swaps every word for a pseudo-translation chosen by content hash. Chunks
// shaped like <...> pass through untouched, so marked spans keep their
// delimiters and QA pipelines can run end to end with changed text.
class DictionarySwapTranslator final : public Translator {
 public:
  explicit DictionarySwapTranslator(std::uint64_t seed) : seed_(seed) {}

  std::vector<std::string> translate(const std::vector<std::string>& texts) override {
    std::vector<std::string> out;
    out.reserve(texts.size());
    for (const std::string& t : texts) out.push_back(swap_text(t));
    return out;
  }
  std::string describe() const override {
    return "mock:dictionary-swap:seed=" + std::to_string(seed_);
  }

 private:
  std::string swap_word(std::string_view w) const {
    static const char* kWords[] = {
        "casa",  "rio",   "verde", "tempo", "luz",  "terra", "sol",   "mar",
        "ponte", "livro", "porta", "flor",  "céu",  "vento", "pedra", "fogo",
        "noite", "dia",   "chuva", "campo", "voz",  "paz",   "cor",   "som",
        "norte", "sul",   "leste", "oeste", "alto", "baixo", "perto", "longe",
    };
    return kWords[detail::fnv1a(w, seed_ ^ 0xcbf29ce484222325ull) % std::size(kWords)];
  }

  std::string swap_text(std::string_view t) const {
    std::string out;
    std::size_t pos = 0;
    while (pos < t.size()) {
      if (t[pos] == ' ') {
        out += ' ';
        ++pos;
        continue;
      }
      if (t[pos] == '<') {
        std::size_t close = t.find('>', pos);
        if (close != std::string_view::npos) {
          out.append(t.substr(pos, close - pos + 1));
          pos = close + 1;
          continue;
        }
      }
      std::size_t end = pos;
      while (end < t.size() && t[end] != ' ' && t[end] != '<') ++end;
      out += swap_word(t.substr(pos, end - pos));
      pos = end;
    }
    return out;
  }

  std::uint64_t seed_;
};

// Removes each delimiter token occurrence independently with probability p,
// modeling a translation model that fails to keep the special symbols. Drop
// decisions are keyed on (text, token, occurrence, seed).
class DelimiterDropperTranslator final : public Translator {
 public:
  DelimiterDropperTranslator(double p, std::uint64_t seed, DelimiterPair delims = {})
      : p_(p), seed_(seed), delims_(std::move(delims)) {
    if (p < 0.0 || p > 1.0) raise(errc::invalid_config, "drop probability must be in [0, 1]");
    delims_.validate();
  }

  std::vector<std::string> translate(const std::vector<std::string>& texts) override {
    std::vector<std::string> out;
    out.reserve(texts.size());
    for (const std::string& t : texts) out.push_back(drop_tokens(t));
    return out;
  }
  std::string describe() const override {
    return "mock:dropper:p=" + std::to_string(p_) + ",seed=" + std::to_string(seed_);
  }

 private:
  std::string drop_tokens(const std::string& text) const {
    struct Cut {
      std::size_t pos;
      std::size_t len;
    };
    std::vector<Cut> cuts;
    const std::uint64_t text_hash = detail::fnv1a(text);
    const std::string* tokens[2] = {&delims_.start_token, &delims_.end_token};
    for (int ti = 0; ti < 2; ++ti) {
      std::size_t occurrence = 0;
      std::size_t pos = text.find(*tokens[ti]);
      while (pos != std::string::npos) {
        std::mt19937_64 rng(text_hash ^ seed_ ^ (ti ? 0x9e3779b97f4a7c15ull : 0xc2b2ae3d27d4eb4full) ^
                            (occurrence * 0x165667b19e3779f9ull));
        if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p_) {
          cuts.push_back({pos, tokens[ti]->size()});
        }
        ++occurrence;
        pos = text.find(*tokens[ti], pos + tokens[ti]->size());
      }
    }
    std::sort(cuts.begin(), cuts.end(), [](const Cut& a, const Cut& b) { return a.pos > b.pos; });
    std::string out = text;
    for (const Cut& c : cuts) out.erase(c.pos, c.len);
    return out;
  }

  double p_;
  std::uint64_t seed_;
  DelimiterPair delims_;
};

// Parses "identity", "reverse-words", "dictionary-swap:seed=1",
// "dropper:p=0.1,seed=7" (with or without a leading "mock:").
inline std::unique_ptr<Translator> make_mock(std::string_view kind, DelimiterPair delims = {}) {
  std::string_view rest = kind;
  if (rest.rfind("mock:", 0) == 0) rest.remove_prefix(5);
  std::string_view name = rest.substr(0, rest.find(':'));
  std::string_view params = name.size() < rest.size() ? rest.substr(name.size() + 1) : "";

  auto param = [&](std::string_view key, std::string_view fallback) -> std::string {
    std::size_t pos = 0;
    while (pos < params.size()) {
      std::size_t comma = params.find(',', pos);
      if (comma == std::string_view::npos) comma = params.size();
      std::string_view kv = params.substr(pos, comma - pos);
      std::size_t eq = kv.find('=');
      if (eq != std::string_view::npos && kv.substr(0, eq) == key) {
        return std::string(kv.substr(eq + 1));
      }
      pos = comma + 1;
    }
    return std::string(fallback);
  };

  if (name == "identity") return std::make_unique<IdentityTranslator>();
  if (name == "reverse-words") return std::make_unique<ReverseWordsTranslator>();
  if (name == "dictionary-swap") {
    return std::make_unique<DictionarySwapTranslator>(std::stoull(param("seed", "0")));
  }
  if (name == "dropper" || name == "delimiter-dropper") {
    return std::make_unique<DelimiterDropperTranslator>(
        std::stod(param("p", "0.1")), std::stoull(param("seed", "0")), std::move(delims));
  }
  raise(errc::invalid_config, "unknown mock backend \"" + std::string(kind) + "\"");
}

// ---------------------------------------------------------------------------
// HTTP backend speaking the /translate JSON protocol:
//   request  {"texts": [...], "source": "en", "target": "pt"}
//   response {"translations": [...]}, same length and order
// Non-200 responses map to TransportError, 429 to RateLimited. Credentials,
// when present in the configured environment variable, ride in a bearer
// Authorization header.
class HttpTranslator final : public Translator {
 public:
  explicit HttpTranslator(BackendConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    if (const char* key = std::getenv(cfg_.api_key_env.c_str())) api_key_ = key;
  }

  std::vector<std::string> translate(const std::vector<std::string>& texts) override {
    httplib::Client client(cfg_.endpoint);
    client.set_connection_timeout(std::chrono::duration<double>(cfg_.timeout_seconds));
    client.set_read_timeout(std::chrono::duration<double>(cfg_.timeout_seconds));
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    nlohmann::json body = {
        {"texts", texts}, {"source", cfg_.source_lang}, {"target", cfg_.target_lang}};
    auto res = client.Post("/translate", headers, body.dump(), "application/json");
    if (!res) {
      raise(errc::transport_error, "no response from " + cfg_.endpoint + " (" +
                                       httplib::to_string(res.error()) + ")");
    }
    if (res->status == 429) raise(errc::rate_limited, "backend rate-limited the request");
    if (res->status != 200) {
      raise(errc::transport_error, "backend returned HTTP " + std::to_string(res->status));
    }
    nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("translations") ||
        !reply["translations"].is_array()) {
      raise(errc::transport_error, "backend response is not a translations object");
    }
    return reply["translations"].get<std::vector<std::string>>();
  }

  std::string describe() const override {
    return cfg_.endpoint + "|" + cfg_.source_lang + ">" + cfg_.target_lang;
  }

 private:
  BackendConfig cfg_;
  std::string api_key_;
};

inline std::unique_ptr<Translator> make_backend(const BackendConfig& cfg,
                                                const DelimiterPair& delims = {}) {
  cfg.validate();
  if (cfg.endpoint.rfind("mock:", 0) == 0) return make_mock(cfg.endpoint, delims);
  return std::make_unique<HttpTranslator>(cfg);
}

// ---------------------------------------------------------------------------

// Batched translate calls with retries, length checking and metering.
// Thread-safe: pipelines may keep up to max_in_flight calls open at once.
class BatchClient {
 public:
  BatchClient(std::shared_ptr<Translator> translator, BackendConfig cfg)
      : translator_(std::move(translator)), cfg_(std::move(cfg)) {
    cfg_.validate();
  }

  // Output order matches input order, including across retries. Throws
  // LengthMismatch when the backend returns the wrong count (the batch is
  // unusable and nothing is billed), TransportError/RateLimited when retries
  // are exhausted.
  std::vector<std::string> translate_batch(const std::vector<std::string>& texts) {
    if (texts.empty()) raise(errc::invalid_config, "empty batch");
    if (texts.size() > cfg_.max_batch_size) {
      raise(errc::invalid_config, "batch of " + std::to_string(texts.size()) +
                                      " exceeds max batch size " +
                                      std::to_string(cfg_.max_batch_size));
    }
    std::uint64_t chars = 0;
    for (const std::string& t : texts) chars += cp_count(t);

    const auto start = std::chrono::steady_clock::now();
    std::vector<std::string> out;
    for (int attempt = 1;; ++attempt) {
      try {
        out = translator_->translate(texts);
        break;
      } catch (const Error& e) {
        const bool retryable =
            e.code() == errc::transport_error || e.code() == errc::rate_limited;
        if (!retryable || attempt >= cfg_.max_attempts) throw;
        {
          std::lock_guard<std::mutex> lock(mu_);
          meter_.retried_characters += chars;
        }
        const double delay = cfg_.backoff_base_seconds * static_cast<double>(1 << (attempt - 1));
        std::this_thread::sleep_for(std::chrono::duration<double>(delay));
      }
    }
    if (out.size() != texts.size()) {
      raise(errc::length_mismatch, "backend returned " + std::to_string(out.size()) +
                                       " translations for " + std::to_string(texts.size()) +
                                       " texts");
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::uint64_t received = 0;
    for (const std::string& t : out) received += cp_count(t);
    {
      std::lock_guard<std::mutex> lock(mu_);
      meter_.characters_submitted += chars;
      meter_.characters_received += received;
      meter_.segments_translated += texts.size();
      meter_.requests_made += 1;
      meter_.wall_seconds += elapsed;
      meter_.batch_latencies.push_back(elapsed);
    }
    return out;
  }

  Meter meter() const {
    std::lock_guard<std::mutex> lock(mu_);
    return meter_;
  }

  // Seeds the meter from a checkpoint snapshot so a resumed job reports the
  // same totals as an uninterrupted one.
  void restore_meter(const Meter& snapshot) {
    std::lock_guard<std::mutex> lock(mu_);
    meter_ = snapshot;
  }

  const BackendConfig& config() const { return cfg_; }
  const Translator& translator() const { return *translator_; }

 private:
  mutable std::mutex mu_;
  Meter meter_;
  std::shared_ptr<Translator> translator_;
  BackendConfig cfg_;
};

}  // namespace xling
