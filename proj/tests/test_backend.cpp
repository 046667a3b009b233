#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "helpers.hpp"
#include "xling/backend.hpp"
#include "xling/spanmark.hpp"

using namespace xling;

namespace {

BackendConfig mock_config(std::string endpoint, std::size_t batch = 32) {
  BackendConfig cfg;
  cfg.endpoint = std::move(endpoint);
  cfg.max_batch_size = batch;
  cfg.backoff_base_seconds = 0.001;
  return cfg;
}

BatchClient make_client(const std::string& endpoint, std::size_t batch = 32) {
  BackendConfig cfg = mock_config(endpoint, batch);
  return BatchClient(make_backend(cfg), cfg);
}

// In-process /translate server for exercising the wire protocol.
struct TestServer {
  httplib::Server server;
  int port = 0;
  std::thread thread;
  std::atomic<int> requests{0};
  int fail_first = 0;       // 500s before the first success
  int rate_limit_first = 0; // 429s before the first success
  bool wrong_count = false;
  std::string expect_authorization;

  TestServer() {
    server.Post("/translate", [this](const httplib::Request& req, httplib::Response& res) {
      const int n = ++requests;
      if (!expect_authorization.empty() &&
          req.get_header_value("Authorization") != expect_authorization) {
        res.status = 403;
        return;
      }
      if (n <= fail_first) {
        res.status = 500;
        return;
      }
      if (n <= fail_first + rate_limit_first) {
        res.status = 429;
        return;
      }
      auto body = nlohmann::json::parse(req.body);
      auto texts = body.at("texts").get<std::vector<std::string>>();
      if (wrong_count) texts.pop_back();
      // Tag with the language pair so tests can see the request fields.
      for (std::string& t : texts) {
        t += "|" + body.at("source").get<std::string>() + ">" +
             body.at("target").get<std::string>();
      }
      res.set_content(nlohmann::json{{"translations", texts}}.dump(), "application/json");
    });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~TestServer() {
    server.stop();
    thread.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port); }
};

}  // namespace

TEST_CASE("identity mock translates and meters exact characters") {
  BatchClient client = make_client("mock:identity");
  auto out = client.translate_batch({"a", "b"});
  CHECK(out == std::vector<std::string>{"a", "b"});
  Meter m = client.meter();
  CHECK(m.characters_submitted == 2);
  CHECK(m.characters_received == 2);
  CHECK(m.segments_translated == 2);
  CHECK(m.requests_made == 1);
  CHECK(m.batch_latencies.size() == 1);
}

TEST_CASE("character metering counts code points") {
  BatchClient client = make_client("mock:identity");
  client.translate_batch({"café", "ção"});
  CHECK(client.meter().characters_submitted == 7);
}

TEST_CASE("ten batches of 32 one-char strings") {
  BatchClient client = make_client("mock:identity");
  std::vector<std::string> batch(32, "x");
  for (int i = 0; i < 10; ++i) client.translate_batch(batch);
  Meter m = client.meter();
  CHECK(m.requests_made == 10);
  CHECK(m.characters_submitted == 320);
  CHECK(m.segments_translated == 320);
}

TEST_CASE("batch preconditions are enforced") {
  BatchClient client = make_client("mock:identity", 4);
  CHECK_THROWS_AS(client.translate_batch({}), Error);
  CHECK_THROWS_AS(client.translate_batch(std::vector<std::string>(5, "x")), Error);
}

TEST_CASE("reverse-words mock reverses word order deterministically") {
  BatchClient client = make_client("mock:reverse-words");
  auto out = client.translate_batch({"um dois três"});
  CHECK(out[0] == "três dois um");
}

TEST_CASE("dictionary-swap is deterministic and keeps bracketed tokens") {
  auto mock = make_mock("dictionary-swap:seed=1");
  auto a = mock->translate({"the answer is <answer_start>42<answer_end> here"});
  auto b = mock->translate({"the answer is <answer_start>42<answer_end> here"});
  CHECK(a == b);
  CHECK(a[0].find("<answer_start>") != std::string::npos);
  CHECK(a[0].find("<answer_end>") != std::string::npos);
  CHECK(a[0] != "the answer is <answer_start>42<answer_end> here");

  auto other_seed = make_mock("dictionary-swap:seed=2")->translate({"the answer is here"});
  CHECK(other_seed != mock->translate({"the answer is here"}));
}

TEST_CASE("dropper with p=1 removes every delimiter") {
  auto mock = make_mock("dropper:p=1.0,seed=3");
  auto out = mock->translate({"x <answer_start>y<answer_end> z"});
  CHECK(out[0].find("<answer_start>") == std::string::npos);
  CHECK(out[0].find("<answer_end>") == std::string::npos);
  CHECK(out[0] == "x y z");
}

TEST_CASE("dropper with p=0 keeps everything") {
  auto mock = make_mock("dropper:p=0.0,seed=3");
  const std::string text = "x <answer_start>y<answer_end> z";
  CHECK(mock->translate({text})[0] == text);
}

TEST_CASE("dropper drop fraction stays within 3 sigma of binomial expectation") {
  const double p = 0.1;
  auto mock = make_mock("dropper:p=0.1,seed=7");
  std::mt19937_64 rng(5);
  const int n_texts = 10000;
  int dropped_tokens = 0;
  for (int i = 0; i < n_texts; ++i) {
    std::string ctx = "Caso " + std::to_string(i) + " exemplo";
    MarkResult m = mark(ctx, 0, "Caso");
    REQUIRE(m.ok());
    std::string out = mock->translate({m.marked.text})[0];
    dropped_tokens += out.find("<answer_start>") == std::string::npos;
    dropped_tokens += out.find("<answer_end>") == std::string::npos;
  }
  const double trials = 2.0 * n_texts;
  const double fraction = dropped_tokens / trials;
  const double sigma = std::sqrt(p * (1 - p) / trials);
  CHECK(std::abs(fraction - p) <= 3 * sigma);
}

TEST_CASE("dropper decisions depend on content, not call order") {
  auto mock = make_mock("dropper:p=0.5,seed=11");
  std::vector<std::string> texts;
  for (int i = 0; i < 64; ++i) {
    texts.push_back("t" + std::to_string(i) + " <answer_start>a<answer_end>");
  }
  auto forward = mock->translate(texts);
  std::vector<std::string> reversed(texts.rbegin(), texts.rend());
  auto backward = mock->translate(reversed);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    CHECK(forward[i] == backward[texts.size() - 1 - i]);
  }
}

TEST_CASE("unknown mock kinds are rejected") {
  CHECK_THROWS_AS(make_mock("mock:nonsense"), Error);
}

TEST_CASE("http backend speaks the /translate protocol") {
  TestServer server;
  BackendConfig cfg = mock_config(server.endpoint());
  cfg.source_lang = "pt";
  cfg.target_lang = "en";
  BatchClient client(std::make_shared<HttpTranslator>(cfg), cfg);
  auto out = client.translate_batch({"ola", "mundo"});
  REQUIRE(out.size() == 2);
  CHECK(out[0] == "ola|pt>en");
  CHECK(out[1] == "mundo|pt>en");
  CHECK(client.meter().characters_submitted == 8);
  CHECK(client.meter().requests_made == 1);
}

TEST_CASE("transport errors are retried with backoff until success") {
  TestServer server;
  server.fail_first = 2;
  BackendConfig cfg = mock_config(server.endpoint());
  cfg.max_attempts = 4;
  BatchClient client(std::make_shared<HttpTranslator>(cfg), cfg);
  auto out = client.translate_batch({"abc"});
  CHECK(out[0] == "abc|en>pt");
  Meter m = client.meter();
  CHECK(m.requests_made == 1);
  CHECK(m.characters_submitted == 3);   // billed once
  CHECK(m.retried_characters == 6);     // two failed attempts
  CHECK(server.requests == 3);
}

TEST_CASE("rate limiting is retried; exhausted retries surface the error") {
  TestServer server;
  server.rate_limit_first = 1;
  BackendConfig cfg = mock_config(server.endpoint());
  cfg.max_attempts = 2;
  BatchClient client(std::make_shared<HttpTranslator>(cfg), cfg);
  CHECK(client.translate_batch({"x"})[0] == "x|en>pt");

  TestServer always_limited;
  always_limited.rate_limit_first = 1000;
  BackendConfig cfg2 = mock_config(always_limited.endpoint());
  cfg2.max_attempts = 2;
  BatchClient client2(std::make_shared<HttpTranslator>(cfg2), cfg2);
  try {
    client2.translate_batch({"x"});
    FAIL("expected RateLimited");
  } catch (const Error& e) {
    CHECK(e.code() == errc::rate_limited);
    CHECK(client2.meter().characters_submitted == 0);
  }
}

TEST_CASE("length mismatch is fatal for the batch and never billed") {
  TestServer server;
  server.wrong_count = true;
  BackendConfig cfg = mock_config(server.endpoint());
  BatchClient client(std::make_shared<HttpTranslator>(cfg), cfg);
  try {
    client.translate_batch({"a", "b"});
    FAIL("expected LengthMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == errc::length_mismatch);
  }
  CHECK(client.meter().characters_submitted == 0);
  CHECK(client.meter().requests_made == 0);
}

TEST_CASE("api credentials ride in the Authorization header") {
  TestServer server;
  server.expect_authorization = "Bearer sekrit";
  ::setenv("XLING_API_KEY", "sekrit", 1);
  BackendConfig cfg = mock_config(server.endpoint());
  BatchClient client(std::make_shared<HttpTranslator>(cfg), cfg);
  CHECK(client.translate_batch({"y"})[0] == "y|en>pt");
  ::unsetenv("XLING_API_KEY");
}

TEST_CASE("order preservation under concurrent batches") {
  TestServer server;
  BackendConfig cfg = mock_config(server.endpoint(), 8);
  BatchClient client(std::make_shared<HttpTranslator>(cfg), cfg);
  std::vector<std::thread> threads;
  std::vector<std::vector<std::string>> results(8);
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      std::vector<std::string> batch;
      for (int i = 0; i < 8; ++i) batch.push_back("t" + std::to_string(t) + "i" + std::to_string(i));
      results[t] = client.translate_batch(batch);
    });
  }
  for (auto& th : threads) th.join();
  for (int t = 0; t < 8; ++t) {
    REQUIRE(results[t].size() == 8);
    for (int i = 0; i < 8; ++i) {
      CHECK(results[t][i] == "t" + std::to_string(t) + "i" + std::to_string(i) + "|en>pt");
    }
  }
  CHECK(client.meter().requests_made == 8);
  CHECK(client.meter().segments_translated == 64);
}

TEST_CASE("meter json round-trips") {
  Meter m;
  m.characters_submitted = 10;
  m.batch_latencies = {0.5, 1.5};
  Meter back = Meter::from_json(m.to_json());
  CHECK(back.characters_submitted == 10);
  CHECK(back.batch_latencies == m.batch_latencies);
}
