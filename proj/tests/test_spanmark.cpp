#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <string>

#include "helpers.hpp"
#include "xling/spanmark.hpp"

using namespace xling;

TEST_CASE("mark wraps the span in delimiters") {
  MarkResult r = mark("O Brasil tem 26 estados", 13, "26 estados");
  REQUIRE(r.ok());
  CHECK(r.marked.text == "O Brasil tem <answer_start>26 estados<answer_end>");
}

TEST_CASE("mark handles an answer spanning the whole context") {
  MarkResult r = mark("tudo isso", 0, "tudo isso");
  REQUIRE(r.ok());
  CHECK(r.marked.text == "<answer_start>tudo isso<answer_end>");
}

TEST_CASE("mark validates the span against the context") {
  CHECK(mark("abc", 1, "xc").error == SpanError::invalid_span);
  CHECK(mark("abc", 2, "cd").error == SpanError::invalid_span);   // runs past the end
  CHECK(mark("abc", 9, "a").error == SpanError::invalid_span);
  // Offsets are code points: "café x" has x at cp 5.
  CHECK(mark("café x", 5, "x").ok());
}

TEST_CASE("mark rejects contexts already containing a delimiter token") {
  MarkResult r = mark("texto com <answer_end> dentro", 0, "texto");
  CHECK(r.error == SpanError::delimiter_collision);
}

TEST_CASE("delimiter pairs are validated") {
  CHECK_THROWS_AS(mark("abc", 0, "a", {"", "x"}), Error);
  CHECK_THROWS_AS(mark("abc", 0, "a", {"tok", "tok"}), Error);
  CHECK_THROWS_AS(mark("abc", 0, "a", {"<a>", "<a>b"}), Error);
}

TEST_CASE("recover extracts span, offset and clean context") {
  RecoverResult r = recover("Brazil has <answer_start>26 states<answer_end>");
  REQUIRE(r.ok());
  CHECK(r.context == "Brazil has 26 states");
  CHECK(r.answer == "26 states");
  CHECK(r.answer_start == 11);
}

TEST_CASE("recover error taxonomy is total and distinct") {
  const DelimiterPair d;
  CHECK(recover("no tokens at all", d).error == SpanError::missing_start_delimiter);
  CHECK(recover("x <answer_start> y", d).error == SpanError::missing_end_delimiter);
  CHECK(recover("x <answer_end> y", d).error == SpanError::missing_start_delimiter);
  CHECK(recover("<answer_end> y <answer_start>", d).error == SpanError::out_of_order_delimiters);
  CHECK(recover("<answer_start>a<answer_end> <answer_start>", d).error ==
        SpanError::duplicate_delimiters);
  CHECK(recover("<answer_start>a<answer_end> b <answer_end>", d).error ==
        SpanError::duplicate_delimiters);
}

TEST_CASE("recover collapses translator-inserted spaces around tokens") {
  RecoverResult r = recover("Brazil has <answer_start> 26 states <answer_end> today.");
  REQUIRE(r.ok());
  CHECK(r.context == "Brazil has 26 states today.");
  CHECK(r.answer == "26 states");
  CHECK(r.answer_start == 11);

  // Flanked on one side only: plain removal.
  RecoverResult left = recover("x<answer_start> a<answer_end>y");
  REQUIRE(left.ok());
  CHECK(left.context == "x ay");
  CHECK(left.answer == " a");
}

TEST_CASE("recover output always satisfies the answer-substring invariant") {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 500; ++i) {
    std::string ctx = testutil::random_context(rng);
    QAAnswer a = testutil::random_answer(rng, ctx);
    MarkResult m = mark(ctx, a.answer_start, a.text);
    REQUIRE(m.ok());
    // Sprinkle spaces around tokens like a noisy translator would.
    std::string noisy = m.marked.text;
    if (i % 3 == 0) {
      std::size_t pos = noisy.find("<answer_start>");
      noisy.insert(pos + std::string("<answer_start>").size(), " ");
      noisy.insert(pos, " ");
    }
    RecoverResult r = recover(noisy);
    REQUIRE(r.ok());
    CHECK(substr_cp(r.context, r.answer_start, cp_count(r.answer)) == r.answer);
  }
}

TEST_CASE("strip-delimiters property: mark inserts and nothing else") {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 1000; ++i) {
    std::string ctx = testutil::random_context(rng);
    QAAnswer a = testutil::random_answer(rng, ctx);
    MarkResult m = mark(ctx, a.answer_start, a.text);
    REQUIRE(m.ok());
    // Independent string surgery: erase both tokens once.
    std::string stripped = m.marked.text;
    stripped.erase(stripped.find("<answer_start>"), std::string("<answer_start>").size());
    stripped.erase(stripped.find("<answer_end>"), std::string("<answer_end>").size());
    CHECK(stripped == ctx);
    // The text strictly between the delimiters is the answer.
    const std::size_t s = m.marked.text.find("<answer_start>") + std::string("<answer_start>").size();
    const std::size_t e = m.marked.text.find("<answer_end>");
    CHECK(m.marked.text.substr(s, e - s) == a.text);
  }
}

TEST_CASE("round-trip: recover after mark is the identity") {
  std::mt19937_64 rng(4242);
  DelimiterPair alt{"[[S]]", "[[E]]"};
  for (int i = 0; i < 1000; ++i) {
    std::string ctx = testutil::random_context(rng);
    QAAnswer a = testutil::random_answer(rng, ctx);
    const DelimiterPair d = (i % 2) ? alt : DelimiterPair{};
    MarkResult m = mark(ctx, a.answer_start, a.text, d);
    REQUIRE(m.ok());
    RecoverResult r = recover(m.marked.text, d);
    REQUIRE(r.ok());
    CHECK(r.context == ctx);
    CHECK(r.answer == a.text);
    CHECK(r.answer_start == a.answer_start);
  }
}

TEST_CASE("marked span byte extent covers both tokens") {
  MarkResult m = mark("um dois três", 3, "dois");
  REQUIRE(m.ok());
  const std::string& t = m.marked.text;
  CHECK(t.substr(m.marked.span_begin_byte, m.marked.span_end_byte - m.marked.span_begin_byte) ==
        "<answer_start>dois<answer_end>");
}
