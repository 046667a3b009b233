#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>
#include <random>

#include "helpers.hpp"
#include "xling/segment.hpp"

using namespace xling;

TEST_CASE("plain terminators split into one segment per sentence") {
  Segmentation seg = split_sentences("A. B. C.");
  REQUIRE(seg.segments.size() == 3);
  CHECK(seg.segments[0].text == "A. ");
  CHECK(seg.segments[1].text == "B. ");
  CHECK(seg.segments[2].text == "C.");
  CHECK(seg.join() == "A. B. C.");
  CHECK(seg.segments[0].start_byte == 0);
  CHECK(seg.segments[1].start_byte == 3);
  CHECK(seg.segments[2].start_byte == 6);
}

TEST_CASE("empty input yields an empty segmentation") {
  CHECK(split_sentences("").segments.empty());
}

TEST_CASE("hand-labeled sentence fixture") {
  nlohmann::json cases = nlohmann::json::parse(testutil::read_file(testutil::fixture("sentences.json")));
  for (const auto& c : cases) {
    const std::string text = c.at("text").get<std::string>();
    INFO("text: " << text);
    Segmentation seg = split_sentences(text);
    std::vector<std::string> got;
    for (const Segment& s : seg.segments) got.push_back(s.text);
    std::vector<std::string> expected = c.at("segments").get<std::vector<std::string>>();
    CHECK(got == expected);
    CHECK(seg.join() == text);
  }
}

TEST_CASE("losslessness holds on random text") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    std::string text = testutil::random_context(rng, 6);
    Segmentation seg = split_sentences(text);
    CHECK(seg.join() == text);
    std::size_t expect = 0;
    for (const Segment& s : seg.segments) {
      CHECK(s.start_byte == expect);
      expect += s.text.size();
    }
  }
}

TEST_CASE("abbreviation list can come from a resource file") {
  auto from_file = load_abbreviations(std::filesystem::path(XLING_DATA_DIR) / "abbreviations.txt");
  CHECK(from_file == default_abbreviations());
}

TEST_CASE("group_for_span leaves a span inside one sentence alone") {
  Segmentation seg = split_sentences("Primeira frase. Segunda frase. Terceira.");
  Segmentation grouped = group_for_span(seg, 0, 8);
  REQUIRE(grouped.segments.size() == seg.segments.size());
  CHECK(grouped.join() == seg.join());
}

TEST_CASE("group_for_span merges exactly the segments the span crosses") {
  const std::string text = "Primeira frase. Segunda frase. Terceira frase aqui.";
  Segmentation seg = split_sentences(text);
  REQUIRE(seg.segments.size() == 3);
  // Span from inside sentence 1 into sentence 2.
  const std::size_t begin = text.find("frase.");
  const std::size_t end = text.find("Segunda") + 7;
  Segmentation grouped = group_for_span(seg, begin, end);
  REQUIRE(grouped.segments.size() == 2);
  CHECK(grouped.segments[0].text == "Primeira frase. Segunda frase. ");
  CHECK(grouped.segments[1].text == "Terceira frase aqui.");
  CHECK(grouped.join() == text);
}

TEST_CASE("group_for_span rejects out-of-bounds spans") {
  Segmentation seg = split_sentences("Uma frase só.");
  CHECK_THROWS_AS(group_for_span(seg, 0, 1000), Error);
  CHECK_THROWS_AS(group_for_span(seg, 5, 2), Error);
}

TEST_CASE("random spans always end up inside exactly one segment") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 500; ++i) {
    std::string text = testutil::random_context(rng, 6);
    Segmentation seg = split_sentences(text);
    std::uniform_int_distribution<std::size_t> pos(0, text.size());
    std::size_t a = pos(rng), b = pos(rng);
    if (a > b) std::swap(a, b);
    if (a == b) continue;
    Segmentation grouped = group_for_span(seg, a, b);
    CHECK(grouped.join() == text);
    std::size_t covering = 0;
    for (const Segment& s : grouped.segments) {
      if (s.start_byte <= a && b <= s.start_byte + s.text.size()) ++covering;
    }
    CHECK(covering == 1);
  }
}
