#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "helpers.hpp"
#include "xling/costmodel.hpp"

using namespace xling;

namespace {
const PricingModel kPaper = PricingModel::paper2021();
}

TEST_CASE("rate averaging is the arithmetic mean") {
  CHECK(avg_commercial_rate(kPaper) == Catch::Approx(50.0 / 3.0));
  CHECK(avg_gpu_rate(kPaper) == Catch::Approx(2.77));
  CHECK(avg_commercial_rate({{7.5}, {1.0}}) == 7.5);
  CHECK(avg_gpu_rate({{1.0}, {4.0}}) == 4.0);
  // Permutation invariance.
  CHECK(avg_gpu_rate({{1.0}, {3.06, 2.48}}) == avg_gpu_rate(kPaper));
  // Mean linearity: mean of (2x) == 2 mean(x).
  CHECK(avg_commercial_rate({{40.0, 40.0, 20.0}, {1.0}}) ==
        Catch::Approx(2.0 * avg_commercial_rate(kPaper)));
}

TEST_CASE("pricing model validation") {
  CHECK_THROWS_AS(PricingModel{{}, {1.0}}.validate(), Error);
  CHECK_THROWS_AS(PricingModel{{-1.0}, {1.0}}.validate(), Error);
  PricingModel loaded = PricingModel::from_json(nlohmann::json::parse(
      testutil::read_file(std::filesystem::path(XLING_DATA_DIR) / "pricing" / "paper-2021.json")));
  CHECK(loaded.commercial_per_million == kPaper.commercial_per_million);
  CHECK(loaded.gpu_per_hour == kPaper.gpu_per_hour);
}

TEST_CASE("one-time commercial cost per character") {
  // Whole collection: 3,047,540,622 characters.
  CHECK(one_time_commercial(3047540622.0, kPaper) == Catch::Approx(50792.34).margin(0.01));
  // Within 0.1% of the published 50,793.
  CHECK(std::abs(one_time_commercial(3047540622.0, kPaper) - 50793.0) / 50793.0 < 0.001);
  // MNLI training characters: 56,521,137 -> 942.02 (published: 941.67, 0.04% gap).
  CHECK(one_time_commercial(56521137.0, kPaper) == Catch::Approx(942.02).margin(0.01));
  CHECK(one_time_commercial(0.0, kPaper) == 0.0);
}

TEST_CASE("one-time open-source cost per GPU hour") {
  CHECK(one_time_opensource(1.0, kPaper) == Catch::Approx(2.77));
  CHECK(one_time_opensource(2.25, kPaper) == Catch::Approx(6.2325));
  CHECK(one_time_opensource(51.0, kPaper) == Catch::Approx(141.27));
}

TEST_CASE("recurring commercial cost per 1k examples") {
  CHECK(recurring_commercial(1006.57, kPaper) == Catch::Approx(16.776).margin(0.001));
  CHECK(recurring_commercial(89.80, kPaper) == Catch::Approx(1.4967).margin(0.001));
  const double s2_chars = 344.67 * 1000 + 35.77;
  CHECK(recurring_commercial(s2_chars, kPaper) == Catch::Approx(5745.0962).margin(0.01));
}

TEST_CASE("recurring open-source cost from a throughput profile") {
  PricingModel p = kPaper;
  CHECK(recurring_opensource({2.50, 32, {}}, p) == Catch::Approx(0.060113).margin(1e-5));
  CHECK(recurring_opensource({0.78, 32, {}}, p) == Catch::Approx(0.018755).margin(1e-5));
  CHECK(recurring_opensource({680.64, 32, {}}, p) == Catch::Approx(16.3661).margin(1e-3));
  CHECK(recurring_opensource({0.72, 32, {}}, p) == Catch::Approx(0.017313).margin(1e-5));
}

TEST_CASE("added latency passes the measured profile through") {
  CHECK(added_latency(ThroughputProfile{2.50, 32, {}}) == 2.50);
  CHECK(added_latency(std::vector<double>{1.0, 2.0, 3.0}) == Catch::Approx(2.0));
  CHECK_THROWS_AS(added_latency(std::vector<double>{}), Error);
  try {
    ThroughputProfile::from_latencies({}, 32);
    FAIL("expected NoMeasurements");
  } catch (const Error& e) {
    CHECK(e.code() == errc::no_measurements);
  }
  ThroughputProfile measured = ThroughputProfile::from_latencies({1.0, 2.0, 3.0}, 32);
  CHECK(measured.seconds_per_batch == Catch::Approx(2.0));
}

TEST_CASE("throughput profile consistency check") {
  ThroughputProfile ok{2.0, 32, 16.0};
  ok.validate();
  ThroughputProfile bad{2.0, 32, 99.0};
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("linearity and monotonicity of cost arithmetic") {
  const double a = 123456.0, b = 789012.0;
  CHECK(one_time_commercial(a + b, kPaper) ==
        Catch::Approx(one_time_commercial(a, kPaper) + one_time_commercial(b, kPaper)).epsilon(1e-12));
  CHECK(one_time_commercial(a, kPaper) < one_time_commercial(a + 1, kPaper));
  CHECK(one_time_opensource(1.0, kPaper) < one_time_opensource(1.5, kPaper));
  PricingModel pricier{{25.0, 25.0, 15.0}, {3.0, 4.0}};
  CHECK(one_time_commercial(a, kPaper) < one_time_commercial(a, pricier));
}

TEST_CASE("recurring open-source cost and latency derive from one profile") {
  ThroughputProfile t{2.5, 32, 32.0 / 2.5};
  const double n = 1000.0;
  const double recurring = recurring_opensource(t, kPaper, n);
  const double latency = added_latency(t);
  // recurring == rate * n / (3600 * examples_per_second)
  CHECK(recurring ==
        Catch::Approx(avg_gpu_rate(kPaper) * n / (3600.0 * *t.examples_per_second)).epsilon(1e-12));
  // ratio of the two == rate * n / (3600 * batch_size)
  CHECK(recurring / latency ==
        Catch::Approx(avg_gpu_rate(kPaper) * n / (3600.0 * static_cast<double>(t.batch_size)))
            .epsilon(1e-12));
}

TEST_CASE("dataset stats invariants and table construction") {
  DatasetStats s = DatasetStats::from_table(56521137, 144.49);
  CHECK(s.examples == 391177);
  s.validate();
  DatasetStats bad{100, 10, 55.0};
  CHECK_THROWS_AS(bad.validate(), Error);
  DatasetStats empty;
  empty.validate();
  DatasetStats round = DatasetStats::from_json(s.to_json());
  CHECK(round.total_characters == s.total_characters);
}

TEST_CASE("strategy2 stats combine query and passage means") {
  DatasetStats queries = DatasetStats::from_table(3615835, 35.77);
  DatasetStats passages = DatasetStats::from_table(3047540622, 344.67);
  DatasetStats s2 = strategy2_stats(queries, passages, 1000);
  CHECK(s2.avg_chars_per_example == Catch::Approx(344705.77));
  CHECK(s2.examples == queries.examples);
}

TEST_CASE("build_report per scenario") {
  ScenarioInputs inputs;
  inputs.train_stats = DatasetStats::from_table(56521137, 144.49);
  inputs.infer_stats = DatasetStats::from_table(219834, 89.80);
  inputs.wall_hours = 2.25;
  inputs.throughput = ThroughputProfile{0.78, 32, {}};

  CostReport zero = build_report(Scenario::zero_shot, {}, kPaper);
  CHECK(zero.one_time_commercial == 0.0);
  CHECK(zero.one_time_opensource == 0.0);
  CHECK(zero.recurring_commercial == 0.0);
  CHECK(zero.recurring_opensource == 0.0);
  CHECK(zero.added_latency == 0.0);

  CostReport train = build_report(Scenario::translate_train, inputs, kPaper);
  CHECK(train.one_time_commercial == Catch::Approx(942.02).margin(0.01));
  CHECK(train.one_time_opensource == Catch::Approx(6.2325).margin(1e-4));
  CHECK(train.recurring_commercial == 0.0);
  CHECK(train.added_latency == 0.0);

  CostReport infer = build_report(Scenario::translate_infer, inputs, kPaper);
  CHECK(infer.one_time_commercial == 0.0);
  CHECK(infer.recurring_commercial == Catch::Approx(1.4967).margin(1e-3));
  CHECK(infer.recurring_opensource == Catch::Approx(0.018755).margin(1e-5));
  CHECK(infer.added_latency == 0.78);

  // Strategy 1 carries the collection one-time cost and the query recurring cost.
  ScenarioInputs s1;
  s1.train_stats = DatasetStats::from_table(3047540622, 344.67);
  s1.infer_stats = DatasetStats::from_table(3615835, 35.77);
  s1.wall_hours = 51.0;
  s1.throughput = ThroughputProfile{0.72, 32, {}};
  CostReport r1 = build_report(Scenario::translate_infer_s1, s1, kPaper);
  CHECK(r1.one_time_commercial == Catch::Approx(50792.34).margin(0.01));
  CHECK(r1.one_time_opensource == Catch::Approx(141.27));
  CHECK(r1.recurring_commercial == Catch::Approx(0.59617).margin(1e-4));
  CHECK(r1.recurring_opensource == Catch::Approx(0.017313).margin(1e-5));

  try {
    build_report(Scenario::translate_train, {}, kPaper);
    FAIL("expected MissingStatistic");
  } catch (const Error& e) {
    CHECK(e.code() == errc::missing_statistic);
  }
}

TEST_CASE("presentation rounding is half-even at two decimals") {
  CHECK(round_half_even(0.125, 2) == Catch::Approx(0.12));
  CHECK(round_half_even(0.875, 2) == Catch::Approx(0.88));
  CHECK(round_half_even(2.005, 2) == Catch::Approx(2.0).margin(0.005));
  CHECK(format_usd(50792.3437) == "50792.34");
  CHECK(format_usd(2.77) == "2.77");
}

TEST_CASE("cost table renders dashes for zero cells") {
  CostReport zero;
  CostReport train;
  train.scenario = Scenario::translate_train;
  train.one_time_commercial = 941.67;
  train.one_time_opensource = 6.24;
  std::string table = render_cost_table({{"zero-shot", zero}, {"translate-train", train}});
  CHECK(table.find("941.67") != std::string::npos);
  CHECK(table.find("zero-shot") != std::string::npos);
  CHECK(table.find('-') != std::string::npos);
}
