#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "aquacast/errors.hpp"
#include "aquacast/series.hpp"
#include "test_support.hpp"

using namespace aquacast;
using test_support::TempDir;
using test_support::make_series;

TEST_SUITE("series") {

TEST_CASE("iso8601 parsing and formatting") {
  CHECK(parse_iso8601("2016-01-01T00:00:00") == 1451606400);
  CHECK(parse_iso8601("1970-01-01T00:00:00") == 0);
  CHECK(parse_iso8601("2016-01-01 00:15:00") == 1451606400 + 900);
  CHECK(format_iso8601(1451606400) == "2016-01-01T00:00:00");
  CHECK(format_iso8601(parse_iso8601("2021-12-31T23:45:00")) ==
        "2021-12-31T23:45:00");

  CHECK_THROWS_AS(parse_iso8601("2016-13-01T00:00:00"), DataError);
  CHECK_THROWS_AS(parse_iso8601("2016-01-01"), DataError);
  CHECK_THROWS_AS(parse_iso8601("garbage"), DataError);
  CHECK_THROWS_AS(parse_iso8601("2016-01-01T25:00:00"), DataError);
}

TEST_CASE("load_csv reads ordered 15-minute readings") {
  TempDir dir("series");
  const std::string path = dir.file("ok.csv");
  test_support::write_file(path,
                           "timestamp,demand\n"
                           "2016-01-01T00:00:00,30\n"
                           "2016-01-01T00:15:00,86\n"
                           "2016-01-01T00:30:00,157\n");
  const DemandSeries s = load_csv(path);
  REQUIRE(s.size() == 3);
  CHECK(s.values == std::vector<double>{30, 86, 157});
  CHECK(s.start_time == 1451606400);
  CHECK(s.time_at(2) == 1451606400 + 2 * 900);
}

TEST_CASE("load_csv sorts rows by timestamp") {
  TempDir dir("series");
  const std::string path = dir.file("shuffled.csv");
  test_support::write_file(path,
                           "timestamp,demand\n"
                           "2016-01-01T00:30:00,3\n"
                           "2016-01-01T00:00:00,1\n"
                           "2016-01-01T00:15:00,2\n");
  CHECK(load_csv(path).values == std::vector<double>{1, 2, 3});
}

TEST_CASE("load_csv rejects gaps, misalignment and bad values") {
  TempDir dir("series");
  auto expect_error = [&](const char* name, const std::string& body) {
    const std::string path = dir.file(name);
    test_support::write_file(path, body);
    CHECK_THROWS_AS(load_csv(path), DataError);
  };
  expect_error("gap.csv",
               "timestamp,demand\n"
               "2016-01-01T00:00:00,1\n"
               "2016-01-01T00:45:00,2\n");
  expect_error("misaligned.csv",
               "timestamp,demand\n"
               "2016-01-01T00:00:00,1\n"
               "2016-01-01T00:10:00,2\n");
  expect_error("duplicate.csv",
               "timestamp,demand\n"
               "2016-01-01T00:00:00,1\n"
               "2016-01-01T00:00:00,2\n");
  expect_error("negative.csv",
               "timestamp,demand\n"
               "2016-01-01T00:00:00,-3\n");
  expect_error("badvalue.csv",
               "timestamp,demand\n"
               "2016-01-01T00:00:00,not-a-number\n");
  expect_error("nocomma.csv",
               "timestamp,demand\n"
               "2016-01-01T00:00:00\n");
  expect_error("empty.csv", "timestamp,demand\n");
  CHECK_THROWS_AS(load_csv(dir.file("missing.csv")), DataError);
}

TEST_CASE("save_csv then load_csv round-trips") {
  TempDir dir("series");
  const DemandSeries original = make_series({30, 86.25, 157, 0, 81.4});
  const std::string path = dir.file("round.csv");
  save_csv(original, path);
  const DemandSeries back = load_csv(path);
  CHECK(back.start_time == original.start_time);
  CHECK(back.values == original.values);
}

TEST_CASE("split partitions chronologically") {
  DemandSeries s = make_series(std::vector<double>(25000));
  for (std::size_t i = 0; i < s.size(); ++i) s.values[i] = double(i);

  const DatasetSplit parts = split(s, 22500, 2500, 0.15);
  CHECK(parts.train.size() == 19125);       // 22500 - round(22500 * .15)
  CHECK(parts.validation.size() == 3375);   // round(22500 * .15)
  CHECK(parts.test.size() == 2500);

  // Contiguous and ordered: train < validation < test.
  CHECK(parts.train.values.front() == 0);
  CHECK(parts.train.values.back() == 19124);
  CHECK(parts.validation.values.front() == 19125);
  CHECK(parts.validation.values.back() == 22499);
  CHECK(parts.test.values.front() == 22500);
  CHECK(parts.test.values.back() == 24999);
  CHECK(parts.validation.start_time == s.time_at(19125));
  CHECK(parts.test.start_time == s.time_at(22500));
}

TEST_CASE("split rejects bad requests") {
  const DemandSeries s = make_series(std::vector<double>(100, 1.0));
  CHECK_THROWS_AS(split(s, 90, 20, 0.15), DataError);          // 110 > 100
  CHECK_THROWS_AS(split(s, 80, 10, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(split(s, 80, 10, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(split(s, 2, 10, 0.1), DataError);  // empty validation
}

TEST_CASE("compute_stats on hand-checked samples") {
  SUBCASE("three-point basics") {
    const SeriesStats st = compute_stats(std::vector<double>{1, 2, 3});
    CHECK(st.count == 3);
    CHECK(st.mean == doctest::Approx(2.0));
    CHECK(st.std == doctest::Approx(1.0));  // n-1 divisor
    CHECK(st.min == 1);
    CHECK(st.max == 3);
    CHECK(st.median == doctest::Approx(2.0));
    CHECK(st.q25 == doctest::Approx(1.5));
    CHECK(st.q75 == doctest::Approx(2.5));
  }
  SUBCASE("asymmetric sample, moment formulas") {
    // For {0,0,0,1}: m2=3/16, m3=3/32, skew = 2/sqrt(3), m4/m2^2 = 7/3.
    const SeriesStats st = compute_stats(std::vector<double>{0, 0, 0, 1});
    CHECK(st.skewness == doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-12));
    CHECK(st.excess_kurtosis ==
          doctest::Approx(7.0 / 3.0 - 3.0).epsilon(1e-12));
  }
  SUBCASE("constant series reports zero spread") {
    const SeriesStats st = compute_stats(std::vector<double>{5, 5, 5, 5});
    CHECK(st.std == 0.0);
    CHECK(st.skewness == 0.0);
    CHECK(st.excess_kurtosis == 0.0);
    CHECK(st.mode == 5.0);
  }
  SUBCASE("mode rounds to the nearest unit, ties pick the smaller") {
    CHECK(compute_stats(std::vector<double>{1.4, 1.6, 2.0, 7.0}).mode == 2.0);
    CHECK(compute_stats(std::vector<double>{1, 1, 2, 2}).mode == 1.0);
  }
  SUBCASE("too short") {
    CHECK_THROWS_AS(compute_stats(std::vector<double>{1}), DataError);
  }
}

TEST_CASE("compute_stats matches normal-sample moments") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss(10.0, 2.0);
  std::vector<double> sample(100000);
  for (double& v : sample) v = gauss(rng);
  const SeriesStats st = compute_stats(sample);
  CHECK(st.mean == doctest::Approx(10.0).epsilon(0.01));
  CHECK(st.std == doctest::Approx(2.0).epsilon(0.01));
  CHECK(std::abs(st.skewness) < 0.05);
  CHECK(std::abs(st.excess_kurtosis) < 0.1);
}

TEST_CASE("scaler maps the training range onto [0, 1]") {
  const Scaler sc = fit_scaler(std::vector<double>{86, 30, 157, 100});
  CHECK(sc.lo == 30);
  CHECK(sc.hi == 157);
  CHECK(sc.transform(30) == doctest::Approx(0.0));
  CHECK(sc.transform(157) == doctest::Approx(1.0));
  CHECK(sc.invert(sc.transform(86)) == doctest::Approx(86.0).epsilon(1e-12));
  CHECK(sc.invert(0.5) == doctest::Approx(93.5));

  CHECK_THROWS_AS(fit_scaler(std::vector<double>{7, 7, 7}), DataError);
  CHECK_THROWS_AS(fit_scaler(std::vector<double>{7}), DataError);
}

TEST_CASE("synthetic generator is deterministic") {
  SyntheticConfig config;
  config.n_samples = 2000;
  const DemandSeries a = generate_synthetic(config);
  const DemandSeries b = generate_synthetic(config);
  REQUIRE(a.size() == 2000);
  CHECK(a.values == b.values);

  config.seed = 43;
  CHECK(generate_synthetic(config).values != a.values);
}

TEST_CASE("synthetic generator hits the requested scale") {
  SyntheticConfig config;
  config.n_samples = 25000;
  const SeriesStats st = compute_stats(generate_synthetic(config));
  CHECK(st.mean == doctest::Approx(81.4).epsilon(0.05));
  CHECK(st.std == doctest::Approx(24.4).epsilon(0.10));
  CHECK(st.min >= 0.0);
}

TEST_CASE("noiseless spike-free synthetic data is exactly daily-periodic") {
  SyntheticConfig config;
  config.n_samples = 960;
  config.noise_std = 0.0;
  config.spike_rate = 0.0;
  config.weekly_amplitude = 0.0;
  const DemandSeries s = generate_synthetic(config);
  for (std::size_t i = 0; i + 96 < s.size(); ++i) {
    REQUIRE(s.values[i] == s.values[i + 96]);
  }
}

TEST_CASE("spikes perturb only spike-adjacent samples") {
  SyntheticConfig base;
  base.n_samples = 5000;
  base.spike_rate = 0.0;
  SyntheticConfig spiky = base;
  spiky.spike_rate = 0.01;

  const DemandSeries clean = generate_synthetic(base);
  const SyntheticSeries with = generate_synthetic_detailed(spiky);
  REQUIRE_FALSE(with.spike_indices.empty());

  std::vector<bool> adjacent(clean.size(), false);
  for (std::size_t t : with.spike_indices) {
    REQUIRE(t >= 1);
    REQUIRE(t + 1 < clean.size());
    adjacent[t - 1] = adjacent[t] = adjacent[t + 1] = true;
  }
  for (std::size_t i = 0; i < clean.size(); ++i) {
    if (!adjacent[i]) CHECK(with.series.values[i] == clean.values[i]);
  }
  // Slots recur daily, so expect roughly spike_rate * n spikes.
  CHECK(with.spike_indices.size() > 10);
  CHECK(with.spike_indices.size() < 100);
}

TEST_CASE("synthetic generator rejects bad configurations") {
  SyntheticConfig config;
  config.n_samples = 100;  // less than two days
  CHECK_THROWS_AS(generate_synthetic(config), std::invalid_argument);
  config.n_samples = 1000;
  config.spike_rate = 0.5;
  CHECK_THROWS_AS(generate_synthetic(config), std::invalid_argument);
}

}  // TEST_SUITE
