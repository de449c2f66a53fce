#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace aquacast {

/// Seconds in one 15-minute reading interval.
inline constexpr std::int64_t kIntervalSeconds = 15 * 60;
/// Readings per day at 15-minute resolution.
inline constexpr int kSamplesPerDay = 96;
/// Readings per week at 15-minute resolution.
inline constexpr int kSamplesPerWeek = 7 * kSamplesPerDay;

/// Ordered 15-minute demand readings. `start_time` is Unix seconds (UTC) of
/// the first reading; reading i is at start_time + i * interval.
struct DemandSeries {
  std::int64_t start_time = 0;
  int interval_minutes = 15;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  std::int64_t time_at(std::size_t i) const {
    return start_time + static_cast<std::int64_t>(i) * interval_minutes * 60;
  }
};

/// Chronological, contiguous, disjoint partitions: train < validation < test.
struct DatasetSplit {
  DemandSeries train;
  DemandSeries validation;
  DemandSeries test;
};

/// Descriptive statistics of a series, in series units. std uses the n-1
/// divisor; skewness/excess_kurtosis use the population-moment Fisher forms
/// (a normal sample gives excess_kurtosis ~ 0); a constant series reports
/// skewness = excess_kurtosis = 0. Quartiles interpolate linearly. The mode
/// is the most frequent value after rounding readings to the nearest unit.
struct SeriesStats {
  std::size_t count = 0;
  double min = 0, q25 = 0, median = 0, q75 = 0, max = 0;
  double mean = 0, std = 0, mode = 0;
  double skewness = 0, excess_kurtosis = 0;
};

/// Min-max scaler fitted on training data: transform maps [lo, hi] -> [0, 1].
struct Scaler {
  double lo = 0.0;
  double hi = 1.0;

  double transform(double x) const { return (x - lo) / (hi - lo); }
  double invert(double y) const { return lo + y * (hi - lo); }
};

/// Configuration of the synthetic demand generator. The daily/weekly/noise
/// weights shape a zero-mean mix that is rescaled so the realized series has
/// roughly the requested mean and std; spikes (short triangular excursions,
/// magnitude ~ spike_magnitude in series units) recur daily at
/// round(spike_rate * 96) fixed sample-of-day slots drawn once per series,
/// and everything is clipped from below at min_clip, which keeps demand
/// strictly positive so relative errors stay well defined.
struct SyntheticConfig {
  std::size_t n_samples = 25000;
  double mean = 81.4;
  double std = 24.4;
  double daily_amplitude = 1.0;
  double weekly_amplitude = 0.22;
  double noise_std = 0.03;
  double spike_rate = 0.01;
  double spike_magnitude = 30.0;
  double min_clip = 30.0;
  std::uint64_t seed = 42;
  std::int64_t start_time = 1451606400;  // 2016-01-01T00:00:00Z
};

/// Synthetic series plus the ground-truth spike sample indices.
struct SyntheticSeries {
  DemandSeries series;
  std::vector<std::size_t> spike_indices;
};

/// Parse "YYYY-MM-DDTHH:MM:SS" (or with a space separator) as Unix seconds.
/// Throws DataError on malformed input.
std::int64_t parse_iso8601(const std::string& text);

/// Format Unix seconds as "YYYY-MM-DDTHH:MM:SS".
std::string format_iso8601(std::int64_t unix_seconds);

/// Load a `timestamp,demand` CSV (one header line, ISO-8601 timestamps).
/// Rows are sorted by timestamp; gaps larger than one interval, duplicate or
/// misaligned timestamps, negative values and malformed rows raise DataError.
DemandSeries load_csv(const std::string& path);

/// Write a series in the same CSV dialect load_csv reads.
void save_csv(const DemandSeries& series, const std::string& path);

/// Chronological split: the first train_n records are divided into a training
/// block and a validation block (the last round(train_n * val_frac) records);
/// the test block is the train_n..train_n+test_n range. Throws DataError when
/// the series is too short and std::invalid_argument on a bad val_frac.
DatasetSplit split(const DemandSeries& series, std::size_t train_n,
                   std::size_t test_n, double val_frac);

/// Descriptive statistics; requires at least 2 readings.
SeriesStats compute_stats(std::span<const double> values);
SeriesStats compute_stats(const DemandSeries& series);

/// Fit a min-max scaler to the training values. Throws DataError when all
/// values are equal (degenerate range).
Scaler fit_scaler(std::span<const double> train_values);
Scaler fit_scaler(const DemandSeries& train);

/// Deterministic synthetic 15-minute demand series (daily period 96 samples,
/// weekly period 672).
DemandSeries generate_synthetic(const SyntheticConfig& config);

/// Same generator, also reporting where spikes were injected.
SyntheticSeries generate_synthetic_detailed(const SyntheticConfig& config);

}  // namespace aquacast
