#include "aquacast/series.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "aquacast/errors.hpp"

namespace aquacast {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Howard Hinnant's civil-calendar conversions; avoids timezone-dependent
// libc time functions so parsing is locale- and TZ-independent.
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const int yoe = static_cast<int>(y - era * 400);
  const int doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const int doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + doe - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const int doe = static_cast<int>(z - era * 146097);
  const int yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const int doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const int mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y = static_cast<int>(yoe + era * 400) + (m <= 2);
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double daily_shape(double u) {
  // Two-peak demand profile: narrow night trough, steep morning rise,
  // secondary evening peak. The narrow trough skews the distribution left.
  const double base = std::sin(kTwoPi * (u - 0.30));
  const double morning = std::exp(-std::pow((u - 0.33) / 0.055, 2.0));
  const double evening = std::exp(-std::pow((u - 0.83) / 0.075, 2.0));
  const double night = std::exp(-std::pow((u - 0.07) / 0.10, 2.0));
  return base + 1.15 * morning + 0.90 * evening - 1.35 * night;
}

}  // namespace

std::int64_t parse_iso8601(const std::string& text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  char sep = 0;
  const int got = std::sscanf(text.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d", &y,
                              &mo, &d, &sep, &h, &mi, &s);
  if (got != 7 || (sep != 'T' && sep != ' ') || mo < 1 || mo > 12 || d < 1 ||
      d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 60) {
    throw DataError("malformed timestamp: '" + text + "'");
  }
  return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
}

std::string format_iso8601(std::int64_t unix_seconds) {
  std::int64_t days = unix_seconds / 86400;
  std::int64_t rem = unix_seconds % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  int y, m, d;
  civil_from_days(days, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02lld:%02lld:%02lld", y, m,
                d, static_cast<long long>(rem / 3600),
                static_cast<long long>((rem % 3600) / 60),
                static_cast<long long>(rem % 60));
  return buf;
}

DemandSeries load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw DataError("empty file: '" + path + "'");

  std::vector<std::pair<std::int64_t, double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw DataError("malformed row at line " + std::to_string(lineno));
    }
    const std::int64_t ts = parse_iso8601(line.substr(0, comma));
    const std::string value_text = line.substr(comma + 1);
    char* end = nullptr;
    const double value = std::strtod(value_text.c_str(), &end);
    if (end == value_text.c_str() || *end != '\0' || !std::isfinite(value)) {
      throw DataError("malformed value at line " + std::to_string(lineno));
    }
    if (value < 0) {
      throw DataError("negative demand value at line " + std::to_string(lineno));
    }
    rows.emplace_back(ts, value);
  }
  if (rows.empty()) throw DataError("no data rows in '" + path + "'");

  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  DemandSeries series;
  series.start_time = rows.front().first;
  series.values.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0) {
      const std::int64_t step = rows[i].first - rows[i - 1].first;
      if (step > kIntervalSeconds) {
        throw DataError("gap at " + format_iso8601(rows[i - 1].first) +
                        ": next reading is " + std::to_string(step / 60) +
                        " minutes later");
      }
      if (step != kIntervalSeconds) {
        throw DataError("timestamps not aligned to the 15-minute grid near " +
                        format_iso8601(rows[i].first));
      }
    }
    series.values.push_back(rows[i].second);
  }
  return series;
}

void save_csv(const DemandSeries& series, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "timestamp,demand\n";
  char buf[64];
  for (std::size_t i = 0; i < series.values.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.12g", series.values[i]);
    out << format_iso8601(series.time_at(i)) << ',' << buf << '\n';
  }
  if (!out) throw DataError("write failed for '" + path + "'");
}

DatasetSplit split(const DemandSeries& series, std::size_t train_n,
                   std::size_t test_n, double val_frac) {
  if (!(val_frac > 0.0 && val_frac < 1.0)) {
    throw std::invalid_argument("val_frac must be in (0, 1)");
  }
  if (train_n + test_n > series.size()) {
    throw DataError("insufficient data: " + std::to_string(series.size()) +
                    " records, need " + std::to_string(train_n + test_n));
  }
  const auto n_val = static_cast<std::size_t>(
      std::llround(static_cast<double>(train_n) * val_frac));
  if (n_val == 0 || n_val >= train_n) {
    throw DataError("split leaves an empty train or validation block");
  }
  const std::size_t n_train = train_n - n_val;

  auto slice = [&](std::size_t begin, std::size_t count) {
    DemandSeries out;
    out.start_time = series.time_at(begin);
    out.interval_minutes = series.interval_minutes;
    out.values.assign(series.values.begin() + static_cast<std::ptrdiff_t>(begin),
                      series.values.begin() +
                          static_cast<std::ptrdiff_t>(begin + count));
    return out;
  };

  DatasetSplit result;
  result.train = slice(0, n_train);
  result.validation = slice(n_train, n_val);
  result.test = slice(train_n, test_n);
  return result;
}

SeriesStats compute_stats(std::span<const double> values) {
  if (values.size() < 2) throw DataError("series too short for statistics");
  const auto n = static_cast<double>(values.size());

  SeriesStats st;
  st.count = values.size();

  double sum = 0;
  for (double v : values) sum += v;
  st.mean = sum / n;

  double m2 = 0, m3 = 0, m4 = 0;
  for (double v : values) {
    const double d = v - st.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  st.std = std::sqrt(m2 / (n - 1.0));
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (m2 > 1e-24) {
    st.skewness = m3 / std::pow(m2, 1.5);
    st.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  }

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  st.min = sorted.front();
  st.max = sorted.back();
  st.q25 = quantile_sorted(sorted, 0.25);
  st.median = quantile_sorted(sorted, 0.50);
  st.q75 = quantile_sorted(sorted, 0.75);

  // Mode of readings rounded to the nearest unit; ties pick the smaller value.
  std::map<long long, std::size_t> counts;
  for (double v : values) ++counts[std::llround(v)];
  std::size_t best = 0;
  for (const auto& [value, count] : counts) {
    if (count > best) {
      best = count;
      st.mode = static_cast<double>(value);
    }
  }
  return st;
}

SeriesStats compute_stats(const DemandSeries& series) {
  return compute_stats(std::span<const double>(series.values));
}

Scaler fit_scaler(std::span<const double> train_values) {
  if (train_values.size() < 2) throw DataError("need at least 2 values to fit a scaler");
  double lo = train_values[0], hi = train_values[0];
  for (double v : train_values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(hi > lo)) throw DataError("degenerate range: all training values equal");
  return Scaler{lo, hi};
}

Scaler fit_scaler(const DemandSeries& train) {
  return fit_scaler(std::span<const double>(train.values));
}

SyntheticSeries generate_synthetic_detailed(const SyntheticConfig& config) {
  if (config.n_samples <= 2 * kSamplesPerDay) {
    throw std::invalid_argument("n_samples must exceed two days of readings");
  }
  if (!(config.spike_rate >= 0.0 && config.spike_rate < 0.05)) {
    throw std::invalid_argument("spike_rate must be in [0, 0.05)");
  }
  if (config.min_clip < 0.0) {
    throw std::invalid_argument("min_clip must be non-negative");
  }

  const std::size_t n = config.n_samples;
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<double> raw(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double ud = static_cast<double>(t % kSamplesPerDay) / kSamplesPerDay;
    const double uw = static_cast<double>(t % kSamplesPerWeek) / kSamplesPerWeek;
    raw[t] = config.daily_amplitude * daily_shape(ud) +
             config.weekly_amplitude * std::sin(kTwoPi * uw) +
             config.noise_std * gauss(rng);
  }

  double mean = 0;
  for (double v : raw) mean += v;
  mean /= static_cast<double>(n);
  double var = 0;
  for (double v : raw) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  const double scale = var > 0 ? config.std / std::sqrt(var) : 0.0;

  SyntheticSeries out;
  out.series.start_time = config.start_time;
  out.series.values.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    out.series.values[t] = config.mean + scale * (raw[t] - mean);
  }

  // Spikes: triangular 3-sample excursions at fixed sample-of-day slots
  // that recur every day. Real demand extremes (pump starts, shift
  // changes) happen at recurring times, so the slots, signs and heights
  // are drawn once per series and repeated daily: the excursions are
  // sharp features of the signal, not unforecastable shocks. The expected
  // spike count stays spike_rate * n_samples.
  if (config.spike_rate > 0.0) {
    const int slots = std::max(
        1, static_cast<int>(std::llround(config.spike_rate * kSamplesPerDay)));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> position(1, kSamplesPerDay - 2);
    std::set<int> chosen;
    while (static_cast<int>(chosen.size()) < slots) chosen.insert(position(rng));
    for (const int slot : chosen) {
      const double sign = unit(rng) < 0.7 ? 1.0 : -1.0;
      const double height = config.spike_magnitude * (0.6 + 0.8 * unit(rng));
      for (std::size_t t = static_cast<std::size_t>(slot); t + 1 < n;
           t += kSamplesPerDay) {
        out.series.values[t - 1] += 0.5 * sign * height;
        out.series.values[t] += sign * height;
        out.series.values[t + 1] += 0.5 * sign * height;
        out.spike_indices.push_back(t);
      }
    }
    std::sort(out.spike_indices.begin(), out.spike_indices.end());
  }

  for (double& v : out.series.values) v = std::max(v, config.min_clip);
  return out;
}

DemandSeries generate_synthetic(const SyntheticConfig& config) {
  return generate_synthetic_detailed(config).series;
}

}  // namespace aquacast
