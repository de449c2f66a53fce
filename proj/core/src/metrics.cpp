#include "aquacast/metrics.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "aquacast/errors.hpp"

#include <nlohmann/json.hpp>

namespace aquacast {

namespace {

void check_pair(std::span<const double> actual,
                std::span<const double> predicted) {
  if (actual.size() != predicted.size())
    throw std::invalid_argument("actual/predicted length mismatch");
  if (actual.empty()) throw std::invalid_argument("empty metric input");
}

std::string num_cell(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

double mae(std::span<const double> actual, std::span<const double> predicted) {
  check_pair(actual, predicted);
  double sum = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i)
    sum += std::abs(actual[i] - predicted[i]);
  return sum / static_cast<double>(actual.size());
}

double mape(std::span<const double> actual,
            std::span<const double> predicted) {
  check_pair(actual, predicted);
  double sum = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] == 0.0)
      throw std::invalid_argument("mape undefined for zero actuals");
    sum += std::abs(actual[i] - predicted[i]) / std::abs(actual[i]);
  }
  return 100.0 * sum / static_cast<double>(actual.size());
}

double aic(std::size_t n, std::size_t k, double rss) {
  if (n == 0 || k == 0) throw std::invalid_argument("n and k must be positive");
  if (rss <= 0.0) throw std::invalid_argument("rss must be positive");
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  const double base = nd * std::log(rss / nd) + 2.0 * kd;
  const double ratio = nd / kd;
  if (ratio > 1.0 && ratio < 40.0) {
    if (n <= k + 1)
      throw std::invalid_argument(
          "small-sample correction needs n > k + 1");
    return base + 2.0 * kd * (kd + 1.0) / (nd - kd - 1.0);
  }
  return base;
}

double time_op_ms(const std::function<void()>& op, int reps) {
  if (reps < 1) throw std::invalid_argument("reps >= 1");
  const int warmup = reps > 10 ? 10 : 0;
  using clock = std::chrono::steady_clock;
  double total_ms = 0.0;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = clock::now();
    op();
    const auto t1 = clock::now();
    if (r >= warmup)
      total_ms += std::chrono::duration<double, std::milli>(t1 - t0).count();
  }
  return total_ms / static_cast<double>(reps - warmup);
}

double time_forecast(const Model& model, int scenario,
                     std::span<const double> series, const Scaler& scaler,
                     const KMeansModel* kmeans, int reps) {
  if (scenario != 1 && scenario != 2)
    throw std::invalid_argument("scenario must be 1 or 2");
  if (scenario == 1) {
    const std::size_t target = series.size();
    return time_op_ms(
        [&] { (void)predict_one_at(model, series, target, scaler, kmeans); },
        reps);
  }
  return time_op_ms(
      [&] { (void)predict_day(model, series, kmeans, scaler); }, reps);
}

std::string EvalReport::to_csv() const {
  std::ostringstream out;
  out << "model,scenario,mae,mape,rss,aic,k,train_s,forecast_ms\n";
  for (const EvalRow& r : rows) {
    out << r.model << ',' << r.scenario << ',' << num_cell(r.mae) << ','
        << num_cell(r.mape) << ',' << num_cell(r.rss) << ','
        << num_cell(r.aic) << ',' << r.k << ',' << num_cell(r.train_seconds)
        << ',' << num_cell(r.forecast_ms) << '\n';
  }
  return out.str();
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const EvalRow& r : rows) {
    nlohmann::ordered_json row;
    row["model"] = r.model;
    row["scenario"] = r.scenario;
    row["mae"] = r.mae;
    row["mape"] = r.mape;
    row["rss"] = r.rss;
    row["aic"] = r.aic;
    row["k"] = r.k;
    row["train_s"] =
        std::isnan(r.train_seconds)
            ? nlohmann::ordered_json(nullptr)
            : nlohmann::ordered_json(r.train_seconds);
    row["forecast_ms"] = std::isnan(r.forecast_ms)
                             ? nlohmann::ordered_json(nullptr)
                             : nlohmann::ordered_json(r.forecast_ms);
    arr.push_back(std::move(row));
  }
  return arr.dump(2) + "\n";
}

EvalReport build_report(std::span<const EvaluatedModel> models,
                        std::span<const double> series, std::size_t test_n,
                        int timing_reps) {
  if (test_n == 0 || test_n > series.size())
    throw DataError("test block outside the series");
  const std::size_t n = series.size();
  const std::size_t test_start = n - test_n;

  EvalReport report;
  for (const EvaluatedModel& em : models) {
    const Model& model = *em.model;
    const Scaler& scaler = *em.scaler;
    const auto history = static_cast<std::size_t>(model.history_len());
    if (test_start < history)
      throw DataError("test block lacks warm-up history");

    // One whole-series teacher-forced pass: RSS source and S1 metrics.
    const std::vector<double> whole =
        predict_scenario1(model, series, history, n - history, scaler,
                          em.kmeans);
    double rss = 0.0;
    for (std::size_t i = 0; i < whole.size(); ++i) {
      const double err = series[history + i] - whole[i];
      rss += err * err;
    }
    const double model_aic = aic(whole.size(), model.param_count(), rss);

    std::span<const double> s1_pred =
        std::span(whole).subspan(test_start - history, test_n);
    std::span<const double> s1_actual = series.subspan(test_start, test_n);

    // Scenario 2 over consecutive full days of the test block.
    std::vector<double> s2_pred, s2_actual;
    for (std::size_t day = test_start; day + kSamplesPerDay <= n;
         day += kSamplesPerDay) {
      const ForecastResult r =
          predict_day(model, series.first(day), em.kmeans, scaler,
                      series.subspan(day, kSamplesPerDay));
      s2_pred.insert(s2_pred.end(), r.predicted.begin(), r.predicted.end());
      s2_actual.insert(s2_actual.end(), series.begin() + day,
                       series.begin() + day + kSamplesPerDay);
    }
    if (s2_pred.empty())
      throw DataError("test block shorter than one day");

    const double nan = std::numeric_limits<double>::quiet_NaN();
    EvalRow s1{em.name, 1,    mae(s1_actual, s1_pred),
               mape(s1_actual, s1_pred), rss,
               model_aic, model.param_count(), em.train_seconds, nan};
    EvalRow s2{em.name, 2,    mae(s2_actual, s2_pred),
               mape(s2_actual, s2_pred), rss,
               model_aic, model.param_count(), em.train_seconds, nan};
    if (timing_reps > 0) {
      s1.forecast_ms = time_forecast(model, 1, series, scaler, em.kmeans,
                                     timing_reps);
      s2.forecast_ms = time_forecast(model, 2, series, scaler, em.kmeans,
                                     timing_reps);
    }
    report.rows.push_back(std::move(s1));
    report.rows.push_back(std::move(s2));
  }
  return report;
}

}  // namespace aquacast
