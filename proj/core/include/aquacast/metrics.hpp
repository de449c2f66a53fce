#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "aquacast/forecast.hpp"

namespace aquacast {

/// Mean absolute error, in series units.
double mae(std::span<const double> actual, std::span<const double> predicted);

/// Mean absolute percentage error, in percent. Every actual must be
/// nonzero.
double mape(std::span<const double> actual, std::span<const double> predicted);

/// Akaike information criterion with the small-sample correction:
///   n*ln(rss/n) + 2k                          when n/k <= 1 or n/k >= 40
///   n*ln(rss/n) + 2k + 2k(k+1)/(n-k-1)        when 1 < n/k < 40
/// Throws when rss <= 0 or when the correction applies with n <= k+1.
double aic(std::size_t n, std::size_t k, double rss);

/// Mean wall-clock milliseconds of `op` over `reps` runs; when reps > 10
/// the first 10 runs are warm-up and are discarded.
double time_op_ms(const std::function<void()>& op, int reps);

/// Timing protocol: mean milliseconds of one Scenario-1 step (scenario=1)
/// or one full Scenario-2 day (scenario=2) at the end of `series`.
double time_forecast(const Model& model, int scenario,
                     std::span<const double> series, const Scaler& scaler,
                     const KMeansModel* kmeans, int reps = 1000);

struct EvalRow {
  std::string model;
  int scenario = 1;
  double mae = 0.0;
  double mape = 0.0;
  double rss = 0.0;
  double aic = 0.0;
  std::size_t k = 0;
  double train_seconds = 0.0;  // NaN when unknown
  double forecast_ms = 0.0;    // NaN when timing skipped
};

struct EvalReport {
  std::vector<EvalRow> rows;

  /// Columns: model,scenario,mae,mape,rss,aic,k,train_s,forecast_ms.
  /// NaN cells are left empty so reports stay byte-stable across runs
  /// when timing is skipped.
  std::string to_csv() const;
  std::string to_json() const;
};

/// One trained model handed to build_report. kmeans may be null.
struct EvaluatedModel {
  std::string name;
  const Model* model = nullptr;
  const Scaler* scaler = nullptr;
  const KMeansModel* kmeans = nullptr;
  double train_seconds = std::numeric_limits<double>::quiet_NaN();
};

/// Table-shaped evaluation over the chronological test block (the last
/// test_n readings of `series`):
///  - Scenario 1: teacher-forced one-step predictions over the block.
///  - Scenario 2: iterative day predictions over consecutive full days.
///  - RSS/AIC: Scenario-1 residuals over the whole series (one pass,
///    also the source of the Scenario-1 test metrics).
///  - Timing per the time_forecast protocol; timing_reps = 0 skips it.
EvalReport build_report(std::span<const EvaluatedModel> models,
                        std::span<const double> series, std::size_t test_n,
                        int timing_reps);

}  // namespace aquacast
