#pragma once

#include <span>
#include <vector>

#include "aquacast/kmeans.hpp"
#include "aquacast/models.hpp"
#include "aquacast/nn/train.hpp"
#include "aquacast/series.hpp"

namespace aquacast {

/// Model input rows: column 0 the scaled demand value, columns 1..m the
/// one-hot class indicator (absent when m = 0).
struct FeatureWindow {
  nn::Matrix rows;

  int steps() const { return static_cast<int>(rows.rows()); }
  int width() const { return static_cast<int>(rows.cols()); }
};

struct ForecastResult {
  std::vector<double> predicted;   // original units, clamped at zero
  int scenario = 2;
  std::vector<double> abs_errors;  // filled when actuals are supplied
  std::size_t internal_steps = 0;  // network forwards performed
};

/// Pair each scaled value with its class indicator. Classification runs
/// on unscaled values via the scaler's inverse. `kmeans` may be null for
/// models without class features (m = 0).
FeatureWindow assemble_window(std::span<const double> scaled_history,
                              int expected_steps, const KMeansModel* kmeans,
                              const Scaler& scaler);

/// Scenario 1: one next-period prediction in original units. EDCGRU
/// first predicts its rho virtual values (classified and rolled into the
/// window) and then the actual-period value; kmeans is required for any
/// model with class features. GRUN takes the lag-window overload.
double predict_one(const Model& model, const FeatureWindow& window,
                   const Scaler& scaler, const KMeansModel* kmeans = nullptr);
double predict_one(const Model& model, const GRUNFeatureWindow& window,
                   const Scaler& scaler);

/// Teacher-forced Scenario 1 at one target index of a raw series.
double predict_one_at(const Model& model, std::span<const double> series,
                      std::size_t target, const Scaler& scaler,
                      const KMeansModel* kmeans = nullptr);

/// Teacher-forced Scenario 1 over targets [first, first+count), batched.
/// Per index this agrees with predict_one_at up to the summation order of
/// the batched kernels (a few ulp); for a fixed batch size the result is
/// bit-reproducible.
std::vector<double> predict_scenario1(const Model& model,
                                      std::span<const double> series,
                                      std::size_t first, std::size_t count,
                                      const Scaler& scaler,
                                      const KMeansModel* kmeans = nullptr,
                                      int batch_size = 256);

/// Scenario 2: 96 iterative steps from the end of `history` (raw units).
/// Every prediction is clamped, classified against the frozen centers and
/// rolled into the window before the next step. EDCGRU runs 96*(rho+1)
/// internal steps and keeps every (rho+1)-th value; GRUN applies its
/// correction network once over the finished day.
ForecastResult predict_day(const Model& model, std::span<const double> history,
                           const KMeansModel* kmeans, const Scaler& scaler,
                           std::span<const double> actuals = {});

/// Run the day-level correction over 96 predictions (original units).
std::vector<double> apply_correction(std::span<const double> day_prediction,
                                     const nn::Network& correction,
                                     const Scaler& scaler);

/// Materialize supervised windows for targets [first_target, end_target)
/// of a raw series. For EDCGRU the series is expanded first and every
/// expanded position whose interpolation sources lie before end_target
/// becomes a target. Inputs and targets are in scaled space.
nn::WindowDataset build_windows(const Model& model,
                                std::span<const double> series,
                                const Scaler& scaler,
                                const KMeansModel* kmeans,
                                std::size_t first_target,
                                std::size_t end_target);

/// Day pairs (96 iteratively predicted values -> 96 actuals, scaled) for
/// training the GRUN correction; day starts stride by 96 from the first
/// index with enough history.
nn::WindowDataset build_correction_windows(const Model& grun,
                                           std::span<const double> series,
                                           const Scaler& scaler,
                                           std::size_t first_target,
                                           std::size_t end_target);

/// Predictions CSV: timestamp,predicted[,actual,abs_error].
void save_predictions_csv(const std::string& path,
                          std::int64_t first_timestamp,
                          std::span<const double> predicted,
                          std::span<const double> actuals = {});

}  // namespace aquacast
