#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "aquacast/nn/network.hpp"

namespace aquacast {

/// Enumerator values are part of the checkpoint format; do not reorder.
enum class ModelKind : std::uint32_t {
  BGRU = 0,
  DCGRU = 1,
  EDCGRU = 2,
  GRUN = 3,
};

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

/// A built architecture plus the hyperparameters that shaped it. GRUN
/// optionally carries the day-level correction network once trained.
struct Model {
  ModelKind kind;
  int m_classes = 0;  // class-feature width (DCGRU/EDCGRU), 0 = none
  int rho = 0;        // virtual values per gap (EDCGRU), 0 = none
  nn::Network net;
  std::optional<nn::Network> correction;

  /// Width of one input row: demand value plus m indicator columns.
  int feature_width() const { return 1 + m_classes; }

  /// Steps the network consumes per forward pass (expanded for EDCGRU).
  int sequence_steps() const;

  /// Actual readings of history needed to predict the next reading.
  int history_len() const;

  /// Total trainable parameters, correction included when attached.
  std::size_t param_count() const;
};

// Feature lags per branch, most recent first.
inline constexpr int kGrunRecentLags[5] = {1, 2, 3, 4, 5};
inline constexpr int kGrunNearLags[5] = {94, 95, 96, 97, 98};
inline constexpr int kGrunDistantLags[5] = {190, 191, 192, 193, 194};
inline constexpr int kGrunHistory = 194;

/// Lagged demand values feeding the three GRUN branches; each array is
/// ordered most recent first (recent[0] = value at t-1).
struct GRUNFeatureWindow {
  std::array<double, 5> recent;   // t-1 .. t-5
  std::array<double, 5> near;     // t-94 .. t-98
  std::array<double, 5> distant;  // t-190 .. t-194
};

/// Pull the lag set for target index t out of `series`.
GRUNFeatureWindow extract_grun_window(std::span<const double> series,
                                      std::size_t t);

/// GRU(32, sigmoid gates / tanh output) over 96 scalar steps feeding
/// GRU(1, sigmoid gates / linear output). k = 3366.
Model build_bgru(std::uint64_t seed);

/// Time-distributed dense 50(relu) -> 10(relu) -> 1(linear) over 96 rows
/// of width m+1, then the BGRU GRU stack. k = 4187 for m = 4.
Model build_dcgru(int m, std::uint64_t seed);

/// Same stack as DCGRU over 96*(rho+1) rows; identical parameter vector
/// for equal seeds. rho = 0 degenerates to DCGRU.
Model build_edcgru(int m, int rho, std::uint64_t seed);

/// Three parallel GRU branches (48/32/32 units, relu gates / tanh output)
/// over the 5-step recent/near/distant lag sequences, concatenated into a
/// dense stack 64-32-16-8-4-2(relu) -> 1(linear).
Model build_grun(std::uint64_t seed);

/// Day-level correction: one linear dense layer, 96 -> 96.
nn::Network build_grun_correction(std::uint64_t seed);

}  // namespace aquacast
