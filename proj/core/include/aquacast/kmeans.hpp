#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace aquacast {

/// One-dimensional k-means model: m class centers sorted ascending, plus the
/// within-cluster sum of squared errors (distortion) on the training data.
struct KMeansModel {
  std::vector<double> centers;
  double sse = 0.0;

  int m() const { return static_cast<int>(centers.size()); }
};

/// Nearest-center class of a single value, with its one-hot indicator.
struct Assignment {
  int class_index = 0;
  std::vector<double> indicator;
};

/// Distortion-vs-m curve with the knee chosen by maximum perpendicular
/// distance to the chord between the first and last curve points (computed on
/// the unit-square-normalized curve). low_confidence is set when that maximum
/// distance is under 5% of the chord length, i.e. the curve has no clear knee.
struct DistortionCurve {
  std::vector<int> m_values;
  std::vector<double> distortions;
  int chosen_m = 0;
  bool low_confidence = false;
};

/// Initial centers: m draws of standard normal * data_std + data_mean.
/// Deterministic for a fixed seed.
std::vector<double> init_centers(double data_mean, double data_std, int m,
                                 std::uint64_t seed);

/// Index of the nearest center; ties break toward the smaller index.
int assign_index(double value, std::span<const double> centers);

/// Nearest-center assignment with one-hot indicator.
Assignment assign(double value, std::span<const double> centers);

/// Within-cluster sum of squared distances to the nearest center.
double sse(std::span<const double> data, const KMeansModel& model);

/// Lloyd's algorithm, best of `restarts` runs seeded seed, seed+1, ...
/// Empty clusters are re-seeded to a random data point; iteration stops when
/// assignments are stable or after max_iter rounds. Centers come back sorted.
KMeansModel lloyd(std::span<const double> data, int m, std::uint64_t seed,
                  int max_iter = 300, int restarts = 10);

/// Distortion curve over m in [m_min, m_max] with knee detection. Every m
/// uses the same base seed so restart noise is shared across the curve.
/// The chord rule scores both endpoints as zero, so the knee must lie
/// strictly inside the scanned range to be found; pick m_min below and
/// m_max above the plausible class counts.
DistortionCurve elbow(std::span<const double> data, int m_min, int m_max,
                      std::uint64_t seed);

namespace detail {

/// Single Lloyd run from explicit initial centers; records the SSE after each
/// recentering step. Exposed for the monotonicity checks in the test suite.
struct LloydRun {
  std::vector<double> centers;
  std::vector<double> sse_per_iteration;
};

LloydRun lloyd_single(std::span<const double> data,
                      std::vector<double> initial_centers, int max_iter,
                      std::uint64_t repair_seed);

}  // namespace detail

}  // namespace aquacast
