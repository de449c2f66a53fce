#include "aquacast/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "aquacast/errors.hpp"

namespace aquacast {

std::vector<double> init_centers(double data_mean, double data_std, int m,
                                 std::uint64_t seed) {
  if (m < 2) throw std::invalid_argument("need at least 2 classes");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> centers(static_cast<std::size_t>(m));
  for (double& c : centers) c = gauss(rng) * data_std + data_mean;
  return centers;
}

int assign_index(double value, std::span<const double> centers) {
  int best = 0;
  double best_dist = std::abs(value - centers[0]);
  for (int j = 1; j < static_cast<int>(centers.size()); ++j) {
    const double d = std::abs(value - centers[static_cast<std::size_t>(j)]);
    if (d < best_dist) {
      best_dist = d;
      best = j;
    }
  }
  return best;
}

Assignment assign(double value, std::span<const double> centers) {
  Assignment a;
  a.class_index = assign_index(value, centers);
  a.indicator.assign(centers.size(), 0.0);
  a.indicator[static_cast<std::size_t>(a.class_index)] = 1.0;
  return a;
}

double sse(std::span<const double> data, const KMeansModel& model) {
  double total = 0.0;
  for (double x : data) {
    const double c =
        model.centers[static_cast<std::size_t>(assign_index(x, model.centers))];
    total += (x - c) * (x - c);
  }
  return total;
}

namespace detail {

LloydRun lloyd_single(std::span<const double> data,
                      std::vector<double> initial_centers, int max_iter,
                      std::uint64_t repair_seed) {
  const std::size_t n = data.size();
  const auto m = static_cast<int>(initial_centers.size());
  std::mt19937_64 repair_rng(repair_seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);

  LloydRun run;
  run.centers = std::move(initial_centers);
  std::vector<int> labels(n, -1), prev_labels;

  for (int iter = 0; iter < max_iter; ++iter) {
    prev_labels = labels;
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = assign_index(data[i], run.centers);
    }

    std::vector<double> sums(static_cast<std::size_t>(m), 0.0);
    std::vector<std::size_t> counts(static_cast<std::size_t>(m), 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums[static_cast<std::size_t>(labels[i])] += data[i];
      ++counts[static_cast<std::size_t>(labels[i])];
    }
    for (int j = 0; j < m; ++j) {
      if (counts[static_cast<std::size_t>(j)] > 0) {
        run.centers[static_cast<std::size_t>(j)] =
            sums[static_cast<std::size_t>(j)] /
            static_cast<double>(counts[static_cast<std::size_t>(j)]);
      } else {
        run.centers[static_cast<std::size_t>(j)] = data[pick(repair_rng)];
      }
    }

    double iter_sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d =
          data[i] - run.centers[static_cast<std::size_t>(labels[i])];
      iter_sse += d * d;
    }
    run.sse_per_iteration.push_back(iter_sse);

    if (labels == prev_labels) break;
  }
  return run;
}

}  // namespace detail

KMeansModel lloyd(std::span<const double> data, int m, std::uint64_t seed,
                  int max_iter, int restarts) {
  if (m < 2) throw std::invalid_argument("need at least 2 classes");
  if (data.size() < static_cast<std::size_t>(m)) {
    throw DataError("insufficient data: " + std::to_string(data.size()) +
                    " points for " + std::to_string(m) + " classes");
  }

  double mean = 0.0;
  for (double x : data) mean += x;
  mean /= static_cast<double>(data.size());
  double ss = 0.0;
  for (double x : data) ss += (x - mean) * (x - mean);
  const double std_dev =
      data.size() > 1 ? std::sqrt(ss / static_cast<double>(data.size() - 1))
                      : 0.0;

  KMeansModel best;
  best.sse = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    const std::uint64_t run_seed = seed + static_cast<std::uint64_t>(r);
    auto run = detail::lloyd_single(
        data, init_centers(mean, std_dev, m, run_seed), max_iter, run_seed);
    std::sort(run.centers.begin(), run.centers.end());
    KMeansModel candidate{std::move(run.centers), 0.0};
    candidate.sse = sse(data, candidate);
    if (candidate.sse < best.sse) best = std::move(candidate);
  }
  return best;
}

DistortionCurve elbow(std::span<const double> data, int m_min, int m_max,
                      std::uint64_t seed) {
  if (m_min < 2 || m_min >= m_max) {
    throw std::invalid_argument("need 2 <= m_min < m_max");
  }
  if (data.size() < static_cast<std::size_t>(m_max)) {
    throw DataError("insufficient data for m_max = " + std::to_string(m_max));
  }

  DistortionCurve curve;
  for (int m = m_min; m <= m_max; ++m) {
    curve.m_values.push_back(m);
    curve.distortions.push_back(lloyd(data, m, seed).sse);
  }

  // Knee = max perpendicular distance to the first-last chord, computed on
  // the curve normalized into the unit square so the 5% low-confidence rule
  // is scale-free. Normalization is affine, so the argmax matches the
  // unnormalized curve.
  const auto k = curve.m_values.size();
  const double d0 = curve.distortions.front();
  const double d1 = curve.distortions.back();
  const double dspan = d0 - d1;
  double best_dist = -1.0;
  std::size_t best_idx = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(k - 1);
    const double y = dspan != 0.0 ? (curve.distortions[i] - d1) / dspan : 0.0;
    // Chord runs (0,1) -> (1,0); |x + y - 1| / sqrt(2) is the distance.
    const double dist = std::abs(x + y - 1.0) / std::sqrt(2.0);
    if (dist > best_dist) {
      best_dist = dist;
      best_idx = i;
    }
  }
  curve.chosen_m = curve.m_values[best_idx];
  curve.low_confidence = dspan == 0.0 || best_dist < 0.05 * std::sqrt(2.0);
  return curve;
}

}  // namespace aquacast
