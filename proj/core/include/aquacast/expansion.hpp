#pragma once

#include <span>
#include <vector>

namespace aquacast {

/// A series with rho linearly interpolated virtual values inserted between
/// every two consecutive actual readings. origin_mask marks actual positions
/// (every (rho+1)-th index); the actual values are copied bit-exactly.
struct ExpandedSeries {
  std::vector<double> values;
  int rho = 0;
  std::vector<bool> origin_mask;
};

/// Insert rho virtual values per gap: between x_i and x_{i+1} the k-th
/// inserted value is x_i + k * (x_{i+1} - x_i) / (rho + 1). rho = 0 returns
/// the series unchanged. Requires at least 2 values.
ExpandedSeries expand(std::span<const double> series, int rho);

/// Values at the actual (origin_mask = true) positions.
/// collapse(expand(s, rho)) == s exactly.
std::vector<double> collapse(const ExpandedSeries& expanded);

/// Mean absolute second difference over interior points; 0 for an affine
/// series. Requires at least 3 values.
double local_linearity(std::span<const double> series);

/// Index in the expanded series of actual reading i.
inline std::size_t expanded_index(std::size_t actual_index, int rho) {
  return actual_index * static_cast<std::size_t>(rho + 1);
}

}  // namespace aquacast
