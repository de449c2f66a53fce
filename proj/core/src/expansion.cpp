#include "aquacast/expansion.hpp"

#include <cmath>
#include <stdexcept>

#include "aquacast/errors.hpp"

namespace aquacast {

ExpandedSeries expand(std::span<const double> series, int rho) {
  if (rho < 0) throw std::invalid_argument("rho must be >= 0");
  if (series.size() < 2) throw DataError("series too short to expand");

  const std::size_t n = series.size();
  ExpandedSeries out;
  out.rho = rho;
  out.values.reserve(n + (n - 1) * static_cast<std::size_t>(rho));
  out.origin_mask.reserve(out.values.capacity());

  for (std::size_t i = 0; i + 1 < n; ++i) {
    out.values.push_back(series[i]);
    out.origin_mask.push_back(true);
    const double step = (series[i + 1] - series[i]) / (rho + 1);
    for (int k = 1; k <= rho; ++k) {
      out.values.push_back(series[i] + k * step);
      out.origin_mask.push_back(false);
    }
  }
  out.values.push_back(series[n - 1]);
  out.origin_mask.push_back(true);
  return out;
}

std::vector<double> collapse(const ExpandedSeries& expanded) {
  std::vector<double> out;
  for (std::size_t i = 0; i < expanded.values.size(); ++i) {
    if (expanded.origin_mask[i]) out.push_back(expanded.values[i]);
  }
  return out;
}

double local_linearity(std::span<const double> series) {
  if (series.size() < 3) throw DataError("series too short for local linearity");
  double total = 0.0;
  for (std::size_t i = 1; i + 1 < series.size(); ++i) {
    total += std::abs(series[i + 1] - 2.0 * series[i] + series[i - 1]);
  }
  return total / static_cast<double>(series.size() - 2);
}

}  // namespace aquacast
