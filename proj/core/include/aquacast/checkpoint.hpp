#pragma once

#include <optional>
#include <string>

#include "aquacast/kmeans.hpp"
#include "aquacast/models.hpp"
#include "aquacast/series.hpp"

namespace aquacast {

/// Everything needed to forecast: the trained model (with the GRUN
/// correction when present), the scaler fitted on the training block and
/// the frozen k-means centers. See docs/checkpoint-format.md for the
/// binary layout; files are byte-stable for identical contents.
struct Checkpoint {
  Model model;
  Scaler scaler;
  std::optional<KMeansModel> kmeans;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace aquacast
