#pragma once

#include <cstdint>
#include <vector>

#include "aquacast/nn/layers.hpp"

namespace aquacast::nn {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam optimizer state (first/second moment per parameter matrix).
/// Bias-corrected update:
///   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2
///   p <- p - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
class AdamState {
 public:
  explicit AdamState(const std::vector<ParamRef>& params, AdamConfig cfg = {});

  /// One update over all parameters using their accumulated gradients.
  void step(const std::vector<ParamRef>& params, double learning_rate);

  std::int64_t steps_taken() const { return t_; }

 private:
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  std::int64_t t_ = 0;
  AdamConfig cfg_;
};

}  // namespace aquacast::nn
