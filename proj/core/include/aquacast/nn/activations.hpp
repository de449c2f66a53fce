#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

namespace aquacast::nn {

using Matrix = Eigen::MatrixXd;

/// Enumerator values are part of the checkpoint format; do not reorder.
enum class Activation : std::uint32_t {
  Linear = 0,
  Relu = 1,
  Sigmoid = 2,
  Tanh = 3,
};

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

inline Matrix activate(Activation a, const Matrix& pre) {
  switch (a) {
    case Activation::Linear:
      return pre;
    case Activation::Relu:
      return pre.cwiseMax(0.0);
    case Activation::Sigmoid:
      return (1.0 / (1.0 + (-pre.array()).exp())).matrix();
    case Activation::Tanh:
      return pre.array().tanh().matrix();
  }
  return pre;
}

/// Derivative of the activation w.r.t. its pre-activation, elementwise.
/// `post` must be activate(a, pre).
inline Matrix activation_grad(Activation a, const Matrix& pre,
                              const Matrix& post) {
  switch (a) {
    case Activation::Linear:
      return Matrix::Ones(pre.rows(), pre.cols());
    case Activation::Relu:
      return (pre.array() > 0.0).cast<double>().matrix();
    case Activation::Sigmoid:
      return (post.array() * (1.0 - post.array())).matrix();
    case Activation::Tanh:
      return (1.0 - post.array().square()).matrix();
  }
  return Matrix::Ones(pre.rows(), pre.cols());
}

}  // namespace aquacast::nn
