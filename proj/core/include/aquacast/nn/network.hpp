#pragma once

#include <memory>
#include <vector>

#include "aquacast/nn/layers.hpp"

namespace aquacast::nn {

/// Shape of one branch input: `steps` time steps of `width` features.
struct InputSpec {
  int steps;
  int width;
};

/// Feed-forward graph of one or more branches whose single-step outputs
/// are concatenated feature-wise and pushed through a shared head. The
/// degenerate case (one branch, empty head or vice versa) covers plain
/// stacks. The final output must be a single-step sequence.
class Network {
 public:
  Network() = default;
  Network(Network&&) = default;
  Network& operator=(Network&&) = default;
  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  /// Append a branch with its input shape. Layers are added to the most
  /// recently started branch via add_layer until start_head() is called.
  void start_branch(InputSpec spec);
  void add_layer(std::unique_ptr<Layer> layer);
  void start_head();

  std::size_t branch_count() const { return branches_.size(); }
  const std::vector<InputSpec>& input_specs() const { return specs_; }
  const std::vector<std::unique_ptr<Layer>>& branch(std::size_t i) const {
    return branches_[i];
  }
  const std::vector<std::unique_ptr<Layer>>& head() const { return head_; }

  /// Width of the final output (per sample).
  int output_width() const;

  /// Run a mini-batch through the graph. `inputs` must match the input
  /// specs branch for branch; every matrix in branch i must be
  /// (batch x specs[i].width) and the sequence specs[i].steps long.
  /// Const per the inference contract: cache=false touches no state and
  /// is safe concurrently; cache=true (training) is single-threaded.
  Matrix forward(const std::vector<Sequence>& inputs, bool cache = false) const;
  Matrix forward(const Sequence& input, bool cache = false) const;

  /// Backpropagate d(loss)/d(output); accumulates parameter gradients.
  void backward(const Matrix& d_output);

  std::vector<ParamRef> params();
  std::size_t param_count() const;
  void zero_grads();

  std::vector<Matrix> snapshot() const;
  void restore(const std::vector<Matrix>& saved);

 private:
  int branch_output_width(std::size_t b) const;

  std::vector<InputSpec> specs_;
  std::vector<std::vector<std::unique_ptr<Layer>>> branches_;
  std::vector<std::unique_ptr<Layer>> head_;
  bool in_head_ = false;
};

/// Draw every weight matrix of `net` from Xavier-uniform with a fresh
/// mt19937_64(seed); bias vectors stay zero. Matrices are filled in
/// params() order, gate fan-in/out taken from each matrix's own shape.
void init_xavier(Network& net, std::uint64_t seed);

}  // namespace aquacast::nn
