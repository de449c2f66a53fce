#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "aquacast/nn/activations.hpp"

namespace aquacast::nn {

/// A mini-batch of sequences: one (batch x width) matrix per time step.
/// All matrices in a Sequence share the same number of rows.
using Sequence = std::vector<Matrix>;

/// Mutable view onto one parameter matrix and its accumulated gradient.
struct ParamRef {
  Matrix* value;
  Matrix* grad;
  bool is_bias = false;
};

/// Xavier (Glorot) uniform limit: sqrt(6 / (fan_in + fan_out)).
double xavier_limit(int fan_in, int fan_out);

/// Fill `w` with U(-L, L) draws from `rng`, row by row.
void xavier_fill(Matrix& w, int fan_in, int fan_out, std::mt19937_64& rng);

class Layer {
 public:
  virtual ~Layer() = default;

  /// Forward pass over a mini-batch. When `cache` is true the layer keeps
  /// the activations needed by backward(); calls to backward() without a
  /// preceding cached forward() throw std::logic_error.
  virtual Sequence forward(const Sequence& input, bool cache) = 0;

  /// Propagate upstream gradients, accumulate parameter gradients and
  /// return the gradient w.r.t. this layer's input sequence.
  virtual Sequence backward(const Sequence& upstream) = 0;

  virtual void collect_params(std::vector<ParamRef>& out) = 0;
  virtual std::size_t param_count() const = 0;
  virtual int input_width() const = 0;
  virtual int output_width() const = 0;
};

/// Fully connected layer applied independently to every time step
/// (time-distributed). y = act(x W^T + b^T).
class DenseLayer final : public Layer {
 public:
  DenseLayer(int in_width, int out_width, Activation act);

  Sequence forward(const Sequence& input, bool cache) override;
  Sequence backward(const Sequence& upstream) override;
  void collect_params(std::vector<ParamRef>& out) override;
  std::size_t param_count() const override;
  int input_width() const override { return in_; }
  int output_width() const override { return out_; }
  Activation activation() const { return act_; }

  Matrix weight;  // out x in
  Matrix bias;    // out x 1

 private:
  int in_;
  int out_;
  Activation act_;
  Matrix g_weight_;
  Matrix g_bias_;
  Sequence cached_input_;
  Sequence cached_pre_;
  bool cached_ = false;

  friend class Network;
  void zero_grads();
};

/// Gated recurrent unit layer.
///
///   z_t = g(W_z x_t + U_z h_{t-1} + b_z)
///   r_t = g(W_r x_t + U_r h_{t-1} + b_r)
///   c_t = s(W_h x_t + U_h (r_t . h_{t-1}) + b_h)
///   h_t = (1 - z_t) . h_{t-1} + z_t . c_t
///
/// with gate activation g and output activation s. The initial state is
/// zero. With return_sequences the output has one step per input step;
/// otherwise it is a single-step sequence holding h_T.
class GRULayer final : public Layer {
 public:
  GRULayer(int in_width, int units, Activation gate_act, Activation out_act,
           bool return_sequences);

  Sequence forward(const Sequence& input, bool cache) override;
  Sequence backward(const Sequence& upstream) override;
  void collect_params(std::vector<ParamRef>& out) override;
  std::size_t param_count() const override;
  int input_width() const override { return in_; }
  int output_width() const override { return units_; }
  int units() const { return units_; }

  /// One cell application: h_t from a (batch x in) input row and a
  /// (batch x units) previous state. Pure — touches no training state.
  Matrix step(const Matrix& x_t, const Matrix& h_prev) const;
  bool return_sequences() const { return return_sequences_; }
  Activation gate_activation() const { return gate_act_; }
  Activation output_activation() const { return out_act_; }

  // Parameter order here matches the checkpoint layout.
  Matrix w_z, u_z, b_z;
  Matrix w_r, u_r, b_r;
  Matrix w_h, u_h, b_h;

 private:
  struct StepCache {
    Matrix x, h_prev, a_z, z, a_r, r, s, a_c, c;
  };

  /// Evaluate one cell step, returning every intermediate backward needs.
  StepCache cell(const Matrix& x_t, const Matrix& h_prev) const;

  int in_;
  int units_;
  Activation gate_act_;
  Activation out_act_;
  bool return_sequences_;

  Matrix g_w_z_, g_u_z_, g_b_z_;
  Matrix g_w_r_, g_u_r_, g_b_r_;
  Matrix g_w_h_, g_u_h_, g_b_h_;

  std::vector<StepCache> steps_;
  bool cached_ = false;

  friend class Network;
  void zero_grads();
};

}  // namespace aquacast::nn
