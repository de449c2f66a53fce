#include "aquacast/nn/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace aquacast::nn {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Linear:
      return "linear";
    case Activation::Relu:
      return "relu";
    case Activation::Sigmoid:
      return "sigmoid";
    case Activation::Tanh:
      return "tanh";
  }
  return "linear";
}

Activation activation_from_string(const std::string& name) {
  if (name == "linear") return Activation::Linear;
  if (name == "relu") return Activation::Relu;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "tanh") return Activation::Tanh;
  throw std::invalid_argument("unknown activation: " + name);
}

double xavier_limit(int fan_in, int fan_out) {
  return std::sqrt(6.0 / (static_cast<double>(fan_in) + fan_out));
}

void xavier_fill(Matrix& w, int fan_in, int fan_out, std::mt19937_64& rng) {
  const double limit = xavier_limit(fan_in, fan_out);
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = dist(rng);
}

namespace {

void check_width(const Sequence& input, int width) {
  if (input.empty()) throw std::invalid_argument("empty input sequence");
  for (const Matrix& x : input)
    if (x.cols() != width)
      throw std::invalid_argument("sequence width mismatch");
}

}  // namespace

// ---------------------------------------------------------------- Dense

DenseLayer::DenseLayer(int in_width, int out_width, Activation act)
    : weight(Matrix::Zero(out_width, in_width)),
      bias(Matrix::Zero(out_width, 1)),
      in_(in_width),
      out_(out_width),
      act_(act),
      g_weight_(Matrix::Zero(out_width, in_width)),
      g_bias_(Matrix::Zero(out_width, 1)) {
  if (in_width <= 0 || out_width <= 0)
    throw std::invalid_argument("dense layer dimensions must be positive");
}

Sequence DenseLayer::forward(const Sequence& input, bool cache) {
  check_width(input, in_);
  Sequence out(input.size());
  if (cache) {
    cached_input_ = input;
    cached_pre_.resize(input.size());
  }
  for (std::size_t t = 0; t < input.size(); ++t) {
    Matrix pre = input[t] * weight.transpose();
    pre.rowwise() += bias.col(0).transpose();
    out[t] = activate(act_, pre);
    if (cache) cached_pre_[t] = std::move(pre);
  }
  if (cache) cached_ = true;
  return out;
}

Sequence DenseLayer::backward(const Sequence& upstream) {
  if (!cached_) throw std::logic_error("backward without cached forward");
  if (upstream.size() != cached_input_.size())
    throw std::invalid_argument("upstream length mismatch");
  Sequence d_input(upstream.size());
  for (std::size_t t = 0; t < upstream.size(); ++t) {
    const Matrix post = activate(act_, cached_pre_[t]);
    Matrix d_pre = upstream[t].cwiseProduct(
        activation_grad(act_, cached_pre_[t], post));
    g_weight_ += d_pre.transpose() * cached_input_[t];
    g_bias_ += d_pre.colwise().sum().transpose();
    d_input[t] = d_pre * weight;
  }
  cached_ = false;
  return d_input;
}

void DenseLayer::collect_params(std::vector<ParamRef>& out) {
  out.push_back({&weight, &g_weight_, false});
  out.push_back({&bias, &g_bias_, true});
}

std::size_t DenseLayer::param_count() const {
  return static_cast<std::size_t>(out_) * (in_ + 1);
}

void DenseLayer::zero_grads() {
  g_weight_.setZero();
  g_bias_.setZero();
}

// ------------------------------------------------------------------ GRU

GRULayer::GRULayer(int in_width, int units, Activation gate_act,
                   Activation out_act, bool return_sequences)
    : w_z(Matrix::Zero(units, in_width)),
      u_z(Matrix::Zero(units, units)),
      b_z(Matrix::Zero(units, 1)),
      w_r(Matrix::Zero(units, in_width)),
      u_r(Matrix::Zero(units, units)),
      b_r(Matrix::Zero(units, 1)),
      w_h(Matrix::Zero(units, in_width)),
      u_h(Matrix::Zero(units, units)),
      b_h(Matrix::Zero(units, 1)),
      in_(in_width),
      units_(units),
      gate_act_(gate_act),
      out_act_(out_act),
      return_sequences_(return_sequences),
      g_w_z_(Matrix::Zero(units, in_width)),
      g_u_z_(Matrix::Zero(units, units)),
      g_b_z_(Matrix::Zero(units, 1)),
      g_w_r_(Matrix::Zero(units, in_width)),
      g_u_r_(Matrix::Zero(units, units)),
      g_b_r_(Matrix::Zero(units, 1)),
      g_w_h_(Matrix::Zero(units, in_width)),
      g_u_h_(Matrix::Zero(units, units)),
      g_b_h_(Matrix::Zero(units, 1)) {
  if (in_width <= 0 || units <= 0)
    throw std::invalid_argument("gru layer dimensions must be positive");
}

GRULayer::StepCache GRULayer::cell(const Matrix& x_t,
                                   const Matrix& h_prev) const {
  StepCache st;
  st.a_z = x_t * w_z.transpose() + h_prev * u_z.transpose();
  st.a_z.rowwise() += b_z.col(0).transpose();
  st.z = activate(gate_act_, st.a_z);

  st.a_r = x_t * w_r.transpose() + h_prev * u_r.transpose();
  st.a_r.rowwise() += b_r.col(0).transpose();
  st.r = activate(gate_act_, st.a_r);

  st.s = st.r.cwiseProduct(h_prev);
  st.a_c = x_t * w_h.transpose() + st.s * u_h.transpose();
  st.a_c.rowwise() += b_h.col(0).transpose();
  st.c = activate(out_act_, st.a_c);
  return st;
}

Matrix GRULayer::step(const Matrix& x_t, const Matrix& h_prev) const {
  if (x_t.cols() != in_ || h_prev.cols() != units_ ||
      x_t.rows() != h_prev.rows()) {
    throw std::invalid_argument("gru step dimension mismatch");
  }
  const StepCache st = cell(x_t, h_prev);
  return (Matrix::Ones(h_prev.rows(), units_) - st.z).cwiseProduct(h_prev) +
         st.z.cwiseProduct(st.c);
}

Sequence GRULayer::forward(const Sequence& input, bool cache) {
  check_width(input, in_);
  const auto batch = input.front().rows();
  const std::size_t horizon = input.size();

  Matrix h = Matrix::Zero(batch, units_);
  Sequence out;
  if (return_sequences_) out.reserve(horizon);
  if (cache) {
    steps_.clear();
    steps_.reserve(horizon);
  }

  for (std::size_t t = 0; t < horizon; ++t) {
    StepCache st = cell(input[t], h);
    Matrix h_next =
        (Matrix::Ones(batch, units_) - st.z).cwiseProduct(h) +
        st.z.cwiseProduct(st.c);
    if (cache) {
      st.x = input[t];
      st.h_prev = h;
      steps_.push_back(std::move(st));
    }
    h = std::move(h_next);
    if (return_sequences_) out.push_back(h);
  }
  if (!return_sequences_) out.push_back(h);
  if (cache) cached_ = true;
  return out;
}

Sequence GRULayer::backward(const Sequence& upstream) {
  if (!cached_) throw std::logic_error("backward without cached forward");
  const std::size_t horizon = steps_.size();
  const std::size_t expected = return_sequences_ ? horizon : 1;
  if (upstream.size() != expected)
    throw std::invalid_argument("upstream length mismatch");

  const auto batch = steps_.front().x.rows();
  Matrix d_h = Matrix::Zero(batch, units_);
  Sequence d_input(horizon);

  for (std::size_t i = horizon; i-- > 0;) {
    const StepCache& st = steps_[i];
    if (return_sequences_)
      d_h += upstream[i];
    else if (i + 1 == horizon)
      d_h += upstream[0];

    // h_t = (1 - z) . h_prev + z . c
    Matrix d_z = d_h.cwiseProduct(st.c - st.h_prev);
    Matrix d_c = d_h.cwiseProduct(st.z);
    Matrix d_h_prev =
        d_h.cwiseProduct(Matrix::Ones(batch, units_) - st.z);

    Matrix d_a_c = d_c.cwiseProduct(activation_grad(out_act_, st.a_c, st.c));
    g_w_h_ += d_a_c.transpose() * st.x;
    g_u_h_ += d_a_c.transpose() * st.s;
    g_b_h_ += d_a_c.colwise().sum().transpose();

    Matrix d_s = d_a_c * u_h;
    Matrix d_r = d_s.cwiseProduct(st.h_prev);
    d_h_prev += d_s.cwiseProduct(st.r);

    Matrix d_a_z = d_z.cwiseProduct(activation_grad(gate_act_, st.a_z, st.z));
    g_w_z_ += d_a_z.transpose() * st.x;
    g_u_z_ += d_a_z.transpose() * st.h_prev;
    g_b_z_ += d_a_z.colwise().sum().transpose();
    d_h_prev += d_a_z * u_z;

    Matrix d_a_r = d_r.cwiseProduct(activation_grad(gate_act_, st.a_r, st.r));
    g_w_r_ += d_a_r.transpose() * st.x;
    g_u_r_ += d_a_r.transpose() * st.h_prev;
    g_b_r_ += d_a_r.colwise().sum().transpose();
    d_h_prev += d_a_r * u_r;

    d_input[i] = d_a_z * w_z + d_a_r * w_r + d_a_c * w_h;
    d_h = std::move(d_h_prev);
  }
  cached_ = false;
  return d_input;
}

void GRULayer::collect_params(std::vector<ParamRef>& out) {
  out.push_back({&w_z, &g_w_z_, false});
  out.push_back({&u_z, &g_u_z_, false});
  out.push_back({&b_z, &g_b_z_, true});
  out.push_back({&w_r, &g_w_r_, false});
  out.push_back({&u_r, &g_u_r_, false});
  out.push_back({&b_r, &g_b_r_, true});
  out.push_back({&w_h, &g_w_h_, false});
  out.push_back({&u_h, &g_u_h_, false});
  out.push_back({&b_h, &g_b_h_, true});
}

std::size_t GRULayer::param_count() const {
  return 3u * static_cast<std::size_t>(units_) * (in_ + units_ + 1);
}

void GRULayer::zero_grads() {
  g_w_z_.setZero();
  g_u_z_.setZero();
  g_b_z_.setZero();
  g_w_r_.setZero();
  g_u_r_.setZero();
  g_b_r_.setZero();
  g_w_h_.setZero();
  g_u_h_.setZero();
  g_b_h_.setZero();
}

}  // namespace aquacast::nn
