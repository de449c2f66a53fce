#include "aquacast/nn/network.hpp"

#include <stdexcept>

namespace aquacast::nn {

void Network::start_branch(InputSpec spec) {
  if (in_head_) throw std::logic_error("branches must precede the head");
  if (spec.steps <= 0 || spec.width <= 0)
    throw std::invalid_argument("input spec dimensions must be positive");
  specs_.push_back(spec);
  branches_.emplace_back();
}

void Network::add_layer(std::unique_ptr<Layer> layer) {
  if (in_head_) {
    head_.push_back(std::move(layer));
  } else {
    if (branches_.empty())
      throw std::logic_error("start_branch before add_layer");
    branches_.back().push_back(std::move(layer));
  }
}

void Network::start_head() { in_head_ = true; }

int Network::output_width() const {
  if (!head_.empty()) return head_.back()->output_width();
  int width = 0;
  for (const auto& branch : branches_)
    width += branch.empty() ? 0 : branch.back()->output_width();
  return width;
}

int Network::branch_output_width(std::size_t b) const {
  return branches_[b].empty() ? specs_[b].width
                              : branches_[b].back()->output_width();
}

Matrix Network::forward(const std::vector<Sequence>& inputs,
                        bool cache) const {
  if (branches_.empty()) throw std::logic_error("network has no branches");
  if (inputs.size() != branches_.size())
    throw std::invalid_argument("branch count mismatch");

  Matrix merged;
  for (std::size_t b = 0; b < branches_.size(); ++b) {
    const InputSpec& spec = specs_[b];
    const Sequence& input = inputs[b];
    if (static_cast<int>(input.size()) != spec.steps)
      throw std::invalid_argument("sequence length mismatch");
    for (const Matrix& x : input)
      if (x.cols() != spec.width)
        throw std::invalid_argument("feature width mismatch");

    Sequence out = input;
    for (const auto& layer : branches_[b]) out = layer->forward(out, cache);
    if (out.size() != 1)
      throw std::logic_error("branch output must be single-step");
    if (b == 0) {
      merged = std::move(out[0]);
    } else {
      if (out[0].rows() != merged.rows())
        throw std::invalid_argument("batch size mismatch between branches");
      Matrix next(merged.rows(), merged.cols() + out[0].cols());
      next << merged, out[0];
      merged = std::move(next);
    }
  }

  Sequence current;
  current.push_back(std::move(merged));
  for (const auto& layer : head_) current = layer->forward(current, cache);
  if (current.size() != 1)
    throw std::logic_error("head output must be single-step");
  return current[0];
}

Matrix Network::forward(const Sequence& input, bool cache) const {
  std::vector<Sequence> inputs;
  inputs.push_back(input);
  return forward(inputs, cache);
}

void Network::backward(const Matrix& d_output) {
  Sequence grad;
  grad.push_back(d_output);
  for (auto it = head_.rbegin(); it != head_.rend(); ++it)
    grad = (*it)->backward(grad);

  const Matrix& merged = grad[0];
  Eigen::Index offset = 0;
  for (std::size_t b = 0; b < branches_.size(); ++b) {
    const int width = branch_output_width(b);
    Sequence branch_grad;
    branch_grad.push_back(merged.middleCols(offset, width));
    offset += width;
    for (auto it = branches_[b].rbegin(); it != branches_[b].rend(); ++it)
      branch_grad = (*it)->backward(branch_grad);
  }
}

std::vector<ParamRef> Network::params() {
  std::vector<ParamRef> out;
  for (auto& branch : branches_)
    for (auto& layer : branch) layer->collect_params(out);
  for (auto& layer : head_) layer->collect_params(out);
  return out;
}

std::size_t Network::param_count() const {
  std::size_t total = 0;
  for (const auto& branch : branches_)
    for (const auto& layer : branch) total += layer->param_count();
  for (const auto& layer : head_) total += layer->param_count();
  return total;
}

void Network::zero_grads() {
  for (ParamRef& p : params()) p.grad->setZero();
}

std::vector<Matrix> Network::snapshot() const {
  std::vector<Matrix> saved;
  auto& self = const_cast<Network&>(*this);
  for (ParamRef& p : self.params()) saved.push_back(*p.value);
  return saved;
}

void Network::restore(const std::vector<Matrix>& saved) {
  std::vector<ParamRef> refs = params();
  if (saved.size() != refs.size())
    throw std::invalid_argument("snapshot size mismatch");
  for (std::size_t i = 0; i < refs.size(); ++i) *refs[i].value = saved[i];
}

void init_xavier(Network& net, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (ParamRef& p : net.params()) {
    if (p.is_bias) {
      p.value->setZero();
    } else {
      const int fan_out = static_cast<int>(p.value->rows());
      const int fan_in = static_cast<int>(p.value->cols());
      xavier_fill(*p.value, fan_in, fan_out, rng);
    }
  }
}

}  // namespace aquacast::nn
