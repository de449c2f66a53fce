#include "aquacast/nn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace aquacast::nn {

AdamState::AdamState(const std::vector<ParamRef>& params, AdamConfig cfg)
    : cfg_(cfg) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const ParamRef& p : params) {
    m_.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));
    v_.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));
  }
}

void AdamState::step(const std::vector<ParamRef>& params,
                     double learning_rate) {
  if (params.size() != m_.size())
    throw std::invalid_argument("parameter list does not match state");
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Matrix& g = *params[i].grad;
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
    params[i].value->array() -=
        learning_rate * (m_[i].array() / bc1) /
        ((v_[i].array() / bc2).sqrt() + cfg_.epsilon);
  }
}

}  // namespace aquacast::nn
