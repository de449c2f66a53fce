#include "aquacast/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "aquacast/errors.hpp"

namespace aquacast::nn {

double LearningRate::at_epoch(int epoch) const {
  if (epoch < 1) throw std::invalid_argument("epochs are counted from 1");
  if (halve_every_epochs <= 0) return initial;
  const int halvings = (epoch - 1) / halve_every_epochs;
  return initial * std::pow(0.5, halvings);
}

EarlyStopTracker::EarlyStopTracker(int patience)
    : patience_(patience),
      best_loss_(std::numeric_limits<double>::infinity()) {
  if (patience < 1) throw std::invalid_argument("patience >= 1");
}

bool EarlyStopTracker::observe(double val_loss) {
  ++epochs_seen_;
  if (val_loss < best_loss_) {
    best_loss_ = val_loss;
    best_epoch_ = epochs_seen_;
    epochs_since_best_ = 0;
    return false;
  }
  ++epochs_since_best_;
  return epochs_since_best_ >= patience_;
}

WindowDataset::WindowDataset(std::vector<InputSpec> specs, int target_width)
    : specs_(std::move(specs)), target_width_(target_width) {
  if (specs_.empty()) throw std::invalid_argument("no input specs");
  if (target_width_ < 1) throw std::invalid_argument("bad target width");
  for (const InputSpec& s : specs_)
    input_len_ += static_cast<std::size_t>(s.steps) * s.width;
}

void WindowDataset::add(std::span<const double> inputs,
                        std::span<const double> target) {
  if (inputs.size() != input_len_)
    throw std::invalid_argument("flattened input length mismatch");
  if (target.size() != static_cast<std::size_t>(target_width_))
    throw std::invalid_argument("target length mismatch");
  inputs_.insert(inputs_.end(), inputs.begin(), inputs.end());
  targets_.insert(targets_.end(), target.begin(), target.end());
  ++n_;
}

void WindowDataset::gather(std::span<const std::size_t> rows,
                           std::vector<Sequence>& inputs,
                           Matrix& targets) const {
  const auto batch = static_cast<Eigen::Index>(rows.size());
  inputs.resize(specs_.size());
  std::size_t branch_offset = 0;
  for (std::size_t b = 0; b < specs_.size(); ++b) {
    const InputSpec& spec = specs_[b];
    Sequence& seq = inputs[b];
    seq.resize(spec.steps);
    for (int t = 0; t < spec.steps; ++t) seq[t].resize(batch, spec.width);
    for (Eigen::Index i = 0; i < batch; ++i) {
      const double* sample =
          inputs_.data() + rows[i] * input_len_ + branch_offset;
      for (int t = 0; t < spec.steps; ++t)
        for (int j = 0; j < spec.width; ++j)
          seq[t](i, j) = sample[static_cast<std::size_t>(t) * spec.width + j];
    }
    branch_offset += static_cast<std::size_t>(spec.steps) * spec.width;
  }
  targets.resize(batch, target_width_);
  for (Eigen::Index i = 0; i < batch; ++i)
    for (int j = 0; j < target_width_; ++j)
      targets(i, j) = targets_[rows[i] * target_width_ + j];
}

double evaluate_mse(Network& net, const WindowDataset& set, int batch_size) {
  if (set.empty()) throw std::invalid_argument("empty dataset");
  std::vector<std::size_t> rows(set.size());
  std::iota(rows.begin(), rows.end(), 0u);
  std::vector<Sequence> inputs;
  Matrix targets;
  double sse = 0.0;
  for (std::size_t at = 0; at < rows.size(); at += batch_size) {
    const std::size_t take =
        std::min<std::size_t>(batch_size, rows.size() - at);
    set.gather(std::span(rows).subspan(at, take), inputs, targets);
    const Matrix out = net.forward(inputs, /*cache=*/false);
    sse += (out - targets).squaredNorm();
  }
  return sse / (static_cast<double>(set.size()) * set.target_width());
}

TrainHistory train(Network& net, const WindowDataset& train_set,
                   const WindowDataset& val_set, const TrainConfig& config) {
  if (train_set.empty() || val_set.empty())
    throw std::invalid_argument("datasets must be non-empty");
  if (config.batch_size < 1) throw std::invalid_argument("batch_size >= 1");
  if (config.early_stop_patience < 1)
    throw std::invalid_argument("patience >= 1");

  std::vector<ParamRef> params = net.params();
  AdamState adam(params, config.adam);
  std::mt19937_64 shuffle_rng(config.shuffle_seed);

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0u);

  TrainHistory history;
  EarlyStopTracker stopper(config.early_stop_patience);
  std::vector<Matrix> best_params = net.snapshot();

  std::vector<Sequence> inputs;
  Matrix targets;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const double lr = config.learning_rate.at_epoch(epoch);
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double epoch_sse = 0.0;
    for (std::size_t at = 0; at < order.size(); at += config.batch_size) {
      const std::size_t take =
          std::min<std::size_t>(config.batch_size, order.size() - at);
      train_set.gather(std::span(order).subspan(at, take), inputs, targets);

      net.zero_grads();
      const Matrix out = net.forward(inputs, /*cache=*/true);
      const Matrix diff = out - targets;
      const double batch_sse = diff.squaredNorm();
      if (!std::isfinite(batch_sse))
        throw NumericError("training diverged: non-finite loss");
      epoch_sse += batch_sse;

      // d(MSE)/d(out) for the batch-mean squared error.
      const double scale =
          2.0 / (static_cast<double>(take) * train_set.target_width());
      net.backward(scale * diff);
      adam.step(params, lr);
    }

    const double train_mse =
        epoch_sse /
        (static_cast<double>(train_set.size()) * train_set.target_width());
    const double val_mse = evaluate_mse(net, val_set);
    if (!std::isfinite(val_mse))
      throw NumericError("training diverged: non-finite validation loss");
    history.train_loss.push_back(train_mse);
    history.val_loss.push_back(val_mse);
    history.stopped_epoch = epoch;

    const bool stop = stopper.observe(val_mse);
    if (stopper.improved()) best_params = net.snapshot();
    if (stop) break;
  }

  history.best_epoch = stopper.best_epoch();
  net.restore(best_params);
  return history;
}

}  // namespace aquacast::nn
