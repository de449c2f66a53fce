#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "aquacast/nn/adam.hpp"
#include "aquacast/nn/network.hpp"

namespace aquacast::nn {

/// Initial learning rate plus an optional halving schedule:
/// rate(epoch) = initial * 0.5^floor((epoch-1)/halve_every_epochs),
/// epochs counted from 1. halve_every_epochs = 0 disables the schedule.
struct LearningRate {
  double initial = 0.001;
  int halve_every_epochs = 0;

  double at_epoch(int epoch) const;
};

struct TrainConfig {
  LearningRate learning_rate{};
  int batch_size = 100;
  int max_epochs = 60;
  int early_stop_patience = 2;
  std::uint64_t shuffle_seed = 1;
  AdamConfig adam{};
};

struct TrainHistory {
  std::vector<double> train_loss;  // one entry per epoch run
  std::vector<double> val_loss;
  int stopped_epoch = 0;  // number of epochs actually run
  int best_epoch = 0;     // 1-based epoch whose weights were restored
};

/// Early-stopping bookkeeping: tracks the best validation loss seen so far
/// and signals a stop after `patience` consecutive epochs without a new
/// best. E.g. the trace [.5, .4, .41, .42] with patience 2 stops after
/// epoch 4 with best_epoch 2.
class EarlyStopTracker {
 public:
  explicit EarlyStopTracker(int patience);

  /// Record one epoch's validation loss; returns true when training
  /// should stop (patience exhausted).
  bool observe(double val_loss);

  /// True when the loss passed to the latest observe() was a new best
  /// (callers snapshot the model weights on this signal).
  bool improved() const { return epochs_since_best_ == 0; }
  int best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_loss_; }
  int epochs_seen() const { return epochs_seen_; }

 private:
  int patience_;
  int epochs_seen_ = 0;
  int best_epoch_ = 0;
  int epochs_since_best_ = 0;
  double best_loss_;
};

/// Flat store of training windows. Samples are added per branch in the
/// layout given by `specs` (time-major within a branch: step t, feature j
/// lives at t*width + j), followed by the target row.
class WindowDataset {
 public:
  explicit WindowDataset(std::vector<InputSpec> specs, int target_width = 1);

  void add(std::span<const double> inputs, std::span<const double> target);
  std::size_t size() const { return n_; }
  bool empty() const { return n_ == 0; }
  int target_width() const { return target_width_; }
  const std::vector<InputSpec>& specs() const { return specs_; }

  /// Materialize the samples at `rows` as per-branch batched sequences
  /// plus the (batch x target_width) target matrix.
  void gather(std::span<const std::size_t> rows,
              std::vector<Sequence>& inputs, Matrix& targets) const;

 private:
  std::vector<InputSpec> specs_;
  int target_width_;
  std::size_t input_len_ = 0;  // flattened input doubles per sample
  std::size_t n_ = 0;
  std::vector<double> inputs_;
  std::vector<double> targets_;
};

/// Mini-batch MSE training with per-epoch shuffling, Adam updates, the
/// optional halving schedule and early stopping: after `patience`
/// consecutive epochs without a new best validation loss, training stops
/// and the best-validation snapshot is restored. Throws NumericError if
/// the loss turns non-finite.
TrainHistory train(Network& net, const WindowDataset& train_set,
                   const WindowDataset& val_set, const TrainConfig& config);

/// Mean squared error of `net` over `set`, evaluated in batches.
double evaluate_mse(Network& net, const WindowDataset& set,
                    int batch_size = 256);

}  // namespace aquacast::nn
