#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mtlw/data/dataset.hpp"
#include "mtlw/metrics/metrics.hpp"
#include "mtlw/net/multi_exit_net.hpp"
#include "mtlw/train/task_losses.hpp"
#include "mtlw/train/training_log.hpp"
#include "mtlw/weighting/loss_weighting.hpp"

namespace mtlw::train {

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t epochs = 15;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::size_t crop_width = 64;
  std::uint64_t seed = 0;
  weighting::WeightingConfig weighting;
  // Single-task baseline: only this head's loss is optimized (EW over one task).
  std::optional<Task> single_task;

  void validate() const;
};

struct TrainResult {
  TrainingLog log;
  std::vector<std::vector<double>> best_parameters;  // snapshot at best_epoch
  int best_epoch = 0;
  metrics::MetricsReport best_val;
  AgeStandardization age_standardization;
  std::vector<double> final_alphas;
};

/// Thrown when the combined loss becomes non-finite. log() holds every
/// completed epoch followed by a diagnostic record with status "nan_abort".
class NumericalAbort : public std::runtime_error {
 public:
  NumericalAbort(const std::string& message, int epoch, TrainingLog log)
      : std::runtime_error(message), epoch_(epoch), log_(std::move(log)) {}
  int epoch() const noexcept { return epoch_; }
  const TrainingLog& log() const noexcept { return log_; }

 private:
  int epoch_;
  TrainingLog log_;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Trains `net` in place. Each epoch: seeded shuffled batches with random
/// time crops, forward, per-task losses, weighted combination, backward and
/// AdamW over network weights plus (for UW-family strategies) the task
/// log-variances. After the epoch the loss history advances and the
/// validation split is scored. best_parameters holds the epoch with the
/// highest validation H-Mean (earliest on ties).
TrainResult train(net::MultiExitNet& net, const data::Dataset& dataset, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// Deterministic center-crop pass over a split. Country is argmax of the
/// logits (first index on ties); age is reported in years.
metrics::MetricsReport evaluate(const net::MultiExitNet& net, const data::Dataset& dataset, data::Split split,
                                const TrainConfig& config, const AgeStandardization& age_standardization);

}  // namespace mtlw::train
