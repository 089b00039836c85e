#include "mtlw/train/trainer.hpp"

#include <malloc.h>

#include <cmath>
#include <mutex>
#include <string>

#include "mtlw/errors.hpp"
#include "mtlw/train/adamw.hpp"

namespace mtlw::train {

namespace {

weighting::WeightingConfig effective_weighting(const TrainConfig& config) {
  weighting::WeightingConfig w = config.weighting;
  w.num_tasks = config.single_task ? 1 : kNumTasks;
  return w;
}

std::array<double, kNumTasks> to_task_array(const std::vector<double>& values, const TrainConfig& config) {
  std::array<double, kNumTasks> out{1.0, 1.0, 1.0};
  if (config.single_task) {
    out[static_cast<std::size_t>(*config.single_task)] = values.at(0);
  } else {
    for (std::size_t k = 0; k < kNumTasks; ++k) out[k] = values.at(k);
  }
  return out;
}

// Activations are tens of megabytes and are freed every step. Keeping them
// on the heap instead of mmap/munmap avoids re-faulting the pages each time.
void keep_large_blocks_on_heap() {
  static std::once_flag once;
  std::call_once(once, [] {
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
  });
}

void check_input_geometry(const net::MultiExitNet& net, const data::Dataset& dataset, const TrainConfig& config) {
  const net::NetConfig& nc = net.config();
  if (nc.input_height != dataset.height() || nc.input_width != config.crop_width || nc.input_channels != 1) {
    throw StructuralError("network expects 1x" + std::to_string(nc.input_height) + "x" +
                          std::to_string(nc.input_width) + " inputs but the dataset provides 1x" +
                          std::to_string(dataset.height()) + "x" + std::to_string(config.crop_width) +
                          " crops");
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate", "must be > 0");
  if (batch_size == 0) throw ConfigError("batch_size", "must be >= 1");
  if (epochs == 0) throw ConfigError("epochs", "must be >= 1");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay", "must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("beta1", "must be in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("beta2", "must be in [0, 1)");
  if (!(adam_epsilon > 0.0)) throw ConfigError("adam_epsilon", "must be > 0");
  if (crop_width == 0) throw ConfigError("crop_width", "must be >= 1");
  if (single_task && weighting.strategy != weighting::Strategy::kEW) {
    throw ConfigError("strategy", "single-task runs use EW");
  }
  effective_weighting(*this).validate();
}

TrainResult train(net::MultiExitNet& net, const data::Dataset& dataset, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  check_input_geometry(net, dataset, config);
  keep_large_blocks_on_heap();
  if (dataset.indices(data::Split::kTrain).empty()) throw StructuralError("train: empty train split");

  TrainResult result;
  result.age_standardization = AgeStandardization::from_dataset(dataset);

  weighting::WeightingState weights(effective_weighting(config));
  std::vector<ParamSlot> slots;
  for (const net::NamedParameter& p : net.parameters()) slots.push_back({p.tensor, true});
  for (const ad::Tensor& s : weights.trainable()) slots.push_back({s, false});

  const AdamWHyper hyper{config.learning_rate, config.weight_decay, config.beta1, config.beta2, config.adam_epsilon};
  AdamWState opt;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    EpochRecord record;
    record.epoch = static_cast<int>(epoch);
    record.lambdas = to_task_array(weights.lambdas(), config);

    std::array<double, kNumTasks> loss_sums{};
    double total_sum = 0.0;
    std::size_t seen = 0;

    const auto plans =
        data::batches(dataset, data::Split::kTrain, config.batch_size, config.seed, config.crop_width, epoch);
    for (const data::BatchPlan& plan : plans) {
      const data::Batch batch = data::make_batch(dataset, plan, config.crop_width);
      ad::Tape tape;
      const net::MultiExitOutput out = net.forward(tape, batch.features);
      const TaskLosses losses = task_losses(tape, out, batch, result.age_standardization);
      const auto all = losses.as_array();

      std::vector<ad::Tensor> active;
      if (config.single_task) {
        active.push_back(all[static_cast<std::size_t>(*config.single_task)]);
      } else {
        active.assign(all.begin(), all.end());
      }
      const ad::Tensor total = weights.combine(tape, active);

      const double b = static_cast<double>(batch.countries.size());
      if (!std::isfinite(total.item())) {
        EpochRecord diag = record;
        diag.status = "nan_abort";
        for (std::size_t k = 0; k < kNumTasks; ++k) diag.task_losses[k] = all[k].item();
        diag.alphas = to_task_array(weights.alphas(), config);
        diag.restraint = weights.restraint();
        diag.total_loss = total.item();
        TrainingLog partial = result.log;
        partial.records.push_back(diag);
        throw NumericalAbort("non-finite total loss in epoch " + std::to_string(epoch) + " after " +
                                 std::to_string(seen) + " samples",
                             static_cast<int>(epoch), std::move(partial));
      }

      for (ParamSlot& slot : slots) slot.tensor.zero_grad();
      tape.backward(total);
      adamw_step(slots, opt, hyper);

      for (std::size_t k = 0; k < kNumTasks; ++k) loss_sums[k] += all[k].item() * b;
      total_sum += total.item() * b;
      seen += batch.countries.size();
    }

    const double n = static_cast<double>(seen);
    for (std::size_t k = 0; k < kNumTasks; ++k) record.task_losses[k] = loss_sums[k] / n;
    record.total_loss = total_sum / n;
    record.alphas = to_task_array(weights.alphas(), config);
    record.restraint = weights.restraint();

    std::vector<double> history_losses;
    if (config.single_task) {
      history_losses.push_back(record.task_losses[static_cast<std::size_t>(*config.single_task)]);
    } else {
      history_losses.assign(record.task_losses.begin(), record.task_losses.end());
    }
    weights.end_epoch(history_losses);

    record.val = evaluate(net, dataset, data::Split::kVal, config, result.age_standardization);
    result.log.records.push_back(record);
    if (on_epoch) on_epoch(record);

    if (epoch == 1 || record.val.h_mean > result.best_val.h_mean) {
      result.best_epoch = record.epoch;
      result.best_val = record.val;
      result.best_parameters = net.snapshot();
    }
  }
  result.final_alphas = weights.alphas();
  return result;
}

metrics::MetricsReport evaluate(const net::MultiExitNet& net, const data::Dataset& dataset, data::Split split,
                                const TrainConfig& config, const AgeStandardization& age_standardization) {
  if (dataset.indices(split).empty()) {
    throw StructuralError("evaluate: empty split \"" + std::string(data::split_name(split)) + "\"");
  }
  check_input_geometry(net, dataset, config);
  keep_large_blocks_on_heap();

  std::vector<double> emo_pred, emo_gold, age_pred, age_gold;
  std::vector<int> cou_pred, cou_gold;
  for (const data::BatchPlan& plan : data::batches(dataset, split, config.batch_size, config.seed, config.crop_width)) {
    const data::Batch batch = data::make_batch(dataset, plan, config.crop_width);
    ad::Tape tape(false);
    const net::MultiExitOutput out = net.forward(tape, batch.features);

    const auto emo = out.emotion.values();
    emo_pred.insert(emo_pred.end(), emo.begin(), emo.end());
    emo_gold.insert(emo_gold.end(), batch.emotions.begin(), batch.emotions.end());

    const auto logits = out.country_logits.values();
    for (std::size_t i = 0; i < batch.countries.size(); ++i) {
      int best = 0;
      for (std::size_t c = 1; c < net::kNumCountries; ++c) {
        if (logits[i * net::kNumCountries + c] > logits[i * net::kNumCountries + best]) best = static_cast<int>(c);
      }
      cou_pred.push_back(best);
      age_pred.push_back(age_standardization.destandardize(out.age.values()[i]));
    }
    cou_gold.insert(cou_gold.end(), batch.countries.begin(), batch.countries.end());
    age_gold.insert(age_gold.end(), batch.ages.begin(), batch.ages.end());
  }

  const double emo_ccc = emo_pred.size() / net::kEmotionDims >= 2
                             ? metrics::mean_ccc(emo_pred, emo_gold, net::kEmotionDims)
                             : 0.0;
  return metrics::make_report(emo_ccc, metrics::uar(cou_pred, cou_gold, net::kNumCountries),
                              metrics::mae(age_pred, age_gold));
}

}  // namespace mtlw::train
