#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>

#include "mtlw/autodiff/tape.hpp"
#include "mtlw/data/dataset.hpp"
#include "mtlw/net/multi_exit_net.hpp"

namespace mtlw::train {

// Task order used for loss vectors, alphas and lambdas throughout training.
enum class Task { kEmotion = 0, kCountry = 1, kAge = 2 };
inline constexpr std::size_t kNumTasks = 3;

std::string_view task_name(Task task);
std::optional<Task> parse_task(std::string_view name);

struct AgeStandardization {
  double mean = 0.0;
  double std = 1.0;

  double standardize(double years) const { return (years - mean) / std; }
  double destandardize(double z) const { return z * std + mean; }

  // Population mean/std of ages over the training split.
  static AgeStandardization from_dataset(const data::Dataset& dataset);
};

struct TaskLosses {
  ad::Tensor emotion;  // MSE over B x 10
  ad::Tensor country;  // softmax cross-entropy, batch mean
  ad::Tensor age;      // MSE on standardized age

  std::array<ad::Tensor, kNumTasks> as_array() const { return {emotion, country, age}; }
};

TaskLosses task_losses(ad::Tape& tape, const net::MultiExitOutput& predictions, std::span<const double> emotions,
                       std::span<const int> countries, std::span<const double> ages,
                       const AgeStandardization& age_standardization);

TaskLosses task_losses(ad::Tape& tape, const net::MultiExitOutput& predictions, const data::Batch& batch,
                       const AgeStandardization& age_standardization);

}  // namespace mtlw::train
