#include "mtlw/train/task_losses.hpp"

#include <cmath>
#include <vector>

#include "mtlw/autodiff/ops.hpp"
#include "mtlw/errors.hpp"

namespace mtlw::train {

std::string_view task_name(Task task) {
  switch (task) {
    case Task::kEmotion: return "emotion";
    case Task::kCountry: return "country";
    case Task::kAge: return "age";
  }
  return "?";
}

std::optional<Task> parse_task(std::string_view name) {
  for (Task t : {Task::kEmotion, Task::kCountry, Task::kAge}) {
    if (task_name(t) == name) return t;
  }
  return std::nullopt;
}

AgeStandardization AgeStandardization::from_dataset(const data::Dataset& dataset) {
  const auto& idx = dataset.indices(data::Split::kTrain);
  if (idx.empty()) throw StructuralError("age standardization: empty train split");
  double mean = 0.0;
  for (std::size_t i : idx) mean += dataset.sample(i).age;
  mean /= static_cast<double>(idx.size());
  double var = 0.0;
  for (std::size_t i : idx) {
    const double d = dataset.sample(i).age - mean;
    var += d * d;
  }
  var /= static_cast<double>(idx.size());
  const double sd = std::sqrt(var);
  return {mean, sd > 0.0 ? sd : 1.0};
}

TaskLosses task_losses(ad::Tape& tape, const net::MultiExitOutput& predictions, std::span<const double> emotions,
                       std::span<const int> countries, std::span<const double> ages,
                       const AgeStandardization& age_standardization) {
  const ad::Tensor& emo = predictions.emotion;
  const ad::Tensor& cou = predictions.country_logits;
  const ad::Tensor& age = predictions.age;
  const std::size_t b = emo.dim(0);
  if (emo.shape() != ad::Shape{b, net::kEmotionDims} || emotions.size() != emo.size()) {
    throw StructuralError("task_losses: emotion predictions " + ad::shape_to_string(emo.shape()) + " vs " +
                          std::to_string(emotions.size()) + " targets");
  }
  if (cou.shape() != ad::Shape{b, net::kNumCountries} || countries.size() != b) {
    throw StructuralError("task_losses: country logits " + ad::shape_to_string(cou.shape()) + " vs " +
                          std::to_string(countries.size()) + " labels");
  }
  if (age.shape() != ad::Shape{b, 1} || ages.size() != b) {
    throw StructuralError("task_losses: age predictions " + ad::shape_to_string(age.shape()) + " vs " +
                          std::to_string(ages.size()) + " targets");
  }

  const ad::Tensor emo_target = ad::Tensor::from(emo.shape(), std::vector<double>(emotions.begin(), emotions.end()));
  std::vector<double> z(b);
  for (std::size_t i = 0; i < b; ++i) z[i] = age_standardization.standardize(ages[i]);
  const ad::Tensor age_target = ad::Tensor::from({b, 1}, std::move(z));

  TaskLosses out;
  out.emotion = ad::mean(tape, ad::square(tape, ad::sub(tape, emo, emo_target)));
  out.country = ad::softmax_cross_entropy(tape, cou, countries);
  out.age = ad::mean(tape, ad::square(tape, ad::sub(tape, age, age_target)));
  return out;
}

TaskLosses task_losses(ad::Tape& tape, const net::MultiExitOutput& predictions, const data::Batch& batch,
                       const AgeStandardization& age_standardization) {
  return task_losses(tape, predictions, batch.emotions, batch.countries, batch.ages, age_standardization);
}

}  // namespace mtlw::train
