#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtlw/metrics/metrics.hpp"
#include "mtlw/train/task_losses.hpp"

namespace mtlw::train {

struct EpochRecord {
  int epoch = 0;
  std::string status = "ok";  // "ok", or "nan_abort" for the diagnostic record
  std::array<double, kNumTasks> task_losses{};  // epoch means (emotion, country, age)
  std::array<double, kNumTasks> alphas{};       // after the epoch's last update
  std::array<double, kNumTasks> lambdas{};      // weights used during the epoch
  double restraint = 0.0;
  double total_loss = 0.0;  // epoch mean of the combined loss
  metrics::MetricsReport val;

  bool operator==(const EpochRecord&) const = default;
};

struct TrainingLog {
  std::vector<EpochRecord> records;

  bool operator==(const TrainingLog&) const = default;
};

std::string log_csv_header();
std::string log_csv_row(const EpochRecord& record);
void write_log_csv(const std::filesystem::path& path, const TrainingLog& log);

nlohmann::json to_json(const EpochRecord& record);

}  // namespace mtlw::train
