#include "mtlw/train/training_log.hpp"

#include <charconv>
#include <fstream>

#include "mtlw/errors.hpp"

namespace mtlw::train {

namespace {

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string log_csv_header() {
  std::string h = "epoch,status";
  for (const char* what : {"loss", "alpha", "lambda"}) {
    for (Task t : {Task::kEmotion, Task::kCountry, Task::kAge}) {
      h += ",";
      h += what;
      h += "_";
      h += task_name(t);
    }
  }
  return h + ",restraint,total_loss,val_emo_ccc,val_cou_uar,val_age_mae,val_h_mean";
}

std::string log_csv_row(const EpochRecord& r) {
  std::string row = std::to_string(r.epoch) + "," + r.status;
  for (const auto* arr : {&r.task_losses, &r.alphas, &r.lambdas}) {
    for (double v : *arr) row += "," + num(v);
  }
  row += "," + num(r.restraint) + "," + num(r.total_loss);
  row += "," + num(r.val.emo_ccc) + "," + num(r.val.cou_uar) + "," + num(r.val.age_mae) + "," + num(r.val.h_mean);
  return row;
}

void write_log_csv(const std::filesystem::path& path, const TrainingLog& log) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << log_csv_header() << '\n';
  for (const EpochRecord& r : log.records) out << log_csv_row(r) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

nlohmann::json to_json(const EpochRecord& r) {
  return {{"epoch", r.epoch},          {"status", r.status},       {"task_losses", r.task_losses},
          {"alphas", r.alphas},        {"lambdas", r.lambdas},     {"restraint", r.restraint},
          {"total_loss", r.total_loss}, {"val", metrics::to_json(r.val)}};
}

}  // namespace mtlw::train
