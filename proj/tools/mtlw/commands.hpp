#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mtlw::tools {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitIo = 3,
  kExitNumerical = 4,
};

struct CommandOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;  // data dir for gen-data, run dir otherwise
  std::optional<std::uint64_t> seed;
  bool ordered_only = false;
  std::string split = "test";  // evaluate
  std::vector<std::filesystem::path> run_dirs;  // report
};

// Each command returns its exit code; errors are written to `err`.
int cmd_gen_data(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_train(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_grid_search(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_evaluate(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_report(const CommandOptions& opts, std::ostream& out, std::ostream& err);

inline constexpr const char* kGridCsvHeader = "age_exit,country_exit,emotion_exit,emo_ccc,cou_uar,age_mae,h_mean,status";

}  // namespace mtlw::tools
