#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mtlw/data/dataset.hpp"
#include "mtlw/metrics/metrics.hpp"
#include "mtlw/net/multi_exit_net.hpp"
#include "mtlw/train/trainer.hpp"

namespace mtlw::train {

struct GridTrial {
  net::ExitAssignment exits;
  std::string status = "ok";  // "ok" or the failure reason
  metrics::MetricsReport val;  // best validation report of the trial
  int best_epoch = 0;

  bool ok() const { return status == "ok"; }
};

struct GridSearchResult {
  // Successful trials by descending H-Mean, ties to the smaller assignment,
  // then failed trials in candidate order.
  std::vector<GridTrial> ranking;
  std::optional<net::ExitAssignment> best;
};

/// Every (age, country, emotion) triple over 1..5, lexicographic. With
/// ordered_only, only age <= country <= emotion.
std::vector<net::ExitAssignment> all_assignments(bool ordered_only = false);

/// Orders trials by the ranking contract above. Exposed for testing.
void rank_trials(std::vector<GridTrial>& trials);

using TrialCallback = std::function<void(const GridTrial&, std::size_t index, std::size_t total)>;

/// Trains one net per candidate, all from the same seed, and ranks them by
/// best validation H-Mean. A failing trial is recorded and skipped.
GridSearchResult grid_search_exits(const data::Dataset& dataset, const net::NetConfig& base_config,
                                   const TrainConfig& train_config,
                                   const std::vector<net::ExitAssignment>& candidates,
                                   const TrialCallback& on_trial = {});

}  // namespace mtlw::train
