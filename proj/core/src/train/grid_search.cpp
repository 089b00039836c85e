#include "mtlw/train/grid_search.hpp"

#include <algorithm>
#include <exception>

#include "mtlw/errors.hpp"

namespace mtlw::train {

std::vector<net::ExitAssignment> all_assignments(bool ordered_only) {
  std::vector<net::ExitAssignment> out;
  for (int a = 1; a <= net::kNumBlocks; ++a) {
    for (int c = 1; c <= net::kNumBlocks; ++c) {
      for (int e = 1; e <= net::kNumBlocks; ++e) {
        if (ordered_only && !(a <= c && c <= e)) continue;
        out.push_back({a, c, e});
      }
    }
  }
  return out;
}

void rank_trials(std::vector<GridTrial>& trials) {
  std::stable_sort(trials.begin(), trials.end(), [](const GridTrial& x, const GridTrial& y) {
    if (x.ok() != y.ok()) return x.ok();
    if (!x.ok()) return false;
    if (x.val.h_mean != y.val.h_mean) return x.val.h_mean > y.val.h_mean;
    return x.exits < y.exits;
  });
}

GridSearchResult grid_search_exits(const data::Dataset& dataset, const net::NetConfig& base_config,
                                   const TrainConfig& train_config,
                                   const std::vector<net::ExitAssignment>& candidates,
                                   const TrialCallback& on_trial) {
  if (candidates.empty()) throw StructuralError("grid search: no candidate assignments");
  train_config.validate();

  std::vector<GridTrial> trials;
  trials.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    GridTrial trial;
    trial.exits = candidates[i];
    try {
      net::NetConfig nc = base_config;
      nc.exits = candidates[i];
      nc.validate();
      net::MultiExitNet model(nc, train_config.seed);
      const TrainResult r = train(model, dataset, train_config);
      trial.val = r.best_val;
      trial.best_epoch = r.best_epoch;
    } catch (const NumericalAbort& e) {
      trial.status = std::string("nan_abort: ") + e.what();
    } catch (const std::exception& e) {
      trial.status = std::string("error: ") + e.what();
    }
    if (on_trial) on_trial(trial, i, candidates.size());
    trials.push_back(std::move(trial));
  }

  GridSearchResult result;
  rank_trials(trials);
  result.ranking = std::move(trials);
  if (!result.ranking.empty() && result.ranking.front().ok()) result.best = result.ranking.front().exits;
  return result;
}

}  // namespace mtlw::train
