#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mtlw/autodiff/tape.hpp"
#include "mtlw/autodiff/tensor.hpp"

// Loss-combination strategies for K task losses.
//
//   EW    sum_k L_k
//   UW    sum_k L_k / a_k^2 + sum_k log a_k
//   RUW   sum_k L_k / a_k^2 + sum_k log(1 + log a_k^2)
//   RRUW  RUW + |phi - sum_k |log a_k||
//   DWA   sum_k lambda_k L_k,  lambda = K softmax(r / T),  r_k = L_k(t-1) / L_k(t-2)
//   DRUW  sum_k (lambda_k + 1/a_k^2) L_k + sum_k log(1 + log a_k^2) + |phi - sum_k |log a_k||
//
// The uncertainty scales are stored as s_k = log a_k^2, so a_k = exp(s_k / 2)
// is positive for every s_k and log a_k = s_k / 2 exactly. The argument of the
// outer log in the RUW regularizer is floored at clamp_epsilon.
namespace mtlw::weighting {

enum class Strategy { kEW, kUW, kRUW, kRRUW, kDWA, kDRUW };

inline constexpr Strategy kAllStrategies[] = {Strategy::kEW,   Strategy::kUW,  Strategy::kRUW,
                                              Strategy::kRRUW, Strategy::kDWA, Strategy::kDRUW};

std::string_view strategy_name(Strategy strategy);
// Case-insensitive; nullopt for unknown names.
std::optional<Strategy> parse_strategy(std::string_view name);
std::string valid_strategy_names();

bool uses_uncertainty(Strategy strategy);
bool uses_dwa(Strategy strategy);
bool uses_restraint(Strategy strategy);

struct WeightingConfig {
  Strategy strategy = Strategy::kDRUW;
  std::size_t num_tasks = 3;
  double restraint_target = 1.0;  // phi
  double temperature = 10.0;      // T
  double clamp_epsilon = 1e-6;

  void validate() const;
};

/// Trainable log-variances s_k = log a_k^2, one scalar leaf tensor per task.
class UncertaintyParams {
 public:
  explicit UncertaintyParams(std::size_t num_tasks, double initial_s = 0.0);
  static UncertaintyParams from_log_variances(std::span<const double> s);
  static UncertaintyParams from_alphas(std::span<const double> alphas);

  std::size_t size() const noexcept { return s_.size(); }
  const ad::Tensor& s(std::size_t k) const { return s_.at(k); }
  std::span<const ad::Tensor> tensors() const noexcept { return s_; }
  std::vector<ad::Tensor>& tensors() noexcept { return s_; }

  double log_variance(std::size_t k) const { return s_.at(k).item(); }
  double alpha(std::size_t k) const;
  double log_alpha(std::size_t k) const { return 0.5 * log_variance(k); }
  std::vector<double> alphas() const;

 private:
  std::vector<ad::Tensor> s_;
};

/// Epoch-mean task losses from the two previous epochs.
struct LossHistory {
  std::optional<std::vector<double>> prev;   // L(t-1)
  std::optional<std::vector<double>> prev2;  // L(t-2)
  int epoch_index = 1;                       // t, the epoch about to run

  bool complete() const { return prev.has_value() && prev2.has_value(); }
  // r_k = prev_k / prev2_k; requires complete().
  std::vector<double> ratios() const;
};

ad::Tensor combine_ew(ad::Tape& tape, std::span<const ad::Tensor> losses);
ad::Tensor combine_uw(ad::Tape& tape, std::span<const ad::Tensor> losses, const UncertaintyParams& params);
ad::Tensor combine_ruw(ad::Tape& tape, std::span<const ad::Tensor> losses, const UncertaintyParams& params,
                       double clamp_epsilon = 1e-6);
ad::Tensor restraint_term(ad::Tape& tape, const UncertaintyParams& params, double phi);
ad::Tensor combine_rruw(ad::Tape& tape, std::span<const ad::Tensor> losses, const UncertaintyParams& params,
                        double phi, double clamp_epsilon = 1e-6);

// lambda_k = K exp(r_k / T) / sum_i exp(r_i / T); all ones until the history
// holds two epochs. Throws DomainError on nonpositive history entries or T <= 0.
std::vector<double> dwa_weights(const LossHistory& history, double temperature, std::size_t num_tasks);

// sum_k lambda_k L_k with lambda held constant.
ad::Tensor combine_dwa(ad::Tape& tape, std::span<const ad::Tensor> losses, const LossHistory& history,
                       double temperature);
ad::Tensor combine_dwa(ad::Tape& tape, std::span<const ad::Tensor> losses, std::span<const double> lambdas);

ad::Tensor combine_druw(ad::Tape& tape, std::span<const ad::Tensor> losses, const UncertaintyParams& params,
                        const LossHistory& history, const WeightingConfig& config);

LossHistory update_history(const LossHistory& history, std::span<const double> epoch_mean_losses);

// |phi - sum_k |log a_k||, evaluated without a tape.
double restraint_value(const UncertaintyParams& params, double phi);

/// Everything a trainer needs to weight its task losses: the strategy, the
/// trainable uncertainty scales and the DWA loss history.
class WeightingState {
 public:
  explicit WeightingState(WeightingConfig config);

  const WeightingConfig& config() const noexcept { return config_; }
  const UncertaintyParams& params() const noexcept { return params_; }
  UncertaintyParams& params() noexcept { return params_; }
  const LossHistory& history() const noexcept { return history_; }

  // Tensors the optimizer should update; empty for EW and DWA.
  std::vector<ad::Tensor> trainable() const;

  // lambda for the current epoch (ones for strategies without DWA).
  std::vector<double> lambdas() const;
  // a_k (ones for strategies without uncertainty scales).
  std::vector<double> alphas() const;
  // Restraint value for RRUW/DRUW, 0 otherwise.
  double restraint() const;

  ad::Tensor combine(ad::Tape& tape, std::span<const ad::Tensor> losses) const;

  void end_epoch(std::span<const double> epoch_mean_losses);

 private:
  WeightingConfig config_;
  UncertaintyParams params_;
  LossHistory history_;
};

}  // namespace mtlw::weighting
