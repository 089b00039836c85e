#include "mtlw/weighting/loss_weighting.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "mtlw/autodiff/ops.hpp"
#include "mtlw/errors.hpp"

namespace mtlw::weighting {

namespace {

void check_tasks(std::span<const ad::Tensor> losses, const UncertaintyParams& params) {
  if (losses.empty()) throw StructuralError("at least one task loss is required");
  if (losses.size() != params.size()) {
    throw StructuralError("got " + std::to_string(losses.size()) + " task losses for " +
                          std::to_string(params.size()) + " uncertainty parameters");
  }
  for (const ad::Tensor& l : losses) {
    if (!l.is_scalar()) throw StructuralError("task losses must be scalars");
  }
}

ad::Tensor sum_all(ad::Tape& tape, const std::vector<ad::Tensor>& terms) {
  ad::Tensor total = terms.front();
  for (std::size_t k = 1; k < terms.size(); ++k) total = ad::add(tape, total, terms[k]);
  return total;
}

// sum_k exp(-s_k) L_k
ad::Tensor precision_weighted(ad::Tape& tape, std::span<const ad::Tensor> losses, const UncertaintyParams& params) {
  std::vector<ad::Tensor> terms;
  for (std::size_t k = 0; k < losses.size(); ++k) {
    terms.push_back(ad::mul(tape, ad::exp(tape, ad::negate(tape, params.s(k))), losses[k]));
  }
  return sum_all(tape, terms);
}

// sum_k log(max(1 + s_k, eps))
ad::Tensor revised_regularizer(ad::Tape& tape, const UncertaintyParams& params, double clamp_epsilon) {
  const ad::Tensor one = ad::Tensor::scalar(1.0);
  std::vector<ad::Tensor> terms;
  for (std::size_t k = 0; k < params.size(); ++k) {
    terms.push_back(ad::log(tape, ad::clamp_min(tape, ad::add(tape, one, params.s(k)), clamp_epsilon)));
  }
  return sum_all(tape, terms);
}

std::vector<double> ones(std::size_t n) { return std::vector<double>(n, 1.0); }

}  // namespace

std::string_view strategy_name(Strategy strategy) {
  switch (strategy) {
    case Strategy::kEW: return "EW";
    case Strategy::kUW: return "UW";
    case Strategy::kRUW: return "RUW";
    case Strategy::kRRUW: return "RRUW";
    case Strategy::kDWA: return "DWA";
    case Strategy::kDRUW: return "DRUW";
  }
  return "?";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
  for (Strategy s : kAllStrategies) {
    if (strategy_name(s) == upper) return s;
  }
  return std::nullopt;
}

std::string valid_strategy_names() { return "EW|UW|RUW|RRUW|DWA|DRUW"; }

bool uses_uncertainty(Strategy s) {
  return s == Strategy::kUW || s == Strategy::kRUW || s == Strategy::kRRUW || s == Strategy::kDRUW;
}
bool uses_dwa(Strategy s) { return s == Strategy::kDWA || s == Strategy::kDRUW; }
bool uses_restraint(Strategy s) { return s == Strategy::kRRUW || s == Strategy::kDRUW; }

void WeightingConfig::validate() const {
  // A singleton task set is only meaningful for equal weighting (single-task runs).
  if (num_tasks < 2 && !(num_tasks == 1 && strategy == Strategy::kEW)) {
    throw ConfigError("num_tasks", "must be >= 2 for " + std::string(strategy_name(strategy)));
  }
  if (!(restraint_target >= 0.0)) throw ConfigError("restraint_target", "must be >= 0");
  if (!(temperature > 0.0)) throw ConfigError("temperature", "must be > 0");
  if (!(clamp_epsilon > 0.0)) throw ConfigError("clamp_epsilon", "must be > 0");
}

// ---------------------------------------------------------------------------

UncertaintyParams::UncertaintyParams(std::size_t num_tasks, double initial_s) {
  for (std::size_t k = 0; k < num_tasks; ++k) s_.push_back(ad::Tensor::scalar(initial_s, true));
}

UncertaintyParams UncertaintyParams::from_log_variances(std::span<const double> s) {
  UncertaintyParams p(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) p.s_[k].mutable_values()[0] = s[k];
  return p;
}

UncertaintyParams UncertaintyParams::from_alphas(std::span<const double> alphas) {
  std::vector<double> s;
  for (double a : alphas) {
    if (!(a > 0.0)) throw DomainError("alpha must be positive");
    s.push_back(2.0 * std::log(a));
  }
  return from_log_variances(s);
}

double UncertaintyParams::alpha(std::size_t k) const { return std::exp(0.5 * log_variance(k)); }

std::vector<double> UncertaintyParams::alphas() const {
  std::vector<double> out;
  for (std::size_t k = 0; k < size(); ++k) out.push_back(alpha(k));
  return out;
}

std::vector<double> LossHistory::ratios() const {
  if (!complete()) throw StructuralError("loss history needs two previous epochs");
  if (prev->size() != prev2->size()) throw StructuralError("loss history length mismatch");
  std::vector<double> r(prev->size());
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (!((*prev)[k] > 0.0) || !((*prev2)[k] > 0.0)) {
      throw DomainError("loss history entries must be positive (task " + std::to_string(k) + ")");
    }
    r[k] = (*prev)[k] / (*prev2)[k];
  }
  return r;
}

// ---------------------------------------------------------------------------

ad::Tensor combine_ew(ad::Tape& tape, std::span<const ad::Tensor> losses) {
  if (losses.empty()) throw StructuralError("combine_ew: at least one task loss is required");
  return sum_all(tape, std::vector<ad::Tensor>(losses.begin(), losses.end()));
}

ad::Tensor combine_uw(ad::Tape& tape, std::span<const ad::Tensor> losses, const UncertaintyParams& params) {
  check_tasks(losses, params);
  std::vector<ad::Tensor> logs;
  for (std::size_t k = 0; k < params.size(); ++k) logs.push_back(ad::scale(tape, params.s(k), 0.5));
  return ad::add(tape, precision_weighted(tape, losses, params), sum_all(tape, logs));
}

ad::Tensor combine_ruw(ad::Tape& tape, std::span<const ad::Tensor> losses, const UncertaintyParams& params,
                       double clamp_epsilon) {
  check_tasks(losses, params);
  return ad::add(tape, precision_weighted(tape, losses, params), revised_regularizer(tape, params, clamp_epsilon));
}

ad::Tensor restraint_term(ad::Tape& tape, const UncertaintyParams& params, double phi) {
  if (params.size() == 0) throw StructuralError("restraint_term: no uncertainty parameters");
  std::vector<ad::Tensor> magnitudes;
  for (std::size_t k = 0; k < params.size(); ++k) {
    magnitudes.push_back(ad::abs(tape, ad::scale(tape, params.s(k), 0.5)));
  }
  return ad::abs(tape, ad::sub(tape, ad::Tensor::scalar(phi), sum_all(tape, magnitudes)));
}

ad::Tensor combine_rruw(ad::Tape& tape, std::span<const ad::Tensor> losses, const UncertaintyParams& params,
                        double phi, double clamp_epsilon) {
  return ad::add(tape, combine_ruw(tape, losses, params, clamp_epsilon), restraint_term(tape, params, phi));
}

std::vector<double> dwa_weights(const LossHistory& history, double temperature, std::size_t num_tasks) {
  if (!(temperature > 0.0)) throw DomainError("dwa_weights: temperature must be positive");
  if (!history.complete()) return ones(num_tasks);
  const std::vector<double> r = history.ratios();
  if (r.size() != num_tasks) {
    throw StructuralError("dwa_weights: history has " + std::to_string(r.size()) + " tasks, expected " +
                          std::to_string(num_tasks));
  }
  const double top = *std::max_element(r.begin(), r.end()) / temperature;
  std::vector<double> e(r.size());
  double z = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    e[k] = std::exp(r[k] / temperature - top);
    z += e[k];
  }
  const double scale = static_cast<double>(num_tasks) / z;
  for (double& v : e) v *= scale;
  return e;
}

ad::Tensor combine_dwa(ad::Tape& tape, std::span<const ad::Tensor> losses, std::span<const double> lambdas) {
  if (losses.empty() || lambdas.size() != losses.size()) {
    throw StructuralError("combine_dwa: need one weight per task loss");
  }
  std::vector<ad::Tensor> terms;
  for (std::size_t k = 0; k < losses.size(); ++k) terms.push_back(ad::scale(tape, losses[k], lambdas[k]));
  return sum_all(tape, terms);
}

ad::Tensor combine_dwa(ad::Tape& tape, std::span<const ad::Tensor> losses, const LossHistory& history,
                       double temperature) {
  const std::vector<double> lambdas = dwa_weights(history, temperature, losses.size());
  return combine_dwa(tape, losses, lambdas);
}

ad::Tensor combine_druw(ad::Tape& tape, std::span<const ad::Tensor> losses, const UncertaintyParams& params,
                        const LossHistory& history, const WeightingConfig& config) {
  check_tasks(losses, params);
  const std::vector<double> lambdas = dwa_weights(history, config.temperature, losses.size());

  // sum_k (lambda_k L_k + exp(-s_k) L_k)
  std::vector<ad::Tensor> terms;
  for (std::size_t k = 0; k < losses.size(); ++k) {
    const ad::Tensor precision = ad::exp(tape, ad::negate(tape, params.s(k)));
    terms.push_back(ad::add(tape, ad::scale(tape, losses[k], lambdas[k]), ad::mul(tape, precision, losses[k])));
  }
  const ad::Tensor weighted = sum_all(tape, terms);
  const ad::Tensor regularized = ad::add(tape, weighted, revised_regularizer(tape, params, config.clamp_epsilon));
  return ad::add(tape, regularized, restraint_term(tape, params, config.restraint_target));
}

LossHistory update_history(const LossHistory& history, std::span<const double> epoch_mean_losses) {
  for (std::size_t k = 0; k < epoch_mean_losses.size(); ++k) {
    const double v = epoch_mean_losses[k];
    if (!std::isfinite(v) || !(v > 0.0)) {
      throw DomainError("update_history: epoch loss for task " + std::to_string(k) + " must be finite and > 0, got " +
                        std::to_string(v));
    }
  }
  LossHistory next;
  next.prev2 = history.prev;
  next.prev = std::vector<double>(epoch_mean_losses.begin(), epoch_mean_losses.end());
  next.epoch_index = history.epoch_index + 1;
  return next;
}

double restraint_value(const UncertaintyParams& params, double phi) {
  double total = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) total += std::fabs(params.log_alpha(k));
  return std::fabs(phi - total);
}

// ---------------------------------------------------------------------------

WeightingState::WeightingState(WeightingConfig config) : config_(config), params_(config.num_tasks) {
  config_.validate();
}

std::vector<ad::Tensor> WeightingState::trainable() const {
  if (!uses_uncertainty(config_.strategy)) return {};
  const auto t = params_.tensors();
  return {t.begin(), t.end()};
}

std::vector<double> WeightingState::lambdas() const {
  if (!uses_dwa(config_.strategy)) return ones(config_.num_tasks);
  return dwa_weights(history_, config_.temperature, config_.num_tasks);
}

std::vector<double> WeightingState::alphas() const {
  if (!uses_uncertainty(config_.strategy)) return ones(config_.num_tasks);
  return params_.alphas();
}

double WeightingState::restraint() const {
  if (!uses_restraint(config_.strategy)) return 0.0;
  return restraint_value(params_, config_.restraint_target);
}

ad::Tensor WeightingState::combine(ad::Tape& tape, std::span<const ad::Tensor> losses) const {
  switch (config_.strategy) {
    case Strategy::kEW: return combine_ew(tape, losses);
    case Strategy::kUW: return combine_uw(tape, losses, params_);
    case Strategy::kRUW: return combine_ruw(tape, losses, params_, config_.clamp_epsilon);
    case Strategy::kRRUW:
      return combine_rruw(tape, losses, params_, config_.restraint_target, config_.clamp_epsilon);
    case Strategy::kDWA: return combine_dwa(tape, losses, history_, config_.temperature);
    case Strategy::kDRUW: return combine_druw(tape, losses, params_, history_, config_);
  }
  throw StructuralError("unknown weighting strategy");
}

void WeightingState::end_epoch(std::span<const double> epoch_mean_losses) {
  if (epoch_mean_losses.size() != config_.num_tasks) {
    throw StructuralError("end_epoch: expected " + std::to_string(config_.num_tasks) + " task losses");
  }
  history_ = update_history(history_, epoch_mean_losses);
}

}  // namespace mtlw::weighting
