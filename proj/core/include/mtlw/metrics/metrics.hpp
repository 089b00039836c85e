#pragma once

#include <cstddef>
#include <span>

#include <nlohmann/json.hpp>

namespace mtlw::metrics {

struct MetricsReport {
  double emo_ccc = 0.0;  // mean CCC over the emotion dimensions
  double cou_uar = 0.0;  // unweighted average recall over countries
  double age_mae = 0.0;  // years
  double h_mean = 0.0;

  bool operator==(const MetricsReport&) const = default;
};

// Concordance correlation coefficient with population (1/N) moments.
// Returns 0 when the denominator vanishes (both sequences constant and equal).
double ccc(std::span<const double> pred, std::span<const double> gold);

// Mean of per-column CCC over row-major [rows x dims] matrices.
double mean_ccc(std::span<const double> pred, std::span<const double> gold, std::size_t dims);

// Mean per-class recall. Every class must occur in gold.
double uar(std::span<const int> pred, std::span<const int> gold, int n_classes);

double mae(std::span<const double> pred, std::span<const double> gold);

// Harmonic mean of (CCC, UAR, 1/MAE): 3 / (1/ccc + 1/uar + mae).
// All three inputs must be strictly positive.
double hmean(double emo_ccc, double cou_uar, double age_mae);

// hmean for reports: 0 when CCC or UAR is not positive (the limit of the
// harmonic mean as either component approaches 0), otherwise hmean().
double report_hmean(double emo_ccc, double cou_uar, double age_mae);

MetricsReport make_report(double emo_ccc, double cou_uar, double age_mae);

nlohmann::json to_json(const MetricsReport& report);
MetricsReport report_from_json(const nlohmann::json& j);

}  // namespace mtlw::metrics
