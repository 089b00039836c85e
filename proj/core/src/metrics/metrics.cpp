#include "mtlw/metrics/metrics.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "mtlw/errors.hpp"

namespace mtlw::metrics {

double ccc(std::span<const double> pred, std::span<const double> gold) {
  if (pred.size() != gold.size()) {
    throw StructuralError("ccc: length mismatch " + std::to_string(pred.size()) + " vs " + std::to_string(gold.size()));
  }
  if (pred.size() < 2) throw StructuralError("ccc: need at least two samples");

  const double n = static_cast<double>(pred.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    mx += pred[i];
    my += gold[i];
  }
  mx /= n;
  my /= n;

  double vx = 0.0, vy = 0.0, cov = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double dx = pred[i] - mx;
    const double dy = gold[i] - my;
    vx += dx * dx;
    vy += dy * dy;
    cov += dx * dy;
  }
  vx /= n;
  vy /= n;
  cov /= n;

  const double denom = vx + vy + (mx - my) * (mx - my);
  if (denom == 0.0) return 0.0;
  return 2.0 * cov / denom;
}

double mean_ccc(std::span<const double> pred, std::span<const double> gold, std::size_t dims) {
  if (dims == 0 || pred.size() != gold.size() || pred.size() % dims != 0) {
    throw StructuralError("mean_ccc: shape mismatch");
  }
  const std::size_t rows = pred.size() / dims;
  std::vector<double> x(rows), y(rows);
  double total = 0.0;
  for (std::size_t d = 0; d < dims; ++d) {
    for (std::size_t r = 0; r < rows; ++r) {
      x[r] = pred[r * dims + d];
      y[r] = gold[r * dims + d];
    }
    total += ccc(x, y);
  }
  return total / static_cast<double>(dims);
}

double uar(std::span<const int> pred, std::span<const int> gold, int n_classes) {
  if (pred.size() != gold.size()) throw StructuralError("uar: length mismatch");
  if (n_classes < 1) throw StructuralError("uar: n_classes must be positive");
  std::vector<std::size_t> hits(n_classes, 0), totals(n_classes, 0);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] < 0 || gold[i] >= n_classes || pred[i] < 0 || pred[i] >= n_classes) {
      throw DomainError("uar: label out of range at index " + std::to_string(i));
    }
    ++totals[gold[i]];
    if (pred[i] == gold[i]) ++hits[gold[i]];
  }
  double total = 0.0;
  for (int c = 0; c < n_classes; ++c) {
    if (totals[c] == 0) throw DomainError("uar: class " + std::to_string(c) + " absent from gold labels");
    total += static_cast<double>(hits[c]) / static_cast<double>(totals[c]);
  }
  return total / static_cast<double>(n_classes);
}

double mae(std::span<const double> pred, std::span<const double> gold) {
  if (pred.size() != gold.size()) throw StructuralError("mae: length mismatch");
  if (pred.empty()) throw StructuralError("mae: empty input");
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) total += std::fabs(pred[i] - gold[i]);
  return total / static_cast<double>(pred.size());
}

double hmean(double emo_ccc, double cou_uar, double age_mae) {
  if (!(emo_ccc > 0.0) || !(cou_uar > 0.0) || !(age_mae > 0.0)) {
    throw DomainError("hmean: inputs must be positive (ccc=" + std::to_string(emo_ccc) +
                      ", uar=" + std::to_string(cou_uar) + ", mae=" + std::to_string(age_mae) + ")");
  }
  return 3.0 / (1.0 / emo_ccc + 1.0 / cou_uar + age_mae);
}

double report_hmean(double emo_ccc, double cou_uar, double age_mae) {
  if (!(emo_ccc > 0.0) || !(cou_uar > 0.0)) return 0.0;
  if (age_mae == 0.0) return 3.0 / (1.0 / emo_ccc + 1.0 / cou_uar);
  return hmean(emo_ccc, cou_uar, age_mae);
}

MetricsReport make_report(double emo_ccc, double cou_uar, double age_mae) {
  return {emo_ccc, cou_uar, age_mae, report_hmean(emo_ccc, cou_uar, age_mae)};
}

nlohmann::json to_json(const MetricsReport& r) {
  return {{"emo_ccc", r.emo_ccc}, {"cou_uar", r.cou_uar}, {"age_mae", r.age_mae}, {"h_mean", r.h_mean}};
}

MetricsReport report_from_json(const nlohmann::json& j) {
  return {j.at("emo_ccc").get<double>(), j.at("cou_uar").get<double>(), j.at("age_mae").get<double>(),
          j.at("h_mean").get<double>()};
}

}  // namespace mtlw::metrics
