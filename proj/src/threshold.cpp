#include "weep/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "weep/csv.hpp"
#include "weep/types.hpp"

namespace weep {
namespace {

void check_inputs(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw ValidationError("scores and labels differ in length (" + std::to_string(scores.size()) +
                          " vs " + std::to_string(labels.size()) + ")");
  }
  if (scores.empty()) throw ValidationError("threshold calibration needs at least one score");
  std::size_t positives = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) throw ValidationError("scores must be finite");
    if (labels[i] != 0 && labels[i] != 1) {
      throw ValidationError("label " + std::to_string(labels[i]) + " not in {0,1}");
    }
    positives += static_cast<std::size_t>(labels[i]);
  }
  if (positives == 0 || positives == scores.size()) {
    throw ValidationError("threshold calibration needs both classes present");
  }
}

}  // namespace

std::vector<RocPoint> roc_points(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels);

  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  double total_pos = 0.0;
  double total_neg = 0.0;
  for (const int label : labels) (label == 1 ? total_pos : total_neg) += 1.0;

  // Sweep thresholds descending; at threshold t every score >= t is called
  // positive, so tp/fp accumulate over whole groups of tied scores.
  std::vector<RocPoint> points;
  double tp = 0.0;
  double fp = 0.0;
  std::size_t i = 0;
  while (i < n) {
    const double t = scores[order[i]];
    while (i < n && scores[order[i]] == t) {
      (labels[order[i]] == 1 ? tp : fp) += 1.0;
      ++i;
    }
    points.push_back({t, tp / total_pos, (total_neg - fp) / total_neg});
  }
  return points;
}

DecisionThreshold youden_threshold(std::span<const double> scores, std::span<const int> labels) {
  const auto points = roc_points(scores, labels);
  const RocPoint* best = &points.front();
  for (const RocPoint& point : points) {
    if (point.j() > best->j() ||
        (point.j() == best->j() && point.sensitivity > best->sensitivity) ||
        (point.j() == best->j() && point.sensitivity == best->sensitivity &&
         point.threshold < best->threshold)) {
      best = &point;
    }
  }
  return {best->threshold, best->sensitivity, best->specificity, best->j()};
}

std::string serialize_roc(const std::vector<RocPoint>& points) {
  std::string out = "threshold,sensitivity,specificity,j\n";
  for (const auto& point : points) {
    out += csv::format_double(point.threshold);
    out += ',';
    out += csv::format_double(point.sensitivity);
    out += ',';
    out += csv::format_double(point.specificity);
    out += ',';
    out += csv::format_double(point.j());
    out += '\n';
  }
  return out;
}

std::string serialize_threshold(const DecisionThreshold& threshold) {
  std::string out = "value,sensitivity,specificity,j\n";
  out += csv::format_double(threshold.value);
  out += ',';
  out += csv::format_double(threshold.sensitivity);
  out += ',';
  out += csv::format_double(threshold.specificity);
  out += ',';
  out += csv::format_double(threshold.j);
  out += '\n';
  return out;
}

DecisionThreshold parse_threshold_csv(std::string_view text) {
  const auto lines = csv::split_lines(text);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    rows.push_back(csv::split_fields(lines[i]));
    if (rows.size() > 2) throw ValidationError(i + 1, "expected a single data row");
  }
  if (rows.empty() || csv::join_fields(rows[0]) != "value,sensitivity,specificity,j") {
    throw ValidationError("bad header, expected 'value,sensitivity,specificity,j'");
  }
  if (rows.size() != 2 || rows[1].size() != 4) {
    throw ValidationError("expected a single data row with 4 fields");
  }
  DecisionThreshold out;
  const auto value = csv::parse_double(rows[1][0]);
  const auto sens = csv::parse_double(rows[1][1]);
  const auto spec = csv::parse_double(rows[1][2]);
  const auto j = csv::parse_double(rows[1][3]);
  if (!value || !sens || !spec || !j || !std::isfinite(*value)) {
    throw ValidationError("non-numeric threshold row");
  }
  out.value = *value;
  out.sensitivity = *sens;
  out.specificity = *spec;
  out.j = *j;
  return out;
}

}  // namespace weep
