#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace weep {

struct RocPoint {
  double threshold = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;

  double j() const { return sensitivity + specificity - 1.0; }
};

// ROC operating points under the decision rule "positive iff score >= t",
// one per distinct observed score, ordered by threshold descending. Labels
// must be 0/1 and both classes must be present.
std::vector<RocPoint> roc_points(std::span<const double> scores, std::span<const int> labels);

struct DecisionThreshold {
  double value = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double j = 0.0;  // sensitivity + specificity - 1
};

// Operating point maximizing Youden's J over the distinct observed scores.
// Ties resolve to the higher sensitivity, then to the smaller threshold.
DecisionThreshold youden_threshold(std::span<const double> scores, std::span<const int> labels);

// roc.csv: threshold,sensitivity,specificity,j
std::string serialize_roc(const std::vector<RocPoint>& points);

// threshold.csv: value,sensitivity,specificity,j (single data row)
std::string serialize_threshold(const DecisionThreshold& threshold);
DecisionThreshold parse_threshold_csv(std::string_view text);

}  // namespace weep
