#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "weep/weep.hpp"

namespace weep {

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
};

struct CohortSummary {
  std::size_t n_slides = 0;
  double mean_percent = 0.0;
  double ci_low = 0.0;  // mean - 1.96 * s / sqrt(m), s = sample standard deviation
  double ci_high = 0.0;
  std::vector<HistogramBin> histogram;
};

// Which slides enter the cohort statistics.
enum class CohortFilter {
  All,
  PredictedPositive,  // initial_p >= threshold
  LabelPositive,
  LabelPositiveAndPredictedPositive,
};

// "all" | "predicted-positive" | "label-positive" |
// "label-positive-and-predicted-positive"
CohortFilter parse_cohort_filter(std::string_view name);
std::string cohort_filter_name(CohortFilter filter);

// Label-based filters need `labels`; pass nullptr when no label table exists
// and those filters become an error. A filtered slide missing from `labels`
// is an error too.
std::vector<WeepResult> filter_cohort(const std::vector<WeepResult>& results,
                                      const std::map<std::string, int>* labels,
                                      CohortFilter filter);

// Histogram of percent_selected values over [0,100]. Bins are
// [lo, lo+width) except the last, which closes at 100 inclusive.
std::vector<HistogramBin> percent_histogram(const std::vector<double>& percents, double bin_width);

// Mean percent_selected with a normal-approximation 95% confidence interval
// (needs at least two results). Invariant to result order.
CohortSummary summarize(const std::vector<WeepResult>& results, double bin_width = 5.0);

std::string serialize_cohort_summary(const CohortSummary& summary);  // summary.csv
std::string serialize_histogram(const std::vector<HistogramBin>& bins);  // histogram.csv
std::vector<HistogramBin> parse_histogram_csv(std::string_view text);

}  // namespace weep
