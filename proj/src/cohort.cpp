#include "weep/cohort.hpp"

#include <algorithm>
#include <cmath>

#include "weep/csv.hpp"

namespace weep {

CohortFilter parse_cohort_filter(std::string_view name) {
  if (name == "all") return CohortFilter::All;
  if (name == "predicted-positive") return CohortFilter::PredictedPositive;
  if (name == "label-positive") return CohortFilter::LabelPositive;
  if (name == "label-positive-and-predicted-positive") {
    return CohortFilter::LabelPositiveAndPredictedPositive;
  }
  throw ValidationError("unknown cohort filter '" + std::string(name) +
                        "' (expected all, predicted-positive, label-positive, or "
                        "label-positive-and-predicted-positive)");
}

std::string cohort_filter_name(CohortFilter filter) {
  switch (filter) {
    case CohortFilter::All:
      return "all";
    case CohortFilter::PredictedPositive:
      return "predicted-positive";
    case CohortFilter::LabelPositive:
      return "label-positive";
    case CohortFilter::LabelPositiveAndPredictedPositive:
      return "label-positive-and-predicted-positive";
  }
  return "unknown";
}

std::vector<WeepResult> filter_cohort(const std::vector<WeepResult>& results,
                                      const std::map<std::string, int>* labels,
                                      CohortFilter filter) {
  const bool needs_labels = filter == CohortFilter::LabelPositive ||
                            filter == CohortFilter::LabelPositiveAndPredictedPositive;
  if (needs_labels && labels == nullptr) {
    throw ValidationError("filter '" + cohort_filter_name(filter) + "' requires a label table");
  }

  std::vector<WeepResult> out;
  for (const auto& result : results) {
    if (needs_labels) {
      const auto it = labels->find(result.slide_id);
      if (it == labels->end()) {
        throw ValidationError("no label for slide " + result.slide_id);
      }
      if (it->second != 1) continue;
    }
    const bool predicted_positive = result.initial_p >= result.threshold;
    if ((filter == CohortFilter::PredictedPositive ||
         filter == CohortFilter::LabelPositiveAndPredictedPositive) &&
        !predicted_positive) {
      continue;
    }
    out.push_back(result);
  }
  return out;
}

std::vector<HistogramBin> percent_histogram(const std::vector<double>& percents, double bin_width) {
  if (!(bin_width > 0.0 && bin_width <= 100.0)) {
    throw ValidationError("histogram bin width must lie in (0,100], got " +
                          csv::format_double(bin_width));
  }
  const auto n_bins = static_cast<std::size_t>(std::ceil(100.0 / bin_width));
  std::vector<HistogramBin> bins(n_bins);
  for (std::size_t i = 0; i < n_bins; ++i) {
    bins[i].lo = static_cast<double>(i) * bin_width;
    bins[i].hi = std::min(bins[i].lo + bin_width, 100.0);
  }
  for (const double v : percents) {
    if (!(v >= 0.0 && v <= 100.0)) {
      throw ValidationError("percent_selected " + csv::format_double(v) + " outside [0,100]");
    }
    const auto idx = std::min(static_cast<std::size_t>(v / bin_width), n_bins - 1);
    ++bins[idx].count;
  }
  return bins;
}

CohortSummary summarize(const std::vector<WeepResult>& results, double bin_width) {
  if (results.empty()) throw ValidationError("empty cohort: no slides to summarize");
  if (results.size() < 2) {
    throw ValidationError("confidence interval undefined for a cohort of one slide");
  }

  std::vector<double> percents;
  percents.reserve(results.size());
  for (const auto& result : results) percents.push_back(result.percent_selected);
  // summation in sorted order, so the statistics cannot depend on result order
  std::sort(percents.begin(), percents.end());

  const auto m = static_cast<double>(percents.size());
  double sum = 0.0;
  for (const double v : percents) sum += v;
  const double mean = sum / m;
  double ss = 0.0;
  for (const double v : percents) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (m - 1.0));
  const double half_width = 1.96 * sd / std::sqrt(m);

  CohortSummary summary;
  summary.n_slides = percents.size();
  summary.mean_percent = mean;
  summary.ci_low = mean - half_width;
  summary.ci_high = mean + half_width;
  summary.histogram = percent_histogram(percents, bin_width);
  return summary;
}

std::string serialize_cohort_summary(const CohortSummary& summary) {
  std::string out = "n_slides,mean_percent,ci_low,ci_high\n";
  out += std::to_string(summary.n_slides);
  out += ',';
  out += csv::format_double(summary.mean_percent);
  out += ',';
  out += csv::format_double(summary.ci_low);
  out += ',';
  out += csv::format_double(summary.ci_high);
  out += '\n';
  return out;
}

std::string serialize_histogram(const std::vector<HistogramBin>& bins) {
  std::string out = "bin_low,bin_high,count\n";
  for (const auto& bin : bins) {
    out += csv::format_double(bin.lo);
    out += ',';
    out += csv::format_double(bin.hi);
    out += ',';
    out += std::to_string(bin.count);
    out += '\n';
  }
  return out;
}

std::vector<HistogramBin> parse_histogram_csv(std::string_view text) {
  const auto lines = csv::split_lines(text);
  std::size_t header_line = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    if (lines[i] != "bin_low,bin_high,count") {
      throw ValidationError(i + 1,
                            "bad header '" + lines[i] + "', expected 'bin_low,bin_high,count'");
    }
    header_line = i + 1;
    break;
  }
  if (header_line == 0) throw ValidationError("empty input: missing header row");

  std::vector<HistogramBin> bins;
  for (std::size_t i = header_line; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::size_t line = i + 1;
    const auto fields = csv::split_fields(lines[i]);
    if (fields.size() != 3) {
      throw ValidationError(line, "expected 3 fields, found " + std::to_string(fields.size()));
    }
    const auto lo = csv::parse_double(fields[0]);
    const auto hi = csv::parse_double(fields[1]);
    const auto count = csv::parse_int(fields[2]);
    if (!lo || !hi || !std::isfinite(*lo) || !std::isfinite(*hi)) {
      throw ValidationError(line, "non-numeric bin edge");
    }
    if (!(*hi > *lo)) throw ValidationError(line, "bin_high must exceed bin_low");
    if (!count || *count < 0) {
      throw ValidationError(line, "count must be a non-negative integer, got '" + fields[2] + "'");
    }
    bins.push_back({*lo, *hi, static_cast<std::size_t>(*count)});
  }
  if (bins.empty()) throw ValidationError("histogram table has no data rows");
  return bins;
}

}  // namespace weep
