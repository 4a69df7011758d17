#include "weep/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"

using namespace weep;

namespace {

WeepResult result_of(std::string slide_id, double percent, double initial_p = 0.9,
                     double threshold = 0.5) {
  WeepResult r;
  r.slide_id = std::move(slide_id);
  r.n_tiles = 100;
  r.n_selected = static_cast<std::size_t>(percent);
  r.percent_selected = percent;
  r.initial_p = initial_p;
  r.threshold = threshold;
  return r;
}

}  // namespace

TEST_CASE("summarize computes mean and normal-approximation CI") {
  const std::vector<WeepResult> results = {result_of("a", 10.0), result_of("b", 20.0),
                                           result_of("c", 30.0)};
  const auto summary = summarize(results);
  CHECK(summary.n_slides == 3);
  CHECK(summary.mean_percent == 20.0);
  CHECK(summary.ci_low == doctest::Approx(8.683934723883333).epsilon(1e-12));
  CHECK(summary.ci_high == doctest::Approx(31.316065276116667).epsilon(1e-12));
}

TEST_CASE("an all-equal cohort has a zero-width CI") {
  const std::vector<WeepResult> results = {result_of("a", 40.0), result_of("b", 40.0),
                                           result_of("c", 40.0), result_of("d", 40.0)};
  const auto summary = summarize(results);
  CHECK(summary.mean_percent == 40.0);
  CHECK(summary.ci_low == 40.0);
  CHECK(summary.ci_high == 40.0);
}

TEST_CASE("summarize needs at least two slides") {
  CHECK_THROWS_AS(summarize({}), ValidationError);
  CHECK_THROWS_AS(summarize({result_of("a", 10.0)}), ValidationError);
}

TEST_CASE("summarize is bitwise invariant to result order") {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<WeepResult> results;
    const std::size_t m = 2 + rng() % 40;
    for (std::size_t i = 0; i < m; ++i) {
      results.push_back(result_of("s" + std::to_string(i), 100.0 * unit(rng)));
    }
    auto shuffled = results;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);

    const auto a = summarize(results);
    const auto b = summarize(shuffled);
    CHECK(a.mean_percent == b.mean_percent);
    CHECK(a.ci_low == b.ci_low);
    CHECK(a.ci_high == b.ci_high);
  }
}

TEST_CASE("quadrupling the cohort shrinks the CI by the sample-sd ratio") {
  // With the (m-1)-denominator standard deviation, duplicating every slide
  // four times scales the CI width by sqrt((m-1)/(4m-1)), not exactly 1/2.
  // Pin the m=3 ratio so any change to the estimator is caught.
  const std::vector<WeepResult> base = {result_of("a", 10.0), result_of("b", 20.0),
                                        result_of("c", 30.0)};
  std::vector<WeepResult> quad;
  for (int copy = 0; copy < 4; ++copy) {
    for (const auto& r : base) {
      quad.push_back(result_of(r.slide_id + "_" + std::to_string(copy), r.percent_selected));
    }
  }
  const auto small = summarize(base);
  const auto large = summarize(quad);
  CHECK(large.mean_percent == small.mean_percent);
  const double ratio = (large.ci_high - large.ci_low) / (small.ci_high - small.ci_low);
  const double m = 3.0;
  CHECK(ratio == doctest::Approx(std::sqrt((m - 1.0) / (4.0 * m - 1.0))).epsilon(1e-12));
  CHECK(ratio == doctest::Approx(0.4264014327112209).epsilon(1e-12));
}

TEST_CASE("percent_histogram bins [lo, lo+w) with a closed last bin") {
  const auto bins = percent_histogram({0.0, 4.999, 5.0, 95.0, 99.9, 100.0}, 5.0);
  REQUIRE(bins.size() == 20);
  CHECK(bins[0].lo == 0.0);
  CHECK(bins[0].hi == 5.0);
  CHECK(bins[0].count == 2);
  CHECK(bins[1].count == 1);
  CHECK(bins[19].lo == 95.0);
  CHECK(bins[19].hi == 100.0);
  CHECK(bins[19].count == 3);
  std::size_t total = 0;
  for (const auto& bin : bins) total += bin.count;
  CHECK(total == 6);
}

TEST_CASE("percent_histogram handles widths that do not divide 100") {
  const auto bins = percent_histogram({100.0}, 30.0);
  REQUIRE(bins.size() == 4);
  CHECK(bins[3].lo == 90.0);
  CHECK(bins[3].hi == 100.0);
  CHECK(bins[3].count == 1);

  const auto one = percent_histogram({0.0, 50.0, 100.0}, 100.0);
  REQUIRE(one.size() == 1);
  CHECK(one[0].count == 3);
}

TEST_CASE("percent_histogram validates inputs") {
  CHECK_THROWS_AS(percent_histogram({50.0}, 0.0), ValidationError);
  CHECK_THROWS_AS(percent_histogram({50.0}, -5.0), ValidationError);
  CHECK_THROWS_AS(percent_histogram({50.0}, 101.0), ValidationError);
  CHECK_THROWS_AS(percent_histogram({-1.0}, 5.0), ValidationError);
  CHECK_THROWS_AS(percent_histogram({100.5}, 5.0), ValidationError);
}

TEST_CASE("filter names parse both ways") {
  for (const auto filter :
       {CohortFilter::All, CohortFilter::PredictedPositive, CohortFilter::LabelPositive,
        CohortFilter::LabelPositiveAndPredictedPositive}) {
    CHECK(parse_cohort_filter(cohort_filter_name(filter)) == filter);
  }
  CHECK_THROWS_AS(parse_cohort_filter("positives"), ValidationError);
}

TEST_CASE("filter_cohort applies label and prediction rules") {
  // b sits exactly on the threshold and must count as predicted positive
  const std::vector<WeepResult> results = {
      result_of("a", 10.0, 0.9, 0.5), result_of("b", 20.0, 0.5, 0.5),
      result_of("c", 30.0, 0.2, 0.5), result_of("d", 40.0, 0.7, 0.5)};
  const std::map<std::string, int> labels = {{"a", 1}, {"b", 0}, {"c", 1}, {"d", 0}};

  const auto all = filter_cohort(results, &labels, CohortFilter::All);
  CHECK(all.size() == 4);

  const auto predicted = filter_cohort(results, &labels, CohortFilter::PredictedPositive);
  REQUIRE(predicted.size() == 3);
  CHECK(predicted[0].slide_id == "a");
  CHECK(predicted[1].slide_id == "b");
  CHECK(predicted[2].slide_id == "d");

  const auto labeled = filter_cohort(results, &labels, CohortFilter::LabelPositive);
  REQUIRE(labeled.size() == 2);
  CHECK(labeled[0].slide_id == "a");
  CHECK(labeled[1].slide_id == "c");

  const auto both =
      filter_cohort(results, &labels, CohortFilter::LabelPositiveAndPredictedPositive);
  REQUIRE(both.size() == 1);
  CHECK(both[0].slide_id == "a");

  // prediction-only filters work without a label table
  CHECK(filter_cohort(results, nullptr, CohortFilter::All).size() == 4);
  CHECK(filter_cohort(results, nullptr, CohortFilter::PredictedPositive).size() == 3);
}

TEST_CASE("label filters fail without labels") {
  const std::vector<WeepResult> results = {result_of("a", 10.0), result_of("b", 20.0)};
  CHECK_THROWS_AS(filter_cohort(results, nullptr, CohortFilter::LabelPositive), ValidationError);
  const std::map<std::string, int> partial = {{"a", 1}};
  CHECK_THROWS_AS(filter_cohort(results, &partial, CohortFilter::LabelPositive), ValidationError);
}

TEST_CASE("cohort summary serialization") {
  const std::vector<WeepResult> results = {result_of("a", 10.0), result_of("b", 20.0),
                                           result_of("c", 30.0)};
  const auto summary = summarize(results);
  const std::string text = serialize_cohort_summary(summary);
  CHECK(text.substr(0, text.find('\n')) == "n_slides,mean_percent,ci_low,ci_high");
  CHECK(text.find("3,20,") != std::string::npos);
}

TEST_CASE("histogram CSV round-trips") {
  const auto bins = percent_histogram({2.0, 7.0, 99.0}, 5.0);
  const std::string text = serialize_histogram(bins);
  const auto back = parse_histogram_csv(text);
  REQUIRE(back.size() == bins.size());
  for (std::size_t i = 0; i < bins.size(); ++i) {
    CHECK(back[i].lo == bins[i].lo);
    CHECK(back[i].hi == bins[i].hi);
    CHECK(back[i].count == bins[i].count);
  }
  CHECK_THROWS_AS(parse_histogram_csv("bin_low,bin_high,count\n"), ValidationError);
  CHECK_THROWS_AS(parse_histogram_csv("bin_low,bin_high,count\n5,5,1\n"), ValidationError);
  CHECK_THROWS_AS(parse_histogram_csv("bin_low,bin_high,count\n0,5,-1\n"), ValidationError);
  CHECK_THROWS_AS(parse_histogram_csv("oops\n"), ValidationError);
}
