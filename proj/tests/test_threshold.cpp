#include "weep/threshold.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include "doctest.h"
#include "weep/types.hpp"

using namespace weep;

namespace {

// Independent J maximization: enumerate distinct scores, count the confusion
// matrix for "positive iff score >= t" directly, and apply the tie rules.
DecisionThreshold exhaustive_youden(const std::vector<double>& scores,
                                    const std::vector<int>& labels) {
  std::set<double> candidates(scores.begin(), scores.end());
  double total_pos = 0.0;
  double total_neg = 0.0;
  for (const int label : labels) (label == 1 ? total_pos : total_neg) += 1.0;

  DecisionThreshold best;
  bool have = false;
  for (const double t : candidates) {
    double tp = 0.0;
    double tn = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= t && labels[i] == 1) tp += 1.0;
      if (scores[i] < t && labels[i] == 0) tn += 1.0;
    }
    const double sens = tp / total_pos;
    const double spec = tn / total_neg;
    const double j = sens + spec - 1.0;
    if (!have || j > best.j || (j == best.j && sens > best.sensitivity) ||
        (j == best.j && sens == best.sensitivity && t < best.value)) {
      best = {t, sens, spec, j};
      have = true;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("youden_threshold separable cohort") {
  const std::vector<double> scores{0.1, 0.2, 0.7, 0.9};
  const std::vector<int> labels{0, 0, 1, 1};
  const auto t = youden_threshold(scores, labels);
  CHECK(t.value == 0.7);
  CHECK(t.sensitivity == 1.0);
  CHECK(t.specificity == 1.0);
  CHECK(t.j == 1.0);
}

TEST_CASE("youden_threshold overlapping cohort prefers higher sensitivity on ties") {
  const std::vector<double> scores{0.1, 0.6, 0.4, 0.8};
  const std::vector<int> labels{0, 0, 1, 1};
  const auto t = youden_threshold(scores, labels);
  CHECK(t.value == 0.4);
  CHECK(t.sensitivity == 1.0);
  CHECK(t.specificity == 0.5);
  CHECK(t.j == 0.5);
}

TEST_CASE("all-equal scores give J = 0") {
  const std::vector<double> scores{0.5, 0.5, 0.5, 0.5};
  const std::vector<int> labels{0, 1, 0, 1};
  const auto t = youden_threshold(scores, labels);
  CHECK(t.value == 0.5);
  CHECK(t.j == 0.0);
  CHECK(t.sensitivity == 1.0);
  CHECK(t.specificity == 0.0);
}

TEST_CASE("roc_points walks distinct scores from high to low") {
  const std::vector<double> scores{0.1, 0.2, 0.7, 0.9, 0.7};
  const std::vector<int> labels{0, 0, 1, 1, 0};
  const auto points = roc_points(scores, labels);
  REQUIRE(points.size() == 4);
  CHECK(points[0].threshold == 0.9);
  CHECK(points[1].threshold == 0.7);
  CHECK(points[2].threshold == 0.2);
  CHECK(points[3].threshold == 0.1);
  CHECK(points[0].sensitivity == 0.5);
  CHECK(points[0].specificity == 1.0);
  CHECK(points[1].sensitivity == 1.0);
  CHECK(points[1].specificity == doctest::Approx(2.0 / 3.0));
  CHECK(points[3].sensitivity == 1.0);
  CHECK(points[3].specificity == 0.0);
}

TEST_CASE("roc curves are monotone: sensitivity rises, specificity falls") {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng() % 60;
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      // coarse quantization forces plenty of ties
      scores[i] = std::round(unit(rng) * 8.0) / 8.0;
      labels[i] = rng() % 2 ? 1 : 0;
    }
    labels[0] = 0;
    labels[1] = 1;

    const auto points = roc_points(scores, labels);
    const std::set<double> distinct(scores.begin(), scores.end());
    CHECK(points.size() == distinct.size());
    for (std::size_t i = 1; i < points.size(); ++i) {
      CHECK(points[i].threshold < points[i - 1].threshold);
      CHECK(points[i].sensitivity >= points[i - 1].sensitivity);
      CHECK(points[i].specificity <= points[i - 1].specificity);
    }
    CHECK(points.back().sensitivity == 1.0);
    CHECK(points.back().specificity == 0.0);
  }
}

TEST_CASE("youden_threshold agrees with an exhaustive search") {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng() % 40;
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = std::round(unit(rng) * 16.0) / 16.0;
      labels[i] = rng() % 2 ? 1 : 0;
    }
    labels[0] = 0;
    labels[1] = 1;

    const auto fast = youden_threshold(scores, labels);
    const auto slow = exhaustive_youden(scores, labels);
    CHECK(fast.value == slow.value);
    CHECK(fast.sensitivity == slow.sensitivity);
    CHECK(fast.specificity == slow.specificity);
    CHECK(fast.j == slow.j);
  }
}

TEST_CASE("duplicating every observation leaves the threshold unchanged") {
  std::mt19937_64 rng(59);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 30;
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = std::round(unit(rng) * 10.0) / 10.0;
      labels[i] = rng() % 2 ? 1 : 0;
    }
    labels[0] = 0;
    labels[1] = 1;
    auto scores2 = scores;
    auto labels2 = labels;
    scores2.insert(scores2.end(), scores.begin(), scores.end());
    labels2.insert(labels2.end(), labels.begin(), labels.end());

    const auto a = youden_threshold(scores, labels);
    const auto b = youden_threshold(scores2, labels2);
    CHECK(a.value == b.value);
    CHECK(a.sensitivity == b.sensitivity);
    CHECK(a.specificity == b.specificity);
  }
}

TEST_CASE("the optimal operating point is invariant to increasing transforms") {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 4 + rng() % 30;
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = std::round(unit(rng) * 12.0) / 12.0;
      labels[i] = rng() % 2 ? 1 : 0;
    }
    labels[0] = 0;
    labels[1] = 1;
    std::vector<double> warped(n);
    for (std::size_t i = 0; i < n; ++i) warped[i] = scores[i] * scores[i] + 3.0 * scores[i];

    const auto a = youden_threshold(scores, labels);
    const auto b = youden_threshold(warped, labels);
    CHECK(b.value == a.value * a.value + 3.0 * a.value);
    CHECK(a.sensitivity == b.sensitivity);
    CHECK(a.specificity == b.specificity);
  }
}

TEST_CASE("calibration input validation") {
  CHECK_THROWS_AS(roc_points(std::vector<double>{}, std::vector<int>{}), ValidationError);
  CHECK_THROWS_AS(roc_points(std::vector<double>{0.5}, std::vector<int>{0, 1}), ValidationError);
  CHECK_THROWS_AS(roc_points(std::vector<double>{0.5, 0.6}, std::vector<int>{0, 0}),
                  ValidationError);
  CHECK_THROWS_AS(roc_points(std::vector<double>{0.5, 0.6}, std::vector<int>{1, 1}),
                  ValidationError);
  CHECK_THROWS_AS(roc_points(std::vector<double>{0.5, 0.6}, std::vector<int>{0, 2}),
                  ValidationError);
  const double nan = std::nan("");
  CHECK_THROWS_AS(roc_points(std::vector<double>{nan, 0.6}, std::vector<int>{0, 1}),
                  ValidationError);
}

TEST_CASE("threshold CSV round-trips") {
  const DecisionThreshold t{0.4, 1.0, 0.5, 0.5};
  const std::string text = serialize_threshold(t);
  CHECK(text == "value,sensitivity,specificity,j\n0.4,1,0.5,0.5\n");
  const auto back = parse_threshold_csv(text);
  CHECK(back.value == 0.4);
  CHECK(back.sensitivity == 1.0);
  CHECK(back.specificity == 0.5);
  CHECK(back.j == 0.5);
  CHECK_THROWS_AS(parse_threshold_csv("value,sensitivity,specificity,j\n"), ValidationError);
  CHECK_THROWS_AS(parse_threshold_csv("wrong\n0.4,1,0.5,0.5\n"), ValidationError);
  CHECK_THROWS_AS(parse_threshold_csv("value,sensitivity,specificity,j\n0.4,1,0.5,0.5\n0.1,0,0,0\n"),
                  ValidationError);
}

TEST_CASE("serialize_roc emits one row per operating point") {
  const std::vector<double> scores{0.1, 0.2, 0.7, 0.9};
  const std::vector<int> labels{0, 0, 1, 1};
  const auto text = serialize_roc(roc_points(scores, labels));
  CHECK(text ==
        "threshold,sensitivity,specificity,j\n"
        "0.9,0.5,1,0.5\n"
        "0.7,1,1,1\n"
        "0.2,1,0.5,0.5\n"
        "0.1,1,0,0\n");
}
