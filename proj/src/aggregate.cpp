#include "weep/aggregate.hpp"

#include <algorithm>
#include <cmath>

#include "weep/csv.hpp"

namespace weep {
namespace {

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

AggregatorSpec AggregatorSpec::percentile(double p) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw ValidationError("percentile p must lie in (0,1], got " + csv::format_double(p));
  }
  AggregatorSpec spec;
  spec.kind = AggregatorKind::Percentile;
  spec.p = p;
  return spec;
}

AggregatorSpec AggregatorSpec::mean() {
  AggregatorSpec spec;
  spec.kind = AggregatorKind::Mean;
  return spec;
}

AggregatorSpec AggregatorSpec::median() {
  AggregatorSpec spec;
  spec.kind = AggregatorKind::Median;
  spec.p = 0.5;
  return spec;
}

AggregatorSpec AggregatorSpec::attention_weighted_score() {
  AggregatorSpec spec;
  spec.kind = AggregatorKind::AttentionWeightedScore;
  return spec;
}

AggregatorSpec AggregatorSpec::attention_pooling(AttentionParams params) {
  AggregatorSpec spec;
  spec.kind = AggregatorKind::AttentionPooling;
  spec.params = std::move(params);
  return spec;
}

AggregatorSpec AggregatorSpec::parse(std::string_view selector) {
  if (selector == "mean") return mean();
  if (selector == "median") return median();
  if (selector == "attn-score") return attention_weighted_score();
  if (selector == "attn-pool") {
    AggregatorSpec spec;
    spec.kind = AggregatorKind::AttentionPooling;
    return spec;
  }
  if (selector.size() >= 2 && selector[0] == 'p') {
    const auto n = csv::parse_int(selector.substr(1));
    if (n && *n >= 1 && *n <= 100) return percentile(static_cast<double>(*n) / 100.0);
  }
  throw ValidationError("unknown aggregator '" + std::string(selector) +
                        "' (expected p<1..100>, mean, median, attn-score, or attn-pool)");
}

std::string AggregatorSpec::name() const {
  switch (kind) {
    case AggregatorKind::Percentile: {
      const double scaled = p * 100.0;
      const double rounded = std::round(scaled);
      if (std::abs(scaled - rounded) < 1e-9 && rounded >= 1.0 && rounded <= 100.0) {
        return "p" + std::to_string(static_cast<int>(rounded));
      }
      return "percentile(" + csv::format_double(p) + ")";
    }
    case AggregatorKind::Mean:
      return "mean";
    case AggregatorKind::Median:
      return "median";
    case AggregatorKind::AttentionWeightedScore:
      return "attn-score";
    case AggregatorKind::AttentionPooling:
      return "attn-pool";
  }
  return "unknown";
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw ValidationError("percentile of an empty value list");
  if (!(p > 0.0 && p <= 1.0)) {
    throw ValidationError("percentile p must lie in (0,1], got " + csv::format_double(p));
  }
  for (const double v : values) {
    if (!std::isfinite(v)) throw ValidationError("percentile input must be finite");
  }
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  const double q = p * static_cast<double>(n - 1);
  const auto lo = static_cast<std::size_t>(q);
  if (lo + 1 >= n) return values[n - 1];
  const double frac = q - static_cast<double>(lo);
  const double out = values[lo] + frac * (values[lo + 1] - values[lo]);
  return std::min(out, values[lo + 1]);
}

AttentionPoolResult attention_pool(const Eigen::MatrixXd& features, const AttentionParams& params) {
  const Eigen::Index n = features.rows();
  const Eigen::Index d = features.cols();
  const Eigen::Index k = params.V.rows();
  if (n < 1) throw ValidationError("attention_pool needs at least one feature row");
  if (k < 1 || params.V.cols() < 1) throw ValidationError("attention params: V is empty");
  if (params.w.size() != k) {
    throw ValidationError("attention params: |w|=" + std::to_string(params.w.size()) +
                          " does not match the " + std::to_string(k) + " rows of V");
  }
  if (params.c.size() != params.V.cols()) {
    throw ValidationError("attention params: |c|=" + std::to_string(params.c.size()) +
                          " does not match the " + std::to_string(params.V.cols()) +
                          " columns of V");
  }
  if (d != params.V.cols()) {
    throw ValidationError("feature dimension " + std::to_string(d) +
                          " does not match attention params d=" + std::to_string(params.V.cols()));
  }

  // e_i = w . tanh(V h_i), accumulated in fixed scalar order
  Eigen::VectorXd logits(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double e = 0.0;
    for (Eigen::Index r = 0; r < k; ++r) {
      double t = 0.0;
      for (Eigen::Index j = 0; j < d; ++j) t += params.V(r, j) * features(i, j);
      e += params.w(r) * std::tanh(t);
    }
    logits(i) = e;
  }

  double max_logit = logits(0);
  for (Eigen::Index i = 1; i < n; ++i) max_logit = std::max(max_logit, logits(i));

  AttentionPoolResult result;
  result.weights.resize(n);
  double denom = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    result.weights(i) = std::exp(logits(i) - max_logit);
    denom += result.weights(i);
  }
  for (Eigen::Index i = 0; i < n; ++i) result.weights(i) /= denom;

  Eigen::VectorXd z = Eigen::VectorXd::Zero(d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) z(j) += result.weights(i) * features(i, j);
  }
  double dot = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) dot += params.c(j) * z(j);
  result.slide_score = stable_sigmoid(dot + params.b);
  return result;
}

std::vector<const TileRecord*> canonical_order(const SlideBag& bag) {
  std::vector<const TileRecord*> tiles;
  tiles.reserve(bag.tiles.size());
  for (const auto& tile : bag.tiles) tiles.push_back(&tile);
  std::sort(tiles.begin(), tiles.end(),
            [](const TileRecord* a, const TileRecord* b) { return a->tile_id < b->tile_id; });
  return tiles;
}

double aggregate_tiles(std::span<const TileRecord* const> tiles, const AggregatorSpec& spec) {
  if (tiles.empty()) throw ValidationError("cannot aggregate an empty tile set");

  switch (spec.kind) {
    case AggregatorKind::Percentile:
    case AggregatorKind::Median: {
      std::vector<double> scores;
      scores.reserve(tiles.size());
      for (const TileRecord* tile : tiles) scores.push_back(tile->score);
      return percentile(std::move(scores), spec.kind == AggregatorKind::Median ? 0.5 : spec.p);
    }
    case AggregatorKind::Mean: {
      double sum = 0.0;
      for (const TileRecord* tile : tiles) sum += tile->score;
      return sum / static_cast<double>(tiles.size());
    }
    case AggregatorKind::AttentionWeightedScore: {
      double weighted = 0.0;
      double total = 0.0;
      for (const TileRecord* tile : tiles) {
        if (!tile->attention_raw) {
          throw ValidationError("tile " + tile->tile_id + " has no attention weight");
        }
        if (*tile->attention_raw < 0.0) {
          throw ValidationError("tile " + tile->tile_id + " has negative attention");
        }
        weighted += *tile->attention_raw * tile->score;
        total += *tile->attention_raw;
      }
      if (total <= 0.0) {
        throw ValidationError("attention weights sum to zero, weighted score undefined");
      }
      return weighted / total;
    }
    case AggregatorKind::AttentionPooling: {
      if (!spec.params) throw ValidationError("attention pooling parameters not loaded");
      const Eigen::Index d = spec.params->V.cols();
      Eigen::MatrixXd features(static_cast<Eigen::Index>(tiles.size()), d);
      for (std::size_t i = 0; i < tiles.size(); ++i) {
        const TileRecord* tile = tiles[i];
        if (!tile->features) {
          throw ValidationError("tile " + tile->tile_id + " has no feature vector");
        }
        if (tile->features->size() != d) {
          throw ValidationError("tile " + tile->tile_id + " has feature dimension " +
                                std::to_string(tile->features->size()) +
                                ", attention params need " + std::to_string(d));
        }
        features.row(static_cast<Eigen::Index>(i)) = tile->features->transpose();
      }
      return attention_pool(features, *spec.params).slide_score;
    }
  }
  throw ValidationError("unknown aggregator kind");
}

double aggregate_slide(const SlideBag& bag, const AggregatorSpec& spec) {
  if (bag.tiles.empty()) throw ValidationError("slide " + bag.slide_id + " has no tiles");
  const auto tiles = canonical_order(bag);
  return aggregate_tiles(tiles, spec);
}

}  // namespace weep
