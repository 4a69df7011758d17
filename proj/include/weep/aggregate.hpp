#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "weep/types.hpp"

namespace weep {

enum class AggregatorKind { Percentile, Mean, Median, AttentionWeightedScore, AttentionPooling };

// A tile-to-slide aggregation rule. Selector strings accepted by parse():
//   p<integer 1..100>  linear-interpolation percentile of tile scores
//   mean               mean tile score
//   median             median tile score (= p50)
//   attn-score         attention-weighted mean score (needs per-tile attention)
//   attn-pool          attention pooling over feature vectors (needs params)
struct AggregatorSpec {
  AggregatorKind kind = AggregatorKind::Percentile;
  double p = 0.75;  // Percentile only, in (0,1]
  std::optional<AttentionParams> params;  // AttentionPooling only

  static AggregatorSpec percentile(double p);
  static AggregatorSpec mean();
  static AggregatorSpec median();
  static AggregatorSpec attention_weighted_score();
  static AggregatorSpec attention_pooling(AttentionParams params);
  static AggregatorSpec parse(std::string_view selector);

  std::string name() const;
};

// Linear-interpolation percentile of `values` for p in (0,1]: with the values
// sorted ascending and q = p*(n-1), returns
// v[floor(q)] + (q - floor(q)) * (v[ceil(q)] - v[floor(q)]), clamped so
// rounding can never exceed v[ceil(q)].
double percentile(std::vector<double> values, double p);

struct AttentionPoolResult {
  Eigen::VectorXd weights;  // softmax attention, sums to 1
  double slide_score = 0.0;  // sigmoid(c . z + b), z = weighted feature mean
};

// Attention pooling over one bag: rows of `features` are tile feature
// vectors. Uses max-shifted softmax; all reductions run in row order so the
// result is independent of compiler vectorization choices.
AttentionPoolResult attention_pool(const Eigen::MatrixXd& features, const AttentionParams& params);

// Tiles of a bag in canonical evaluation order (tile_id ascending). All
// aggregation sums run over this order, which keeps slide scores identical no
// matter how the caller ordered or subset the tiles.
std::vector<const TileRecord*> canonical_order(const SlideBag& bag);

// Slide-level score for an explicit tile subset already in canonical order.
double aggregate_tiles(std::span<const TileRecord* const> tiles, const AggregatorSpec& spec);

// Slide-level score for a whole bag.
double aggregate_slide(const SlideBag& bag, const AggregatorSpec& spec);

}  // namespace weep
