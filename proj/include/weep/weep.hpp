#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "weep/aggregate.hpp"
#include "weep/types.hpp"

namespace weep {

// Which per-tile quantity drives the removal order.
enum class RankMetric { Score, Attention };

RankMetric parse_rank_metric(std::string_view name);  // "score" | "attention"
std::string rank_metric_name(RankMetric metric);

// Indices into bag.tiles ordered by ranking metric descending; ties break by
// tile_id ascending. The Attention metric requires attention_raw on every
// tile.
std::vector<std::size_t> rank_tiles(const SlideBag& bag, RankMetric metric);

double rank_metric_value(const TileRecord& tile, RankMetric metric);

// Outcome of backward tile selection on one slide.
struct WeepResult {
  std::string slide_id;
  std::vector<std::string> selected;  // tile ids in removal order
  std::vector<double> trajectory;  // slide score after 0,1,2,... removals
  std::size_t n_tiles = 0;
  std::size_t n_selected = 0;
  double percent_selected = 0.0;  // 100 * n_selected / n_tiles
  bool exhausted = false;  // every removal still scored >= threshold
  double initial_p = 0.0;
  double final_p = 0.0;
  double threshold = 0.0;
};

// Backward selection: repeatedly remove the top-ranked remaining tile while
// the aggregated score of the remaining tiles is >= threshold. The removed
// tiles are the selected, class-evidence tiles. If the bag empties without
// the score ever dropping below threshold, the result is flagged exhausted.
WeepResult weep_select(const SlideBag& bag, const AggregatorSpec& spec, RankMetric metric,
                       double threshold);

struct PrefixResult {
  std::size_t k = 0;  // number of top-ranked tiles whose removal first drops the score
  bool exhausted = false;
};

// Reference implementation: evaluates each suffix of the ranked tile list
// from scratch (no state shared across prefix lengths) and returns the
// smallest k with aggregate(tiles[k..]) < threshold. Exists as an independent
// cross-check for weep_select; keep the two implementations separate.
PrefixResult brute_force_prefix(const SlideBag& bag, const AggregatorSpec& spec, RankMetric metric,
                                double threshold);

// --- result tables ------------------------------------------------------------

// selection.csv: slide_id,rank,tile_id,grid_x,grid_y,metric_value with rank
// starting at 1 in removal order.
std::string serialize_selection(const std::vector<WeepResult>& results,
                                const std::vector<SlideBag>& bags, RankMetric metric);
std::map<std::string, std::vector<std::string>> parse_selection(std::string_view text);

// trajectory.csv: slide_id,step,p where step 0 is the full bag.
struct SlideTrajectory {
  std::string slide_id;
  std::vector<double> p;
  std::size_t n_tiles = 0;  // not stored in trajectory.csv; joined from summaries
};
std::string serialize_trajectories(const std::vector<WeepResult>& results);
std::vector<SlideTrajectory> parse_trajectories(std::string_view text);

// slides.csv: one row per slide mirroring the printed summary.
// Header: slide_id,n_tiles,n_selected,percent_selected,exhausted,initial_p,final_p,threshold
std::string serialize_slide_summaries(const std::vector<WeepResult>& results);
std::vector<WeepResult> parse_slide_summaries(std::string_view text);  // selected/trajectory empty

// One human-readable line per slide:
// <slide_id> <n_tiles> <n_selected> <percent_selected> <exhausted> <initial_p> <final_p> <threshold>
std::string format_summary_line(const WeepResult& result);

}  // namespace weep
