#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "weep/types.hpp"

namespace weep {

// --- tile tables ------------------------------------------------------------
// Header: slide_id,tile_id,grid_x,grid_y,score[,attention]
// Rows group into one SlideBag per slide_id in order of first appearance;
// tile order within a bag is the row order. An empty tile_id field defaults
// to "<grid_x>:<grid_y>".
std::vector<SlideBag> parse_tile_table(std::string_view text);
std::string serialize_tile_table(const std::vector<SlideBag>& bags);

// --- slide labels -----------------------------------------------------------
// Header: slide_id,label  (label is 0 or 1)
std::map<std::string, int> parse_labels(std::string_view text);
std::string serialize_labels(const std::map<std::string, int>& labels);

// Sets bag.label for every bag whose slide_id appears in `labels`. Labels for
// unknown slides are ignored so a cohort-wide label file can serve any subset.
void attach_labels(std::vector<SlideBag>& bags, const std::map<std::string, int>& labels);

// --- slide-level scores -----------------------------------------------------
// Header: slide_id,score
struct SlideScore {
  std::string slide_id;
  double score = 0.0;
};
std::vector<SlideScore> parse_slide_scores(std::string_view text);
std::string serialize_slide_scores(const std::vector<SlideScore>& scores);

// --- tile feature vectors ---------------------------------------------------
// Header: slide_id,tile_id,f0,...,f{d-1}. Keyed by (slide_id, tile_id).
using FeatureTable = std::map<std::pair<std::string, std::string>, Eigen::VectorXd>;
FeatureTable parse_features(std::string_view text);
std::string serialize_features(const std::vector<SlideBag>& bags);

// Copies feature vectors onto matching tiles; a row referencing an unknown
// slide or tile is an error.
void attach_features(std::vector<SlideBag>& bags, const FeatureTable& features);

// --- attention pooling parameters (JSON) ------------------------------------
// Object with keys V (k x d row-major matrix), w (length k), c (length d),
// b (scalar). All entries must be finite.
AttentionParams parse_attention_params(std::string_view text);
std::string serialize_attention_params(const AttentionParams& params);

}  // namespace weep
