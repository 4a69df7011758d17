#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace weep {

// Raised for malformed or contract-violating input data. Messages carry the
// offending line number or field name so callers can report actionable
// diagnostics.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
  ValidationError(std::size_t line, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}

  std::optional<std::size_t> line() const { return line_; }

 private:
  std::optional<std::size_t> line_;
};

// One tile of a whole-slide image: grid position, tile-level prediction
// score, and optional attention weight / feature vector exported alongside.
struct TileRecord {
  std::string tile_id;
  int grid_x = 0;  // tile-grid column, >= 0
  int grid_y = 0;  // tile-grid row, >= 0
  double score = 0.0;  // p(class=1 | tile), in [0,1]
  std::optional<double> attention_raw;  // >= 0, pre-normalization
  std::optional<Eigen::VectorXd> features;
};

// All tiles of one slide plus the slide-level label when known. The tile
// order is the input order; identity within a slide is the tile_id.
struct SlideBag {
  std::string slide_id;
  std::vector<TileRecord> tiles;
  std::optional<int> label;  // 0 or 1
};

// Inference weights of the attention pooling head:
//   a = softmax_i(w . tanh(V h_i)),  P = sigmoid(c . sum_i a_i h_i + b)
struct AttentionParams {
  Eigen::MatrixXd V;  // k x d
  Eigen::VectorXd w;  // k
  Eigen::VectorXd c;  // d
  double b = 0.0;
};

inline bool bitwise_equal(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == b.size() && std::equal(a.data(), a.data() + a.size(), b.data());
}

inline bool operator==(const TileRecord& a, const TileRecord& b) {
  if (a.tile_id != b.tile_id || a.grid_x != b.grid_x || a.grid_y != b.grid_y) return false;
  if (a.score != b.score || a.attention_raw != b.attention_raw) return false;
  if (a.features.has_value() != b.features.has_value()) return false;
  return !a.features || bitwise_equal(*a.features, *b.features);
}

inline bool operator==(const SlideBag& a, const SlideBag& b) {
  return a.slide_id == b.slide_id && a.label == b.label && a.tiles == b.tiles;
}

}  // namespace weep
