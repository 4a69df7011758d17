#include "weep/tile_store.hpp"

#include <cmath>
#include <set>
#include <unordered_map>

#include "json.hpp"
#include "weep/csv.hpp"

namespace weep {
namespace {

constexpr long long kMaxGridCoord = 10'000'000;

std::string quote(std::string_view s) { return "'" + std::string(s) + "'"; }

// Returns non-empty data lines as (line_number, fields) after validating the
// header, which must equal `expected` (optionally extended by
// `optional_tail`).
struct Row {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

struct Table {
  bool has_optional = false;
  std::vector<Row> rows;
};

Table read_table(std::string_view text, const std::vector<std::string>& expected,
                 const std::string& optional_tail = {}) {
  const auto lines = csv::split_lines(text);
  std::size_t header_line = 0;
  std::vector<std::string> header;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    header_line = i + 1;
    header = csv::split_fields(lines[i]);
    break;
  }
  if (header_line == 0) throw ValidationError("empty input: missing header row");

  std::string want = csv::join_fields(expected);
  Table table;
  if (header == expected) {
    table.has_optional = false;
  } else if (!optional_tail.empty()) {
    auto extended = expected;
    extended.push_back(optional_tail);
    if (header == extended) {
      table.has_optional = true;
    } else {
      throw ValidationError(header_line, "bad header " + quote(csv::join_fields(header)) +
                                             ", expected " + quote(want) + " or " +
                                             quote(want + "," + optional_tail));
    }
  } else {
    throw ValidationError(header_line, "bad header " + quote(csv::join_fields(header)) +
                                           ", expected " + quote(want));
  }

  const std::size_t n_fields = expected.size() + (table.has_optional ? 1 : 0);
  for (std::size_t i = header_line; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    Row row{i + 1, csv::split_fields(lines[i])};
    if (row.fields.size() != n_fields) {
      throw ValidationError(row.line, "expected " + std::to_string(n_fields) +
                                          " fields, found " + std::to_string(row.fields.size()));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

double parse_finite(const Row& row, std::size_t col, const std::string& what) {
  const auto v = csv::parse_double(row.fields[col]);
  if (!v || !std::isfinite(*v)) {
    throw ValidationError(row.line, "non-numeric " + what + " " + quote(row.fields[col]));
  }
  return *v;
}

int parse_grid_coord(const Row& row, std::size_t col, const std::string& what) {
  const auto v = csv::parse_int(row.fields[col]);
  if (!v || *v < 0 || *v > kMaxGridCoord) {
    throw ValidationError(row.line, what + " must be a non-negative integer, got " +
                                        quote(row.fields[col]));
  }
  return static_cast<int>(*v);
}

}  // namespace

std::vector<SlideBag> parse_tile_table(std::string_view text) {
  const Table table =
      read_table(text, {"slide_id", "tile_id", "grid_x", "grid_y", "score"}, "attention");

  std::vector<SlideBag> bags;
  std::unordered_map<std::string, std::size_t> bag_index;
  std::unordered_map<std::string, std::set<std::string>> seen_ids;
  std::unordered_map<std::string, std::set<std::pair<int, int>>> seen_cells;

  for (const Row& row : table.rows) {
    const std::string& slide_id = row.fields[0];
    if (slide_id.empty()) throw ValidationError(row.line, "empty slide_id");

    TileRecord tile;
    tile.grid_x = parse_grid_coord(row, 2, "grid_x");
    tile.grid_y = parse_grid_coord(row, 3, "grid_y");
    tile.tile_id = row.fields[1].empty()
                       ? std::to_string(tile.grid_x) + ":" + std::to_string(tile.grid_y)
                       : row.fields[1];
    tile.score = parse_finite(row, 4, "score");
    if (tile.score < 0.0 || tile.score > 1.0) {
      throw ValidationError(row.line, "score " + row.fields[4] + " outside [0,1]");
    }
    if (table.has_optional && !row.fields[5].empty()) {
      const double a = parse_finite(row, 5, "attention");
      if (a < 0.0) throw ValidationError(row.line, "negative attention " + row.fields[5]);
      tile.attention_raw = a;
    }

    if (!seen_ids[slide_id].insert(tile.tile_id).second) {
      throw ValidationError(row.line, "duplicate tile_id " + quote(tile.tile_id) + " in slide " +
                                          quote(slide_id));
    }
    if (!seen_cells[slide_id].insert({tile.grid_x, tile.grid_y}).second) {
      throw ValidationError(row.line, "duplicate grid position (" + std::to_string(tile.grid_x) +
                                          "," + std::to_string(tile.grid_y) + ") in slide " +
                                          quote(slide_id));
    }

    auto [it, inserted] = bag_index.try_emplace(slide_id, bags.size());
    if (inserted) bags.push_back(SlideBag{slide_id, {}, std::nullopt});
    bags[it->second].tiles.push_back(std::move(tile));
  }
  if (bags.empty()) throw ValidationError("tile table has no data rows");
  return bags;
}

std::string serialize_tile_table(const std::vector<SlideBag>& bags) {
  bool any_attention = false;
  for (const auto& bag : bags) {
    for (const auto& tile : bag.tiles) {
      if (tile.attention_raw) any_attention = true;
    }
  }
  std::string out = "slide_id,tile_id,grid_x,grid_y,score";
  if (any_attention) out += ",attention";
  out += '\n';
  for (const auto& bag : bags) {
    for (const auto& tile : bag.tiles) {
      out += bag.slide_id;
      out += ',';
      out += tile.tile_id;
      out += ',';
      out += std::to_string(tile.grid_x);
      out += ',';
      out += std::to_string(tile.grid_y);
      out += ',';
      out += csv::format_double(tile.score);
      if (any_attention) {
        out += ',';
        if (tile.attention_raw) out += csv::format_double(*tile.attention_raw);
      }
      out += '\n';
    }
  }
  return out;
}

std::map<std::string, int> parse_labels(std::string_view text) {
  const Table table = read_table(text, {"slide_id", "label"});
  std::map<std::string, int> labels;
  for (const Row& row : table.rows) {
    if (row.fields[0].empty()) throw ValidationError(row.line, "empty slide_id");
    int label = 0;
    if (row.fields[1] == "0") {
      label = 0;
    } else if (row.fields[1] == "1") {
      label = 1;
    } else {
      throw ValidationError(row.line, "label " + quote(row.fields[1]) + " not in {0,1}");
    }
    if (!labels.emplace(row.fields[0], label).second) {
      throw ValidationError(row.line, "duplicate slide_id " + quote(row.fields[0]));
    }
  }
  if (labels.empty()) throw ValidationError("label table has no data rows");
  return labels;
}

std::string serialize_labels(const std::map<std::string, int>& labels) {
  std::string out = "slide_id,label\n";
  for (const auto& [slide_id, label] : labels) {
    out += slide_id;
    out += ',';
    out += std::to_string(label);
    out += '\n';
  }
  return out;
}

void attach_labels(std::vector<SlideBag>& bags, const std::map<std::string, int>& labels) {
  for (auto& bag : bags) {
    if (const auto it = labels.find(bag.slide_id); it != labels.end()) bag.label = it->second;
  }
}

std::vector<SlideScore> parse_slide_scores(std::string_view text) {
  const Table table = read_table(text, {"slide_id", "score"});
  std::vector<SlideScore> out;
  std::set<std::string> seen;
  for (const Row& row : table.rows) {
    if (row.fields[0].empty()) throw ValidationError(row.line, "empty slide_id");
    if (!seen.insert(row.fields[0]).second) {
      throw ValidationError(row.line, "duplicate slide_id " + quote(row.fields[0]));
    }
    out.push_back({row.fields[0], parse_finite(row, 1, "score")});
  }
  if (out.empty()) throw ValidationError("score table has no data rows");
  return out;
}

std::string serialize_slide_scores(const std::vector<SlideScore>& scores) {
  std::string out = "slide_id,score\n";
  for (const auto& s : scores) {
    out += s.slide_id;
    out += ',';
    out += csv::format_double(s.score);
    out += '\n';
  }
  return out;
}

FeatureTable parse_features(std::string_view text) {
  const auto lines = csv::split_lines(text);
  std::size_t header_line = 0;
  std::vector<std::string> header;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    header_line = i + 1;
    header = csv::split_fields(lines[i]);
    break;
  }
  if (header_line == 0) throw ValidationError("empty input: missing header row");
  if (header.size() < 3 || header[0] != "slide_id" || header[1] != "tile_id") {
    throw ValidationError(header_line, "bad header, expected 'slide_id,tile_id,f0,...'");
  }
  const std::size_t d = header.size() - 2;
  for (std::size_t j = 0; j < d; ++j) {
    if (header[j + 2] != "f" + std::to_string(j)) {
      throw ValidationError(header_line, "bad feature column name " + quote(header[j + 2]) +
                                             ", expected 'f" + std::to_string(j) + "'");
    }
  }

  FeatureTable out;
  for (std::size_t i = header_line; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    Row row{i + 1, csv::split_fields(lines[i])};
    if (row.fields.size() != d + 2) {
      throw ValidationError(row.line, "expected " + std::to_string(d + 2) + " fields, found " +
                                          std::to_string(row.fields.size()));
    }
    if (row.fields[0].empty()) throw ValidationError(row.line, "empty slide_id");
    if (row.fields[1].empty()) throw ValidationError(row.line, "empty tile_id");
    Eigen::VectorXd vec(static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < d; ++j) {
      vec(static_cast<Eigen::Index>(j)) = parse_finite(row, j + 2, "feature f" + std::to_string(j));
    }
    if (!out.emplace(std::make_pair(row.fields[0], row.fields[1]), std::move(vec)).second) {
      throw ValidationError(row.line, "duplicate feature row for tile " +
                                          quote(row.fields[0] + "/" + row.fields[1]));
    }
  }
  if (out.empty()) throw ValidationError("feature table has no data rows");
  return out;
}

std::string serialize_features(const std::vector<SlideBag>& bags) {
  Eigen::Index d = -1;
  for (const auto& bag : bags) {
    for (const auto& tile : bag.tiles) {
      if (!tile.features) continue;
      if (d < 0) d = tile.features->size();
      if (tile.features->size() != d) {
        throw ValidationError("inconsistent feature dimension for tile " +
                              quote(bag.slide_id + "/" + tile.tile_id));
      }
    }
  }
  if (d < 0) throw ValidationError("no tile has feature vectors to serialize");

  std::string out = "slide_id,tile_id";
  for (Eigen::Index j = 0; j < d; ++j) out += ",f" + std::to_string(j);
  out += '\n';
  for (const auto& bag : bags) {
    for (const auto& tile : bag.tiles) {
      if (!tile.features) continue;
      out += bag.slide_id;
      out += ',';
      out += tile.tile_id;
      for (Eigen::Index j = 0; j < d; ++j) {
        out += ',';
        out += csv::format_double((*tile.features)(j));
      }
      out += '\n';
    }
  }
  return out;
}

void attach_features(std::vector<SlideBag>& bags, const FeatureTable& features) {
  std::unordered_map<std::string, std::unordered_map<std::string, TileRecord*>> index;
  for (auto& bag : bags) {
    auto& by_tile = index[bag.slide_id];
    for (auto& tile : bag.tiles) by_tile[tile.tile_id] = &tile;
  }
  for (const auto& [key, vec] : features) {
    const auto slide_it = index.find(key.first);
    if (slide_it == index.end()) {
      throw ValidationError("features reference unknown slide " + quote(key.first));
    }
    const auto tile_it = slide_it->second.find(key.second);
    if (tile_it == slide_it->second.end()) {
      throw ValidationError("features reference unknown tile " +
                            quote(key.first + "/" + key.second));
    }
    tile_it->second->features = vec;
  }
}

namespace {

Eigen::VectorXd json_vector(const nlohmann::json& j, const std::string& name) {
  if (!j.is_array() || j.empty()) {
    throw ValidationError("attention params: " + name + " must be a non-empty array");
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      throw ValidationError("attention params: " + name + " must contain only numbers");
    }
    const double x = j[i].get<double>();
    if (!std::isfinite(x)) throw ValidationError("attention params: non-finite entry in " + name);
    v(static_cast<Eigen::Index>(i)) = x;
  }
  return v;
}

}  // namespace

AttentionParams parse_attention_params(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("attention params: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("attention params: top level must be an object");
  for (const std::string key : {"V", "w", "c", "b"}) {
    if (!j.contains(key)) throw ValidationError("attention params: missing key '" + key + "'");
  }

  const auto& jv = j["V"];
  if (!jv.is_array() || jv.empty() || !jv[0].is_array() || jv[0].empty()) {
    throw ValidationError("attention params: V must be a non-empty matrix (array of arrays)");
  }
  const auto k = static_cast<Eigen::Index>(jv.size());
  const auto d = static_cast<Eigen::Index>(jv[0].size());
  AttentionParams params;
  params.V.resize(k, d);
  for (Eigen::Index r = 0; r < k; ++r) {
    const auto& row = jv[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != d) {
      throw ValidationError("attention params: V is not rectangular (row " + std::to_string(r) +
                            " has " + std::to_string(row.size()) + " entries, expected " +
                            std::to_string(d) + ")");
    }
    for (Eigen::Index cidx = 0; cidx < d; ++cidx) {
      const auto& cell = row[static_cast<std::size_t>(cidx)];
      if (!cell.is_number()) throw ValidationError("attention params: V must contain only numbers");
      const double x = cell.get<double>();
      if (!std::isfinite(x)) throw ValidationError("attention params: non-finite entry in V");
      params.V(r, cidx) = x;
    }
  }

  params.w = json_vector(j["w"], "w");
  params.c = json_vector(j["c"], "c");
  if (params.w.size() != k) {
    throw ValidationError("attention params: |w|=" + std::to_string(params.w.size()) +
                          " does not match the " + std::to_string(k) + " rows of V");
  }
  if (params.c.size() != d) {
    throw ValidationError("attention params: |c|=" + std::to_string(params.c.size()) +
                          " does not match the " + std::to_string(d) + " columns of V");
  }
  if (!j["b"].is_number()) throw ValidationError("attention params: b must be a number");
  params.b = j["b"].get<double>();
  if (!std::isfinite(params.b)) throw ValidationError("attention params: non-finite entry in b");
  return params;
}

std::string serialize_attention_params(const AttentionParams& params) {
  nlohmann::json j;
  j["V"] = nlohmann::json::array();
  for (Eigen::Index r = 0; r < params.V.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < params.V.cols(); ++c) row.push_back(params.V(r, c));
    j["V"].push_back(std::move(row));
  }
  j["w"] = nlohmann::json::array();
  for (Eigen::Index i = 0; i < params.w.size(); ++i) j["w"].push_back(params.w(i));
  j["c"] = nlohmann::json::array();
  for (Eigen::Index i = 0; i < params.c.size(); ++i) j["c"].push_back(params.c(i));
  j["b"] = params.b;
  return j.dump(2) + "\n";
}

}  // namespace weep
