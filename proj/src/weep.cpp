#include "weep/weep.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "weep/csv.hpp"

namespace weep {

RankMetric parse_rank_metric(std::string_view name) {
  if (name == "score") return RankMetric::Score;
  if (name == "attention") return RankMetric::Attention;
  throw ValidationError("unknown ranking metric '" + std::string(name) +
                        "' (expected score or attention)");
}

std::string rank_metric_name(RankMetric metric) {
  return metric == RankMetric::Score ? "score" : "attention";
}

double rank_metric_value(const TileRecord& tile, RankMetric metric) {
  if (metric == RankMetric::Score) return tile.score;
  if (!tile.attention_raw) {
    throw ValidationError("tile " + tile.tile_id + " has no attention weight for ranking");
  }
  return *tile.attention_raw;
}

std::vector<std::size_t> rank_tiles(const SlideBag& bag, RankMetric metric) {
  if (bag.tiles.empty()) throw ValidationError("slide " + bag.slide_id + " has no tiles");
  std::vector<double> values(bag.tiles.size());
  for (std::size_t i = 0; i < bag.tiles.size(); ++i) {
    values[i] = rank_metric_value(bag.tiles[i], metric);
  }
  std::vector<std::size_t> order(bag.tiles.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] > values[b];
    return bag.tiles[a].tile_id < bag.tiles[b].tile_id;
  });
  return order;
}

WeepResult weep_select(const SlideBag& bag, const AggregatorSpec& spec, RankMetric metric,
                       double threshold) {
  if (!std::isfinite(threshold)) throw ValidationError("decision threshold must be finite");
  const auto order = rank_tiles(bag, metric);  // also rejects empty bags
  auto remaining = canonical_order(bag);

  WeepResult result;
  result.slide_id = bag.slide_id;
  result.n_tiles = bag.tiles.size();
  result.threshold = threshold;

  double p = aggregate_tiles(remaining, spec);
  result.trajectory.push_back(p);
  result.initial_p = p;

  std::size_t next = 0;
  while (p >= threshold) {
    const TileRecord* top = &bag.tiles[order[next++]];
    result.selected.push_back(top->tile_id);
    remaining.erase(std::find(remaining.begin(), remaining.end(), top));
    if (remaining.empty()) {
      result.exhausted = true;
      break;
    }
    p = aggregate_tiles(remaining, spec);
    result.trajectory.push_back(p);
  }

  result.n_selected = result.selected.size();
  result.percent_selected =
      100.0 * static_cast<double>(result.n_selected) / static_cast<double>(result.n_tiles);
  result.final_p = result.trajectory.back();
  return result;
}

PrefixResult brute_force_prefix(const SlideBag& bag, const AggregatorSpec& spec, RankMetric metric,
                                double threshold) {
  if (!std::isfinite(threshold)) throw ValidationError("decision threshold must be finite");
  const auto order = rank_tiles(bag, metric);
  const std::size_t n = bag.tiles.size();
  for (std::size_t k = 0; k < n; ++k) {
    // suffix of the ranking, rebuilt and re-sorted from scratch every time
    std::vector<const TileRecord*> rest;
    rest.reserve(n - k);
    for (std::size_t i = k; i < n; ++i) rest.push_back(&bag.tiles[order[i]]);
    std::sort(rest.begin(), rest.end(),
              [](const TileRecord* a, const TileRecord* b) { return a->tile_id < b->tile_id; });
    if (aggregate_tiles(rest, spec) < threshold) return {k, false};
  }
  return {n, true};
}

std::string serialize_selection(const std::vector<WeepResult>& results,
                                const std::vector<SlideBag>& bags, RankMetric metric) {
  std::unordered_map<std::string, const SlideBag*> bag_by_id;
  for (const auto& bag : bags) bag_by_id[bag.slide_id] = &bag;

  std::string out = "slide_id,rank,tile_id,grid_x,grid_y,metric_value\n";
  for (const auto& result : results) {
    const auto bag_it = bag_by_id.find(result.slide_id);
    if (bag_it == bag_by_id.end()) {
      throw ValidationError("no tile data for slide " + result.slide_id);
    }
    std::unordered_map<std::string, const TileRecord*> tile_by_id;
    for (const auto& tile : bag_it->second->tiles) tile_by_id[tile.tile_id] = &tile;

    for (std::size_t rank = 0; rank < result.selected.size(); ++rank) {
      const auto tile_it = tile_by_id.find(result.selected[rank]);
      if (tile_it == tile_by_id.end()) {
        throw ValidationError("selected tile " + result.selected[rank] +
                              " not present in slide " + result.slide_id);
      }
      const TileRecord* tile = tile_it->second;
      out += result.slide_id;
      out += ',';
      out += std::to_string(rank + 1);
      out += ',';
      out += tile->tile_id;
      out += ',';
      out += std::to_string(tile->grid_x);
      out += ',';
      out += std::to_string(tile->grid_y);
      out += ',';
      out += csv::format_double(rank_metric_value(*tile, metric));
      out += '\n';
    }
  }
  return out;
}

std::map<std::string, std::vector<std::string>> parse_selection(std::string_view text) {
  const auto lines = csv::split_lines(text);
  std::size_t header_line = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    if (lines[i] != "slide_id,rank,tile_id,grid_x,grid_y,metric_value") {
      throw ValidationError(i + 1, "bad header '" + lines[i] +
                                       "', expected "
                                       "'slide_id,rank,tile_id,grid_x,grid_y,metric_value'");
    }
    header_line = i + 1;
    break;
  }
  if (header_line == 0) throw ValidationError("empty input: missing header row");

  std::map<std::string, std::vector<std::string>> selected;
  std::map<std::string, std::set<std::string>> seen;
  for (std::size_t i = header_line; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::size_t line = i + 1;
    const auto fields = csv::split_fields(lines[i]);
    if (fields.size() != 6) {
      throw ValidationError(line, "expected 6 fields, found " + std::to_string(fields.size()));
    }
    if (fields[0].empty()) throw ValidationError(line, "empty slide_id");
    if (fields[2].empty()) throw ValidationError(line, "empty tile_id");
    const auto rank = csv::parse_int(fields[1]);
    if (!rank || *rank < 1) {
      throw ValidationError(line, "rank must be a positive integer, got '" + fields[1] + "'");
    }
    const auto gx = csv::parse_int(fields[3]);
    const auto gy = csv::parse_int(fields[4]);
    if (!gx || !gy || *gx < 0 || *gy < 0) {
      throw ValidationError(line, "grid position must be non-negative integers");
    }
    const auto value = csv::parse_double(fields[5]);
    if (!value || !std::isfinite(*value)) {
      throw ValidationError(line, "non-numeric metric_value '" + fields[5] + "'");
    }
    auto& ids = selected[fields[0]];
    if (static_cast<std::size_t>(*rank) != ids.size() + 1) {
      throw ValidationError(line, "rank " + fields[1] + " out of order for slide '" + fields[0] +
                                      "', expected " + std::to_string(ids.size() + 1));
    }
    if (!seen[fields[0]].insert(fields[2]).second) {
      throw ValidationError(line, "duplicate tile_id '" + fields[2] + "' for slide '" + fields[0] +
                                      "'");
    }
    ids.push_back(fields[2]);
  }
  return selected;
}

std::string serialize_trajectories(const std::vector<WeepResult>& results) {
  std::string out = "slide_id,step,p\n";
  for (const auto& result : results) {
    for (std::size_t step = 0; step < result.trajectory.size(); ++step) {
      out += result.slide_id;
      out += ',';
      out += std::to_string(step);
      out += ',';
      out += csv::format_double(result.trajectory[step]);
      out += '\n';
    }
  }
  return out;
}

std::vector<SlideTrajectory> parse_trajectories(std::string_view text) {
  const auto lines = csv::split_lines(text);
  std::size_t header_line = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    if (lines[i] != "slide_id,step,p") {
      throw ValidationError(i + 1, "bad header '" + lines[i] + "', expected 'slide_id,step,p'");
    }
    header_line = i + 1;
    break;
  }
  if (header_line == 0) throw ValidationError("empty input: missing header row");

  std::vector<SlideTrajectory> out;
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = header_line; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::size_t line = i + 1;
    const auto fields = csv::split_fields(lines[i]);
    if (fields.size() != 3) {
      throw ValidationError(line, "expected 3 fields, found " + std::to_string(fields.size()));
    }
    if (fields[0].empty()) throw ValidationError(line, "empty slide_id");
    const auto step = csv::parse_int(fields[1]);
    if (!step || *step < 0) {
      throw ValidationError(line, "step must be a non-negative integer, got '" + fields[1] + "'");
    }
    const auto p = csv::parse_double(fields[2]);
    if (!p || !std::isfinite(*p)) {
      throw ValidationError(line, "non-numeric p '" + fields[2] + "'");
    }
    auto [it, inserted] = index.try_emplace(fields[0], out.size());
    if (inserted) out.push_back({fields[0], {}, 0});
    auto& traj = out[it->second];
    if (static_cast<std::size_t>(*step) != traj.p.size()) {
      throw ValidationError(line, "step " + fields[1] + " out of order for slide '" + fields[0] +
                                      "', expected " + std::to_string(traj.p.size()));
    }
    traj.p.push_back(*p);
  }
  if (out.empty()) throw ValidationError("trajectory table has no data rows");
  return out;
}

std::string serialize_slide_summaries(const std::vector<WeepResult>& results) {
  std::string out =
      "slide_id,n_tiles,n_selected,percent_selected,exhausted,initial_p,final_p,threshold\n";
  for (const auto& r : results) {
    out += r.slide_id;
    out += ',';
    out += std::to_string(r.n_tiles);
    out += ',';
    out += std::to_string(r.n_selected);
    out += ',';
    out += csv::format_double(r.percent_selected);
    out += ',';
    out += r.exhausted ? "1" : "0";
    out += ',';
    out += csv::format_double(r.initial_p);
    out += ',';
    out += csv::format_double(r.final_p);
    out += ',';
    out += csv::format_double(r.threshold);
    out += '\n';
  }
  return out;
}

std::vector<WeepResult> parse_slide_summaries(std::string_view text) {
  static const std::string kHeader =
      "slide_id,n_tiles,n_selected,percent_selected,exhausted,initial_p,final_p,threshold";
  const auto lines = csv::split_lines(text);
  std::size_t header_line = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    if (lines[i] != kHeader) {
      throw ValidationError(i + 1, "bad header '" + lines[i] + "', expected '" + kHeader + "'");
    }
    header_line = i + 1;
    break;
  }
  if (header_line == 0) throw ValidationError("empty input: missing header row");

  std::vector<WeepResult> out;
  std::set<std::string> seen;
  for (std::size_t i = header_line; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::size_t line = i + 1;
    const auto fields = csv::split_fields(lines[i]);
    if (fields.size() != 8) {
      throw ValidationError(line, "expected 8 fields, found " + std::to_string(fields.size()));
    }
    if (fields[0].empty()) throw ValidationError(line, "empty slide_id");
    if (!seen.insert(fields[0]).second) {
      throw ValidationError(line, "duplicate slide_id '" + fields[0] + "'");
    }
    WeepResult r;
    r.slide_id = fields[0];
    const auto n_tiles = csv::parse_int(fields[1]);
    const auto n_selected = csv::parse_int(fields[2]);
    if (!n_tiles || *n_tiles < 1) {
      throw ValidationError(line, "n_tiles must be a positive integer, got '" + fields[1] + "'");
    }
    if (!n_selected || *n_selected < 0 || *n_selected > *n_tiles) {
      throw ValidationError(line, "n_selected '" + fields[2] + "' out of range for n_tiles " +
                                      fields[1]);
    }
    r.n_tiles = static_cast<std::size_t>(*n_tiles);
    r.n_selected = static_cast<std::size_t>(*n_selected);
    const auto percent = csv::parse_double(fields[3]);
    if (!percent || !(*percent >= 0.0 && *percent <= 100.0)) {
      throw ValidationError(line, "percent_selected '" + fields[3] + "' outside [0,100]");
    }
    r.percent_selected = *percent;
    if (fields[4] == "0") {
      r.exhausted = false;
    } else if (fields[4] == "1") {
      r.exhausted = true;
    } else {
      throw ValidationError(line, "exhausted '" + fields[4] + "' not in {0,1}");
    }
    const auto initial_p = csv::parse_double(fields[5]);
    const auto final_p = csv::parse_double(fields[6]);
    const auto threshold = csv::parse_double(fields[7]);
    if (!initial_p || !std::isfinite(*initial_p)) {
      throw ValidationError(line, "non-numeric initial_p '" + fields[5] + "'");
    }
    if (!final_p || !std::isfinite(*final_p)) {
      throw ValidationError(line, "non-numeric final_p '" + fields[6] + "'");
    }
    if (!threshold || !std::isfinite(*threshold)) {
      throw ValidationError(line, "non-numeric threshold '" + fields[7] + "'");
    }
    r.initial_p = *initial_p;
    r.final_p = *final_p;
    r.threshold = *threshold;
    out.push_back(std::move(r));
  }
  if (out.empty()) throw ValidationError("summary table has no data rows");
  return out;
}

std::string format_summary_line(const WeepResult& r) {
  std::string out = r.slide_id;
  out += ' ';
  out += std::to_string(r.n_tiles);
  out += ' ';
  out += std::to_string(r.n_selected);
  out += ' ';
  out += csv::format_decimal(r.percent_selected);
  out += ' ';
  out += r.exhausted ? "1" : "0";
  out += ' ';
  out += csv::format_decimal(r.initial_p);
  out += ' ';
  out += csv::format_decimal(r.final_p);
  out += ' ';
  out += csv::format_decimal(r.threshold);
  return out;
}

}  // namespace weep
