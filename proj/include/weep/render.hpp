#pragma once

#include <string>
#include <vector>

#include "weep/cohort.hpp"
#include "weep/types.hpp"
#include "weep/weep.hpp"

namespace weep {

// ASCII PGM (P2) selection mask on the slide's tile grid: 0 where no tile
// exists, 128 for unselected tiles, 255 for selected tiles. Dimensions are
// (max grid_x + 1) x (max grid_y + 1). Every id in `selected` must name a
// tile of the bag. The byte layout is fixed: "P2\n<w> <h>\n255\n" and then
// each pixel row as space-separated tokens wrapped at 17 per line.
std::string render_mask(const SlideBag& bag, const std::vector<std::string>& selected);

// Score-trajectory plot: one polyline per slide over (percent of tiles
// removed, slide score), plus a dashed horizontal decision-threshold line.
// Slides listed in `highlight` are drawn emphasized on top. Every trajectory
// needs n_tiles set. Output is deterministic: fixed layout, 3-decimal
// coordinates.
std::string render_weep_plot(const std::vector<SlideTrajectory>& trajectories, double threshold,
                             const std::vector<std::string>& highlight = {});

// Histogram of percent-selected bins as an SVG bar chart. Deterministic like
// render_weep_plot.
std::string render_histogram_svg(const std::vector<HistogramBin>& bins);

}  // namespace weep
