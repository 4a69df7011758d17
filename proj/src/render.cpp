#include "weep/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "weep/csv.hpp"

namespace weep {
namespace {

constexpr int kWidth = 800;
constexpr int kHeight = 500;
constexpr double kLeft = 70.0;
constexpr double kRight = 770.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 440.0;

std::string fmt3(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (const char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      case '\'':
        out += "&apos;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string svg_open() {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kWidth) +
         "\" height=\"" + std::to_string(kHeight) + "\" viewBox=\"0 0 " + std::to_string(kWidth) +
         " " + std::to_string(kHeight) + "\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(kWidth) + "\" height=\"" +
         std::to_string(kHeight) + "\" fill=\"#ffffff\"/>\n";
  return out;
}

std::string axes() {
  std::string out;
  out += "<line x1=\"" + fmt3(kLeft) + "\" y1=\"" + fmt3(kBottom) + "\" x2=\"" + fmt3(kRight) +
         "\" y2=\"" + fmt3(kBottom) + "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  out += "<line x1=\"" + fmt3(kLeft) + "\" y1=\"" + fmt3(kTop) + "\" x2=\"" + fmt3(kLeft) +
         "\" y2=\"" + fmt3(kBottom) + "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  return out;
}

std::string text_at(double x, double y, const std::string& anchor, const std::string& content,
                    const std::string& extra = {}) {
  return "<text x=\"" + fmt3(x) + "\" y=\"" + fmt3(y) +
         "\" font-family=\"monospace\" font-size=\"12\" fill=\"#333333\" text-anchor=\"" + anchor +
         "\"" + extra + ">" + xml_escape(content) + "</text>\n";
}

}  // namespace

std::string render_mask(const SlideBag& bag, const std::vector<std::string>& selected) {
  if (bag.tiles.empty()) throw ValidationError("slide " + bag.slide_id + " has no tiles");

  std::set<std::string> known;
  for (const auto& tile : bag.tiles) known.insert(tile.tile_id);
  std::set<std::string> wanted;
  for (const auto& id : selected) {
    if (!known.count(id)) {
      throw ValidationError("selected tile '" + id + "' not present in slide " + bag.slide_id);
    }
    wanted.insert(id);
  }

  long long width = 0;
  long long height = 0;
  for (const auto& tile : bag.tiles) {
    width = std::max(width, static_cast<long long>(tile.grid_x) + 1);
    height = std::max(height, static_cast<long long>(tile.grid_y) + 1);
  }
  if (width * height > 100'000'000LL) {
    throw ValidationError("mask dimensions " + std::to_string(width) + "x" +
                          std::to_string(height) + " too large for slide " + bag.slide_id);
  }

  std::vector<int> pixels(static_cast<std::size_t>(width * height), 0);
  for (const auto& tile : bag.tiles) {
    const auto idx = static_cast<std::size_t>(tile.grid_y) * static_cast<std::size_t>(width) +
                     static_cast<std::size_t>(tile.grid_x);
    pixels[idx] = wanted.count(tile.tile_id) ? 255 : 128;
  }

  std::string out = "P2\n";
  out += std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  for (long long y = 0; y < height; ++y) {
    int in_line = 0;
    for (long long x = 0; x < width; ++x) {
      if (in_line == 17) {
        out += '\n';
        in_line = 0;
      }
      if (in_line) out += ' ';
      out += std::to_string(pixels[static_cast<std::size_t>(y * width + x)]);
      ++in_line;
    }
    out += '\n';
  }
  return out;
}

std::string render_weep_plot(const std::vector<SlideTrajectory>& trajectories, double threshold,
                             const std::vector<std::string>& highlight) {
  if (trajectories.empty()) throw ValidationError("no trajectories to plot");
  if (!std::isfinite(threshold)) throw ValidationError("decision threshold must be finite");
  for (const auto& traj : trajectories) {
    if (traj.p.empty()) throw ValidationError("empty trajectory for slide " + traj.slide_id);
    if (traj.n_tiles < 1) throw ValidationError("trajectory for slide " + traj.slide_id +
                                                " has no tile count");
    if (traj.p.size() > traj.n_tiles + 1) {
      throw ValidationError("trajectory for slide " + traj.slide_id + " has " +
                            std::to_string(traj.p.size()) + " steps but only " +
                            std::to_string(traj.n_tiles) + " tiles");
    }
    for (const double p : traj.p) {
      if (!std::isfinite(p)) throw ValidationError("non-finite score for slide " + traj.slide_id);
    }
  }

  const std::set<std::string> emphasized(highlight.begin(), highlight.end());
  const auto x_of = [](double percent) { return kLeft + (kRight - kLeft) * percent / 100.0; };
  const auto y_of = [](double p) {
    const double clamped = std::clamp(p, 0.0, 1.0);
    return kBottom - (kBottom - kTop) * clamped;
  };

  std::string out = svg_open();
  out += axes();
  for (int pct = 0; pct <= 100; pct += 20) {
    const double x = x_of(pct);
    out += "<line x1=\"" + fmt3(x) + "\" y1=\"" + fmt3(kBottom) + "\" x2=\"" + fmt3(x) +
           "\" y2=\"" + fmt3(kBottom + 5.0) + "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    out += text_at(x, kBottom + 20.0, "middle", std::to_string(pct));
  }
  for (int i = 0; i <= 10; i += 2) {
    const double v = static_cast<double>(i) / 10.0;
    const double y = y_of(v);
    out += "<line x1=\"" + fmt3(kLeft - 5.0) + "\" y1=\"" + fmt3(y) + "\" x2=\"" + fmt3(kLeft) +
           "\" y2=\"" + fmt3(y) + "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    char label[8];
    std::snprintf(label, sizeof(label), "%.1f", v);
    out += text_at(kLeft - 10.0, y + 4.0, "end", label);
  }
  out += text_at((kLeft + kRight) / 2.0, kBottom + 45.0, "middle", "tiles removed (%)");
  out += text_at(20.0, (kTop + kBottom) / 2.0, "middle", "slide score",
                 " transform=\"rotate(-90 20 " + fmt3((kTop + kBottom) / 2.0) + ")\"");

  const auto polyline = [&](const SlideTrajectory& traj, bool strong) {
    std::string points;
    for (std::size_t i = 0; i < traj.p.size(); ++i) {
      if (i) points += ' ';
      const double percent =
          100.0 * static_cast<double>(i) / static_cast<double>(traj.n_tiles);
      points += fmt3(x_of(percent)) + "," + fmt3(y_of(traj.p[i]));
    }
    return "<polyline fill=\"none\" stroke=\"" + std::string(strong ? "#1f6feb" : "#9aa3ad") +
           "\" stroke-width=\"" + (strong ? "2" : "1") + "\" stroke-opacity=\"" +
           (strong ? "1.0" : "0.7") + "\" data-slide=\"" + xml_escape(traj.slide_id) +
           "\" points=\"" + points + "\"/>\n";
  };
  for (const auto& traj : trajectories) {
    if (!emphasized.count(traj.slide_id)) out += polyline(traj, false);
  }
  for (const auto& traj : trajectories) {
    if (emphasized.count(traj.slide_id)) out += polyline(traj, true);
  }

  if (threshold >= 0.0 && threshold <= 1.0) {
    const double y = y_of(threshold);
    out += "<line x1=\"" + fmt3(kLeft) + "\" y1=\"" + fmt3(y) + "\" x2=\"" + fmt3(kRight) +
           "\" y2=\"" + fmt3(y) +
           "\" stroke=\"#c0392b\" stroke-width=\"1\" stroke-dasharray=\"6 4\"/>\n";
    out += text_at(kRight, y - 6.0, "end", "threshold = " + csv::format_decimal(threshold),
                   " fill=\"#c0392b\"");
  }
  out += "</svg>\n";
  return out;
}

std::string render_histogram_svg(const std::vector<HistogramBin>& bins) {
  if (bins.empty()) throw ValidationError("no histogram bins to plot");
  double lo = bins.front().lo;
  double hi = bins.front().hi;
  std::size_t max_count = 0;
  for (const auto& bin : bins) {
    if (!(bin.hi > bin.lo)) throw ValidationError("histogram bin has non-positive width");
    lo = std::min(lo, bin.lo);
    hi = std::max(hi, bin.hi);
    max_count = std::max(max_count, bin.count);
  }
  const std::size_t top = std::max<std::size_t>(max_count, 1);

  const auto x_of = [&](double v) { return kLeft + (kRight - kLeft) * (v - lo) / (hi - lo); };
  const auto y_of = [&](double count) {
    return kBottom - (kBottom - kTop) * count / static_cast<double>(top);
  };

  std::string out = svg_open();
  out += axes();

  const std::size_t x_step = (bins.size() + 9) / 10;  // at most ~10 edge labels
  for (std::size_t i = 0; i < bins.size(); i += x_step) {
    const double x = x_of(bins[i].lo);
    out += "<line x1=\"" + fmt3(x) + "\" y1=\"" + fmt3(kBottom) + "\" x2=\"" + fmt3(x) +
           "\" y2=\"" + fmt3(kBottom + 5.0) + "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    out += text_at(x, kBottom + 20.0, "middle", csv::format_double(bins[i].lo));
  }
  out += "<line x1=\"" + fmt3(kRight) + "\" y1=\"" + fmt3(kBottom) + "\" x2=\"" + fmt3(kRight) +
         "\" y2=\"" + fmt3(kBottom + 5.0) + "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  out += text_at(kRight, kBottom + 20.0, "middle", csv::format_double(hi));

  const std::size_t y_step = std::max<std::size_t>(1, (top + 4) / 5);
  for (std::size_t c = 0; c <= top; c += y_step) {
    const double y = y_of(static_cast<double>(c));
    out += "<line x1=\"" + fmt3(kLeft - 5.0) + "\" y1=\"" + fmt3(y) + "\" x2=\"" + fmt3(kLeft) +
           "\" y2=\"" + fmt3(y) + "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    out += text_at(kLeft - 10.0, y + 4.0, "end", std::to_string(c));
  }
  out += text_at((kLeft + kRight) / 2.0, kBottom + 45.0, "middle", "tiles selected (%)");
  out += text_at(20.0, (kTop + kBottom) / 2.0, "middle", "slides",
                 " transform=\"rotate(-90 20 " + fmt3((kTop + kBottom) / 2.0) + ")\"");

  for (const auto& bin : bins) {
    if (bin.count == 0) continue;
    const double x = x_of(bin.lo);
    const double w = x_of(bin.hi) - x;
    const double y = y_of(static_cast<double>(bin.count));
    out += "<rect x=\"" + fmt3(x) + "\" y=\"" + fmt3(y) + "\" width=\"" + fmt3(w) +
           "\" height=\"" + fmt3(kBottom - y) +
           "\" fill=\"#5b8db8\" stroke=\"#2c4a66\" stroke-width=\"1\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace weep
