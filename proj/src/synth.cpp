#include "weep/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

#include "json.hpp"
#include "weep/csv.hpp"

namespace weep {
namespace {

// All variate algorithms live here instead of <random>'s distribution
// templates, whose output sequences are implementation-defined and would
// break cross-platform reproducibility.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // [0,1), 53-bit resolution
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // (0,1], safe under log()
  double uniform_pos() { return 1.0 - uniform01(); }

  // [0,n), unbiased via rejection
  std::uint64_t bounded(std::uint64_t n) {
    const std::uint64_t threshold = (-n) % n;
    for (;;) {
      const std::uint64_t r = gen_();
      if (r >= threshold) return r % n;
    }
  }

  // Box-Muller, cosine branch only
  double normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Marsaglia-Tsang; alpha < 1 boosts through Gamma(alpha + 1)
  double gamma(double alpha) {
    if (alpha < 1.0) {
      const double u = uniform_pos();
      return gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
    }
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = 0.0;
      double v = 0.0;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_pos();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double beta(double a, double b) {
    const double x = gamma(a);
    const double y = gamma(b);
    const double sum = x + y;
    if (sum <= 0.0) return 0.5;
    return x / sum;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[bounded(i)]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

double round9(double v) { return std::round(v * 1e9) / 1e9; }

std::string padded(std::size_t value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%0*zu", width, value);
  return buf;
}

void check_config(const SynthConfig& c) {
  if (c.n_slides < 1) throw ValidationError("synth: n_slides must be at least 1");
  if (c.tiles_min < 1 || c.tiles_min > c.tiles_max) {
    throw ValidationError("synth: need 1 <= tiles_min <= tiles_max");
  }
  if (c.tiles_max > 100'000) throw ValidationError("synth: tiles_max too large");
  if (!(c.positive_fraction > 0.0 && c.positive_fraction < 1.0)) {
    throw ValidationError("synth: positive_fraction must lie in (0,1)");
  }
  for (const double a : {c.pos_alpha, c.pos_beta, c.neg_alpha, c.neg_beta}) {
    if (!(a > 0.0) || !std::isfinite(a)) {
      throw ValidationError("synth: Beta shape parameters must be positive and finite");
    }
  }
  if (!(c.positive_tile_fraction > 0.0 && c.positive_tile_fraction <= 1.0)) {
    throw ValidationError("synth: positive_tile_fraction must lie in (0,1]");
  }
  if (!(c.attention_gamma >= 0.0) || !std::isfinite(c.attention_gamma)) {
    throw ValidationError("synth: attention_gamma must be non-negative and finite");
  }
  if (!(c.attention_sigma >= 0.0) || !std::isfinite(c.attention_sigma)) {
    throw ValidationError("synth: attention_sigma must be non-negative and finite");
  }
}

}  // namespace

SynthConfig synth_config_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("synth config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("synth config: top level must be an object");

  SynthConfig config;
  const auto load_size = [&](const char* key, std::size_t& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_number_unsigned()) {
      throw ValidationError(std::string("synth config: ") + key +
                            " must be a non-negative integer");
    }
    out = j[key].get<std::size_t>();
  };
  const auto load_double = [&](const char* key, double& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_number()) {
      throw ValidationError(std::string("synth config: ") + key + " must be a number");
    }
    out = j[key].get<double>();
  };
  load_size("n_slides", config.n_slides);
  load_size("tiles_min", config.tiles_min);
  load_size("tiles_max", config.tiles_max);
  load_double("positive_fraction", config.positive_fraction);
  load_double("pos_alpha", config.pos_alpha);
  load_double("pos_beta", config.pos_beta);
  load_double("neg_alpha", config.neg_alpha);
  load_double("neg_beta", config.neg_beta);
  load_double("positive_tile_fraction", config.positive_tile_fraction);
  load_double("attention_gamma", config.attention_gamma);
  load_double("attention_sigma", config.attention_sigma);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) {
      throw ValidationError("synth config: seed must be a non-negative integer");
    }
    config.seed = j["seed"].get<std::uint64_t>();
  }
  static const std::set<std::string> known = {
      "n_slides",  "tiles_min", "tiles_max", "positive_fraction",
      "pos_alpha", "pos_beta",  "neg_alpha", "neg_beta",
      "positive_tile_fraction", "attention_gamma", "attention_sigma", "seed"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ValidationError("synth config: unknown key '" + key + "'");
  }
  check_config(config);
  return config;
}

std::string synth_config_to_json(const SynthConfig& config) {
  nlohmann::json j;
  j["n_slides"] = config.n_slides;
  j["tiles_min"] = config.tiles_min;
  j["tiles_max"] = config.tiles_max;
  j["positive_fraction"] = config.positive_fraction;
  j["pos_alpha"] = config.pos_alpha;
  j["pos_beta"] = config.pos_beta;
  j["neg_alpha"] = config.neg_alpha;
  j["neg_beta"] = config.neg_beta;
  j["positive_tile_fraction"] = config.positive_tile_fraction;
  j["attention_gamma"] = config.attention_gamma;
  j["attention_sigma"] = config.attention_sigma;
  j["seed"] = config.seed;
  return j.dump(2) + "\n";
}

SynthCohort generate_cohort(const SynthConfig& config) {
  check_config(config);
  Rng rng(config.seed);
  const std::size_t n = config.n_slides;

  // label assignment: shuffle slide indices, the first floor(n * fraction)
  // become positives
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  const auto n_pos = static_cast<std::size_t>(static_cast<double>(n) * config.positive_fraction);
  std::vector<int> labels(n, 0);
  for (std::size_t i = 0; i < n_pos && i < n; ++i) labels[order[i]] = 1;

  SynthCohort cohort;
  cohort.bags.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    SlideBag bag;
    bag.slide_id = "slide_" + padded(s + 1, 4);
    bag.label = labels[s];

    const std::size_t n_tiles =
        config.tiles_min + static_cast<std::size_t>(rng.bounded(
                               static_cast<std::uint64_t>(config.tiles_max - config.tiles_min + 1)));

    // scatter the tiles over a grid with about twice as many cells as tiles
    const auto side = static_cast<std::size_t>(
        std::ceil(std::sqrt(2.0 * static_cast<double>(n_tiles))));
    std::vector<std::size_t> cells(side * side);
    std::iota(cells.begin(), cells.end(), std::size_t{0});
    rng.shuffle(cells);

    const std::size_t n_evidence =
        labels[s] == 1 ? std::min<std::size_t>(
                             n_tiles, static_cast<std::size_t>(std::ceil(
                                          config.positive_tile_fraction *
                                          static_cast<double>(n_tiles))))
                       : 0;

    bag.tiles.reserve(n_tiles);
    for (std::size_t t = 0; t < n_tiles; ++t) {
      TileRecord tile;
      tile.grid_x = static_cast<int>(cells[t] % side);
      tile.grid_y = static_cast<int>(cells[t] / side);
      tile.tile_id = padded(static_cast<std::size_t>(tile.grid_x), 3) + ":" +
                     padded(static_cast<std::size_t>(tile.grid_y), 3);

      const bool evidence = t < n_evidence;
      double score = evidence ? rng.beta(config.pos_alpha, config.pos_beta)
                              : rng.beta(config.neg_alpha, config.neg_beta);
      score = round9(std::clamp(score, 0.0, 1.0));
      tile.score = score;

      double attention = std::pow(std::max(score, 1e-12), config.attention_gamma) *
                         std::exp(config.attention_sigma * rng.normal());
      attention = round9(attention);
      if (attention < 1e-9) attention = 1e-9;
      tile.attention_raw = attention;
      bag.tiles.push_back(std::move(tile));
    }
    cohort.labels[bag.slide_id] = labels[s];
    cohort.bags.push_back(std::move(bag));
  }
  return cohort;
}

}  // namespace weep
