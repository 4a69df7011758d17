#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "weep/types.hpp"

namespace weep {

// Synthetic cohort layout. Tile scores are Beta-distributed: tiles carrying
// class evidence draw from Beta(pos_alpha, pos_beta), the rest from
// Beta(neg_alpha, neg_beta). Raw attention follows score^attention_gamma
// times a lognormal factor exp(Normal(0, attention_sigma^2)).
struct SynthConfig {
  std::size_t n_slides = 100;
  std::size_t tiles_min = 60;
  std::size_t tiles_max = 120;
  double positive_fraction = 0.5;  // fraction of slides labeled 1
  double pos_alpha = 8.0;
  double pos_beta = 2.0;
  double neg_alpha = 2.0;
  double neg_beta = 8.0;
  double positive_tile_fraction = 0.3;  // evidence tiles per positive slide
  double attention_gamma = 2.0;
  double attention_sigma = 0.25;
  std::uint64_t seed = 1;
};

SynthConfig synth_config_from_json(std::string_view text);
std::string synth_config_to_json(const SynthConfig& config);

struct SynthCohort {
  std::vector<SlideBag> bags;  // slide ids slide_0001, slide_0002, ...
  std::map<std::string, int> labels;
};

// Deterministic generation: one sequential PRNG stream seeded by
// config.seed, with all distributions implemented locally (mt19937_64 bits,
// Box-Muller normals, Marsaglia-Tsang gammas), so the same config yields the
// identical cohort on every platform. Scores and attention round to 9
// decimals.
SynthCohort generate_cohort(const SynthConfig& config);

}  // namespace weep
