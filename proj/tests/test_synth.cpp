#include "weep/synth.hpp"

#include <cmath>
#include <set>

#include "doctest.h"
#include "weep/tile_store.hpp"

using namespace weep;

TEST_CASE("generate_cohort is deterministic for a fixed config") {
  SynthConfig config;
  config.n_slides = 12;
  config.tiles_min = 5;
  config.tiles_max = 15;
  config.seed = 99;

  const auto a = generate_cohort(config);
  const auto b = generate_cohort(config);
  CHECK(a.labels == b.labels);
  REQUIRE(a.bags.size() == b.bags.size());
  for (std::size_t i = 0; i < a.bags.size(); ++i) CHECK(a.bags[i] == b.bags[i]);
  CHECK(serialize_tile_table(a.bags) == serialize_tile_table(b.bags));
}

TEST_CASE("different seeds generate different cohorts") {
  SynthConfig config;
  config.n_slides = 6;
  config.tiles_min = 8;
  config.tiles_max = 8;
  config.seed = 1;
  auto other = config;
  other.seed = 2;
  CHECK(serialize_tile_table(generate_cohort(config).bags) !=
        serialize_tile_table(generate_cohort(other).bags));
}

TEST_CASE("cohort shape follows the config") {
  SynthConfig config;
  config.n_slides = 100;
  config.tiles_min = 10;
  config.tiles_max = 20;
  config.positive_fraction = 0.5;
  config.seed = 7;

  const auto cohort = generate_cohort(config);
  REQUIRE(cohort.bags.size() == 100);
  CHECK(cohort.bags.front().slide_id == "slide_0001");
  CHECK(cohort.bags.back().slide_id == "slide_0100");

  std::size_t positives = 0;
  for (const auto& [id, label] : cohort.labels) positives += static_cast<std::size_t>(label);
  CHECK(positives == 50);  // floor(100 * 0.5)

  for (const auto& bag : cohort.bags) {
    CHECK(bag.tiles.size() >= 10);
    CHECK(bag.tiles.size() <= 20);
    REQUIRE(bag.label.has_value());
    CHECK(cohort.labels.at(bag.slide_id) == *bag.label);
  }
}

TEST_CASE("generated tiles have valid scores, attention, and unique cells") {
  SynthConfig config;
  config.n_slides = 20;
  config.tiles_min = 30;
  config.tiles_max = 60;
  config.seed = 3;

  const auto cohort = generate_cohort(config);
  for (const auto& bag : cohort.bags) {
    std::set<std::pair<int, int>> cells;
    std::set<std::string> ids;
    for (const auto& tile : bag.tiles) {
      CHECK(tile.score >= 0.0);
      CHECK(tile.score <= 1.0);
      REQUIRE(tile.attention_raw.has_value());
      CHECK(*tile.attention_raw >= 1e-9);
      CHECK(cells.insert({tile.grid_x, tile.grid_y}).second);
      CHECK(ids.insert(tile.tile_id).second);
      // scores and attention are rounded to 9 decimals
      CHECK(tile.score == std::round(tile.score * 1e9) / 1e9);
      CHECK(*tile.attention_raw == std::round(*tile.attention_raw * 1e9) / 1e9);
    }
    // grid side leaves roughly half the cells empty
    const auto side = static_cast<int>(std::ceil(std::sqrt(2.0 * bag.tiles.size())));
    for (const auto& tile : bag.tiles) {
      CHECK(tile.grid_x < side);
      CHECK(tile.grid_y < side);
    }
  }
}

TEST_CASE("positive slides score clearly above negative slides on average") {
  SynthConfig config;
  config.n_slides = 60;
  config.seed = 5;
  const auto cohort = generate_cohort(config);

  double pos_sum = 0.0;
  double neg_sum = 0.0;
  std::size_t pos_n = 0;
  std::size_t neg_n = 0;
  for (const auto& bag : cohort.bags) {
    double best = 0.0;
    for (const auto& tile : bag.tiles) best = std::max(best, tile.score);
    if (*bag.label == 1) {
      pos_sum += best;
      ++pos_n;
    } else {
      neg_sum += best;
      ++neg_n;
    }
  }
  REQUIRE(pos_n > 0);
  REQUIRE(neg_n > 0);
  CHECK(pos_sum / static_cast<double>(pos_n) > neg_sum / static_cast<double>(neg_n));
}

TEST_CASE("synth config round-trips through JSON") {
  SynthConfig config;
  config.n_slides = 42;
  config.tiles_min = 3;
  config.tiles_max = 9;
  config.positive_fraction = 0.25;
  config.pos_alpha = 6.5;
  config.attention_sigma = 0.5;
  config.seed = 1234567;

  const auto back = synth_config_from_json(synth_config_to_json(config));
  CHECK(back.n_slides == 42);
  CHECK(back.tiles_min == 3);
  CHECK(back.tiles_max == 9);
  CHECK(back.positive_fraction == 0.25);
  CHECK(back.pos_alpha == 6.5);
  CHECK(back.pos_beta == config.pos_beta);
  CHECK(back.attention_sigma == 0.5);
  CHECK(back.seed == 1234567);
}

TEST_CASE("synth config JSON is validated") {
  CHECK_THROWS_AS(synth_config_from_json("nope"), ValidationError);
  CHECK_THROWS_AS(synth_config_from_json("[]"), ValidationError);
  CHECK_THROWS_AS(synth_config_from_json(R"({"bogus_key": 1})"), ValidationError);
  CHECK_THROWS_AS(synth_config_from_json(R"({"n_slides": -3})"), ValidationError);
  CHECK_THROWS_AS(synth_config_from_json(R"({"n_slides": 0})"), ValidationError);
  CHECK_THROWS_AS(synth_config_from_json(R"({"tiles_min": 9, "tiles_max": 4})"), ValidationError);
  CHECK_THROWS_AS(synth_config_from_json(R"({"positive_fraction": 1.0})"), ValidationError);
  CHECK_THROWS_AS(synth_config_from_json(R"({"pos_alpha": 0})"), ValidationError);
  CHECK_THROWS_AS(synth_config_from_json(R"({"positive_tile_fraction": 0})"), ValidationError);
  CHECK_THROWS_AS(synth_config_from_json(R"({"seed": "x"})"), ValidationError);
  CHECK(synth_config_from_json("{}").n_slides == SynthConfig{}.n_slides);
}

TEST_CASE("generate_cohort rejects invalid configs directly") {
  SynthConfig config;
  config.tiles_min = 0;
  CHECK_THROWS_AS(generate_cohort(config), ValidationError);
  config = SynthConfig{};
  config.attention_gamma = -1.0;
  CHECK_THROWS_AS(generate_cohort(config), ValidationError);
}
