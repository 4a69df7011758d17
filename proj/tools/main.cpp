#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "weep/aggregate.hpp"
#include "weep/cohort.hpp"
#include "weep/csv.hpp"
#include "weep/manifest.hpp"
#include "weep/render.hpp"
#include "weep/synth.hpp"
#include "weep/threshold.hpp"
#include "weep/tile_store.hpp"
#include "weep/types.hpp"
#include "weep/version.hpp"
#include "weep/weep.hpp"

namespace {

using namespace weep;
namespace fs = std::filesystem;

// Command-line misuse (bad flag combinations, bad selector strings): exit 1.
// ValidationError (bad file contents, unreadable files): exit 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file '" + path.string() + "'");
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// Atomic write: stage to a sibling temp file, then rename into place, so a
// failed run never leaves a half-written data file behind.
void write_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write file '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw ValidationError("failed writing file '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw ValidationError("cannot move '" + tmp.string() + "' into place: " + ec.message());
  }
}

template <typename F>
auto with_file(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void require_safe_slide_id(const std::string& slide_id) {
  if (slide_id.empty() || slide_id == "." || slide_id == ".." ||
      slide_id.find('/') != std::string::npos || slide_id.find('\\') != std::string::npos) {
    throw ValidationError("slide id '" + slide_id + "' is not filesystem-safe");
  }
}

// Index-stealing worker pool; results land in caller-preallocated slots, so
// output order never depends on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  const unsigned n_workers = static_cast<unsigned>(
      std::min<std::size_t>(jobs, n));
  std::vector<std::thread> workers;
  workers.reserve(n_workers);
  for (unsigned t = 0; t < n_workers; ++t) {
    workers.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& worker : workers) worker.join();
  if (error) std::rethrow_exception(error);
}

// --- input bundles -----------------------------------------------------------

struct TilesOptions {
  std::string tiles;
  std::string labels;
  std::string features;
  std::string params;
};

void add_tiles_options(CLI::App* cmd, TilesOptions& o, bool with_side_tables = true) {
  cmd->add_option("--tiles", o.tiles, "tile table csv")->required();
  if (with_side_tables) {
    cmd->add_option("--labels", o.labels, "slide label csv");
    cmd->add_option("--features", o.features, "tile feature csv (for attn-pool)");
    cmd->add_option("--params", o.params, "attention pooling parameter file (for attn-pool)");
  }
}

struct Dataset {
  std::vector<SlideBag> bags;
  std::optional<std::map<std::string, int>> labels;
  std::optional<AttentionParams> params;
  std::size_t feature_rows = 0;
  Eigen::Index feature_dim = -1;
};

Dataset load_dataset(const TilesOptions& o) {
  Dataset d;
  d.bags = with_file(o.tiles, [&] { return parse_tile_table(read_file(o.tiles)); });
  if (!o.labels.empty()) {
    d.labels = with_file(o.labels, [&] { return parse_labels(read_file(o.labels)); });
    attach_labels(d.bags, *d.labels);
  }
  if (!o.features.empty()) {
    const FeatureTable table =
        with_file(o.features, [&] { return parse_features(read_file(o.features)); });
    d.feature_rows = table.size();
    d.feature_dim = table.begin()->second.size();
    with_file(o.features, [&] {
      attach_features(d.bags, table);
      return 0;
    });
  }
  if (!o.params.empty()) {
    d.params = with_file(o.params, [&] { return parse_attention_params(read_file(o.params)); });
    if (d.feature_dim >= 0 && d.params->V.cols() != d.feature_dim) {
      throw ValidationError("feature dimension " + std::to_string(d.feature_dim) +
                            " does not match attention params d=" +
                            std::to_string(d.params->V.cols()));
    }
  }
  return d;
}

AggregatorSpec resolve_aggregator(const std::string& selector, const TilesOptions& o,
                                  const Dataset& d) {
  AggregatorSpec spec;
  try {
    spec = AggregatorSpec::parse(selector);
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }
  if (spec.kind == AggregatorKind::AttentionPooling) {
    if (o.params.empty()) throw UsageError("aggregator attn-pool requires --params");
    if (o.features.empty()) throw UsageError("aggregator attn-pool requires --features");
    spec.params = *d.params;
  }
  return spec;
}

RankMetric resolve_metric(const std::string& name) {
  try {
    return parse_rank_metric(name);
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }
}

CohortFilter resolve_filter(const std::string& name) {
  try {
    return parse_cohort_filter(name);
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }
}

// --- manifest ------------------------------------------------------------------

struct ManifestBuilder {
  RunManifest manifest;

  explicit ManifestBuilder(std::string subcommand) {
    manifest.subcommand = std::move(subcommand);
    manifest.tool_version = std::string(kVersion);
  }

  void input(const std::string& path) {
    if (!path.empty()) manifest.inputs.emplace_back(path, fnv1a64_file(path));
  }

  void inputs(const TilesOptions& o) {
    input(o.tiles);
    input(o.labels);
    input(o.features);
    input(o.params);
  }

  void param(const std::string& key, nlohmann::json value) {
    manifest.parameters[key] = std::move(value);
  }

  void write(const fs::path& out_dir) { write_file(out_dir / "manifest.json", manifest.to_json()); }
};

// --- shared pipeline stages ------------------------------------------------------

std::vector<SlideScore> compute_scores(const std::vector<SlideBag>& bags,
                                       const AggregatorSpec& spec, unsigned jobs) {
  std::vector<SlideScore> scores(bags.size());
  parallel_for(bags.size(), jobs, [&](std::size_t i) {
    scores[i] = {bags[i].slide_id, aggregate_slide(bags[i], spec)};
  });
  std::sort(scores.begin(), scores.end(),
            [](const SlideScore& a, const SlideScore& b) { return a.slide_id < b.slide_id; });
  return scores;
}

DecisionThreshold calibrate(const std::vector<SlideScore>& scores,
                            const std::map<std::string, int>& labels,
                            std::vector<RocPoint>* points_out) {
  std::vector<double> values;
  std::vector<int> classes;
  values.reserve(scores.size());
  classes.reserve(scores.size());
  for (const auto& row : scores) {
    const auto it = labels.find(row.slide_id);
    if (it == labels.end()) throw ValidationError("no label for slide " + row.slide_id);
    values.push_back(row.score);
    classes.push_back(it->second);
  }
  if (points_out) *points_out = roc_points(values, classes);
  return youden_threshold(values, classes);
}

std::vector<WeepResult> run_selection(const std::vector<SlideBag>& bags,
                                      const AggregatorSpec& spec, RankMetric metric,
                                      double threshold, unsigned jobs) {
  std::vector<WeepResult> results(bags.size());
  parallel_for(bags.size(), jobs, [&](std::size_t i) {
    results[i] = weep_select(bags[i], spec, metric, threshold);
  });
  std::sort(results.begin(), results.end(),
            [](const WeepResult& a, const WeepResult& b) { return a.slide_id < b.slide_id; });
  return results;
}

std::string threshold_line(const DecisionThreshold& t) {
  return "O=" + csv::format_decimal(t.value) + " J=" + csv::format_decimal(t.j) +
         " sens=" + csv::format_decimal(t.sensitivity) +
         " spec=" + csv::format_decimal(t.specificity);
}

std::string report_line(const CohortSummary& s) {
  return "slides=" + std::to_string(s.n_slides) +
         " mean_percent=" + csv::format_decimal(s.mean_percent) +
         " ci_low=" + csv::format_decimal(s.ci_low) +
         " ci_high=" + csv::format_decimal(s.ci_high);
}

// --- subcommand options ------------------------------------------------------

struct ValidateOptions {
  TilesOptions data;
  std::string out;
};

struct AggregateOptions {
  TilesOptions data;
  std::string agg = "p75";
  std::string out;
};

struct ThresholdOptions {
  std::string scores;
  std::string labels;
  std::string out;
};

struct SelectOptions {
  TilesOptions data;
  std::string agg = "p75";
  std::string metric = "score";
  double threshold = 0.0;
  std::string threshold_from;
  unsigned jobs = 1;
  std::string out;
  CLI::Option* threshold_opt = nullptr;
};

struct ReportOptions {
  std::string slides;
  std::string labels;
  std::string filter = "label-positive-and-predicted-positive";
  double bin_width = 5.0;
  std::string out;
};

struct MaskOptions {
  std::string tiles;
  std::string selection;
  std::string slide;
  unsigned jobs = 1;
  std::string out;
};

struct PlotOptions {
  std::string trajectories;
  std::string slides;
  std::string histogram;
  std::vector<std::string> highlight;
  std::string out;
};

struct SynthCliOptions {
  SynthConfig staged;
  std::string config_path;
  CLI::Option* n_slides = nullptr;
  CLI::Option* tiles_min = nullptr;
  CLI::Option* tiles_max = nullptr;
  CLI::Option* positive_fraction = nullptr;
  CLI::Option* pos_alpha = nullptr;
  CLI::Option* pos_beta = nullptr;
  CLI::Option* neg_alpha = nullptr;
  CLI::Option* neg_beta = nullptr;
  CLI::Option* positive_tile_fraction = nullptr;
  CLI::Option* attention_gamma = nullptr;
  CLI::Option* attention_sigma = nullptr;
  CLI::Option* seed = nullptr;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "synthetic cohort config file (overridden by flags)");
    n_slides = cmd->add_option("--n-slides", staged.n_slides, "number of slides");
    tiles_min = cmd->add_option("--tiles-min", staged.tiles_min, "minimum tiles per slide");
    tiles_max = cmd->add_option("--tiles-max", staged.tiles_max, "maximum tiles per slide");
    positive_fraction = cmd->add_option("--positive-fraction", staged.positive_fraction,
                                        "fraction of slides labeled 1");
    pos_alpha = cmd->add_option("--pos-alpha", staged.pos_alpha, "Beta alpha, evidence tiles");
    pos_beta = cmd->add_option("--pos-beta", staged.pos_beta, "Beta beta, evidence tiles");
    neg_alpha = cmd->add_option("--neg-alpha", staged.neg_alpha, "Beta alpha, background tiles");
    neg_beta = cmd->add_option("--neg-beta", staged.neg_beta, "Beta beta, background tiles");
    positive_tile_fraction =
        cmd->add_option("--positive-tile-fraction", staged.positive_tile_fraction,
                        "evidence tile fraction within positive slides");
    attention_gamma = cmd->add_option("--attention-gamma", staged.attention_gamma,
                                      "attention = score^gamma * lognormal noise");
    attention_sigma =
        cmd->add_option("--attention-sigma", staged.attention_sigma, "attention noise sigma");
    seed = cmd->add_option("--seed", staged.seed, "PRNG seed");
  }

  SynthConfig resolve() const {
    SynthConfig config;
    if (!config_path.empty()) {
      config = with_file(config_path,
                         [&] { return synth_config_from_json(read_file(config_path)); });
    }
    if (n_slides->count()) config.n_slides = staged.n_slides;
    if (tiles_min->count()) config.tiles_min = staged.tiles_min;
    if (tiles_max->count()) config.tiles_max = staged.tiles_max;
    if (positive_fraction->count()) config.positive_fraction = staged.positive_fraction;
    if (pos_alpha->count()) config.pos_alpha = staged.pos_alpha;
    if (pos_beta->count()) config.pos_beta = staged.pos_beta;
    if (neg_alpha->count()) config.neg_alpha = staged.neg_alpha;
    if (neg_beta->count()) config.neg_beta = staged.neg_beta;
    if (positive_tile_fraction->count()) {
      config.positive_tile_fraction = staged.positive_tile_fraction;
    }
    if (attention_gamma->count()) config.attention_gamma = staged.attention_gamma;
    if (attention_sigma->count()) config.attention_sigma = staged.attention_sigma;
    if (seed->count()) config.seed = staged.seed;
    return config;
  }
};

struct SimulateOptions {
  SynthCliOptions synth;
  std::string out;
};

struct PipelineOptions {
  bool simulate = false;
  SynthCliOptions synth;
  TilesOptions data;
  std::string agg = "p75";
  std::string metric = "score";
  std::string filter = "label-positive-and-predicted-positive";
  double bin_width = 5.0;
  unsigned jobs = 1;
  std::string out;
  CLI::Option* tiles_opt = nullptr;
};

// --- subcommand handlers ------------------------------------------------------

int run_validate(const ValidateOptions& o) {
  const Dataset d = load_dataset(o.data);

  std::size_t n_tiles = 0;
  std::size_t with_attention = 0;
  std::size_t with_features = 0;
  for (const auto& bag : d.bags) {
    n_tiles += bag.tiles.size();
    for (const auto& tile : bag.tiles) {
      if (tile.attention_raw) ++with_attention;
      if (tile.features) ++with_features;
    }
  }

  std::string attention = "none";
  if (with_attention == n_tiles) {
    attention = "all";
  } else if (with_attention > 0) {
    attention = std::to_string(with_attention) + "/" + std::to_string(n_tiles);
  }
  std::cout << "tiles: " << d.bags.size() << " slides, " << n_tiles
            << " tiles, attention: " << attention << "\n";
  if (d.labels) {
    std::size_t positive = 0;
    std::size_t covered = 0;
    for (const auto& bag : d.bags) {
      if (bag.label) ++covered;
    }
    for (const auto& [slide_id, label] : *d.labels) positive += static_cast<std::size_t>(label);
    std::cout << "labels: " << d.labels->size() << " entries (" << positive << " positive), "
              << covered << "/" << d.bags.size() << " slides covered\n";
  }
  if (d.feature_rows > 0) {
    std::cout << "features: " << d.feature_rows << " vectors, d=" << d.feature_dim << ", "
              << with_features << "/" << n_tiles << " tiles covered\n";
  }
  if (d.params) {
    std::cout << "params: k=" << d.params->V.rows() << ", d=" << d.params->V.cols() << "\n";
  }
  std::cout << "ok\n";

  if (!o.out.empty()) {
    ManifestBuilder m("validate");
    m.inputs(o.data);
    m.write(o.out);
  }
  return 0;
}

int run_aggregate(const AggregateOptions& o) {
  const Dataset d = load_dataset(o.data);
  const AggregatorSpec spec = resolve_aggregator(o.agg, o.data, d);
  const auto scores = compute_scores(d.bags, spec, 1);
  write_file(fs::path(o.out) / "scores.csv", serialize_slide_scores(scores));

  ManifestBuilder m("aggregate");
  m.inputs(o.data);
  m.param("aggregator", spec.name());
  m.write(o.out);

  std::cout << "wrote " << scores.size() << " slide scores\n";
  return 0;
}

int run_threshold(const ThresholdOptions& o) {
  const auto scores =
      with_file(o.scores, [&] { return parse_slide_scores(read_file(o.scores)); });
  const auto labels = with_file(o.labels, [&] { return parse_labels(read_file(o.labels)); });

  std::vector<RocPoint> points;
  const DecisionThreshold best = calibrate(scores, labels, &points);

  if (!o.out.empty()) {
    write_file(fs::path(o.out) / "roc.csv", serialize_roc(points));
    write_file(fs::path(o.out) / "threshold.csv", serialize_threshold(best));
    ManifestBuilder m("threshold");
    m.input(o.scores);
    m.input(o.labels);
    m.write(o.out);
  }
  std::cout << threshold_line(best) << "\n";
  return 0;
}

int run_select(const SelectOptions& o) {
  const bool has_value = o.threshold_opt->count() > 0;
  const bool has_from = !o.threshold_from.empty();
  if (has_value == has_from) {
    throw UsageError("provide exactly one of --threshold or --threshold-from");
  }
  if (o.jobs < 1) throw UsageError("--jobs must be at least 1");

  const Dataset d = load_dataset(o.data);
  const AggregatorSpec spec = resolve_aggregator(o.agg, o.data, d);
  const RankMetric metric = resolve_metric(o.metric);
  const double threshold =
      has_from ? with_file(o.threshold_from,
                           [&] { return parse_threshold_csv(read_file(o.threshold_from)); })
                     .value
               : o.threshold;

  const auto results = run_selection(d.bags, spec, metric, threshold, o.jobs);

  write_file(fs::path(o.out) / "selection.csv", serialize_selection(results, d.bags, metric));
  write_file(fs::path(o.out) / "trajectory.csv", serialize_trajectories(results));
  write_file(fs::path(o.out) / "slides.csv", serialize_slide_summaries(results));

  ManifestBuilder m("select");
  m.inputs(o.data);
  if (has_from) m.input(o.threshold_from);
  m.param("aggregator", spec.name());
  m.param("metric", rank_metric_name(metric));
  m.param("threshold", threshold);
  m.param("jobs", o.jobs);
  m.write(o.out);

  for (const auto& result : results) std::cout << format_summary_line(result) << "\n";
  return 0;
}

int run_report(const ReportOptions& o) {
  const CohortFilter filter = resolve_filter(o.filter);
  if (!(o.bin_width > 0.0 && o.bin_width <= 100.0)) {
    throw UsageError("--bin-width must lie in (0,100]");
  }
  const bool needs_labels = filter == CohortFilter::LabelPositive ||
                            filter == CohortFilter::LabelPositiveAndPredictedPositive;
  if (needs_labels && o.labels.empty()) {
    throw UsageError("filter '" + o.filter + "' requires --labels");
  }

  const auto results =
      with_file(o.slides, [&] { return parse_slide_summaries(read_file(o.slides)); });
  std::optional<std::map<std::string, int>> labels;
  if (!o.labels.empty()) {
    labels = with_file(o.labels, [&] { return parse_labels(read_file(o.labels)); });
  }

  const auto kept = filter_cohort(results, labels ? &*labels : nullptr, filter);
  const CohortSummary summary = summarize(kept, o.bin_width);

  write_file(fs::path(o.out) / "summary.csv", serialize_cohort_summary(summary));
  write_file(fs::path(o.out) / "histogram.csv", serialize_histogram(summary.histogram));

  ManifestBuilder m("report");
  m.input(o.slides);
  m.input(o.labels);
  m.param("filter", cohort_filter_name(filter));
  m.param("bin_width", o.bin_width);
  m.write(o.out);

  std::cout << report_line(summary) << "\n";
  return 0;
}

int run_mask(const MaskOptions& o) {
  if (o.jobs < 1) throw UsageError("--jobs must be at least 1");
  auto bags = with_file(o.tiles, [&] { return parse_tile_table(read_file(o.tiles)); });
  const auto selection =
      with_file(o.selection, [&] { return parse_selection(read_file(o.selection)); });

  std::sort(bags.begin(), bags.end(),
            [](const SlideBag& a, const SlideBag& b) { return a.slide_id < b.slide_id; });
  for (const auto& [slide_id, ids] : selection) {
    const bool known = std::any_of(bags.begin(), bags.end(),
                                   [&](const SlideBag& bag) { return bag.slide_id == slide_id; });
    if (!known) throw ValidationError("selection references unknown slide " + slide_id);
  }

  std::vector<const SlideBag*> targets;
  if (!o.slide.empty()) {
    const auto it = std::find_if(bags.begin(), bags.end(),
                                 [&](const SlideBag& bag) { return bag.slide_id == o.slide; });
    if (it == bags.end()) throw ValidationError("no tiles for slide " + o.slide);
    targets.push_back(&*it);
  } else {
    for (const auto& bag : bags) targets.push_back(&bag);
  }
  for (const SlideBag* bag : targets) require_safe_slide_id(bag->slide_id);

  static const std::vector<std::string> kNoSelection;
  std::vector<std::string> masks(targets.size());
  parallel_for(targets.size(), o.jobs, [&](std::size_t i) {
    const auto it = selection.find(targets[i]->slide_id);
    masks[i] = render_mask(*targets[i], it == selection.end() ? kNoSelection : it->second);
  });
  for (std::size_t i = 0; i < targets.size(); ++i) {
    write_file(fs::path(o.out) / (targets[i]->slide_id + ".mask.pgm"), masks[i]);
  }

  ManifestBuilder m("mask");
  m.input(o.tiles);
  m.input(o.selection);
  if (!o.slide.empty()) m.param("slide", o.slide);
  m.param("jobs", o.jobs);
  m.write(o.out);

  std::cout << "wrote " << targets.size() << " masks\n";
  return 0;
}

int run_plot(const PlotOptions& o) {
  if (o.trajectories.empty() && o.histogram.empty()) {
    throw UsageError("nothing to plot: provide --trajectories and/or --histogram");
  }

  ManifestBuilder m("plot");
  if (!o.trajectories.empty()) {
    if (o.slides.empty()) {
      throw UsageError("--trajectories requires --slides for tile counts and the threshold");
    }
    auto trajectories =
        with_file(o.trajectories, [&] { return parse_trajectories(read_file(o.trajectories)); });
    const auto summaries =
        with_file(o.slides, [&] { return parse_slide_summaries(read_file(o.slides)); });

    std::map<std::string, const WeepResult*> by_id;
    for (const auto& summary : summaries) by_id[summary.slide_id] = &summary;
    std::optional<double> threshold;
    for (auto& traj : trajectories) {
      const auto it = by_id.find(traj.slide_id);
      if (it == by_id.end()) {
        throw ValidationError("no summary row for slide " + traj.slide_id);
      }
      traj.n_tiles = it->second->n_tiles;
      if (threshold && *threshold != it->second->threshold) {
        throw ValidationError("summary rows carry mixed thresholds; plot one selection run");
      }
      threshold = it->second->threshold;
    }
    for (const auto& id : o.highlight) {
      const bool known =
          std::any_of(trajectories.begin(), trajectories.end(),
                      [&](const SlideTrajectory& traj) { return traj.slide_id == id; });
      if (!known) throw ValidationError("highlight slide '" + id + "' has no trajectory");
    }

    write_file(fs::path(o.out) / "weep_plot.svg",
               render_weep_plot(trajectories, *threshold, o.highlight));
    m.input(o.trajectories);
    m.input(o.slides);
  }
  if (!o.histogram.empty()) {
    const auto bins =
        with_file(o.histogram, [&] { return parse_histogram_csv(read_file(o.histogram)); });
    write_file(fs::path(o.out) / "histogram.svg", render_histogram_svg(bins));
    m.input(o.histogram);
  }
  if (!o.highlight.empty()) m.param("highlight", o.highlight);
  m.write(o.out);
  return 0;
}

int run_simulate(const SimulateOptions& o) {
  const SynthConfig config = o.synth.resolve();
  const SynthCohort cohort = generate_cohort(config);

  write_file(fs::path(o.out) / "tiles.csv", serialize_tile_table(cohort.bags));
  write_file(fs::path(o.out) / "labels.csv", serialize_labels(cohort.labels));

  std::size_t n_tiles = 0;
  for (const auto& bag : cohort.bags) n_tiles += bag.tiles.size();

  ManifestBuilder m("simulate");
  if (!o.synth.config_path.empty()) m.input(o.synth.config_path);
  m.param("synth", nlohmann::json::parse(synth_config_to_json(config)));
  m.write(o.out);

  std::cout << "generated " << cohort.bags.size() << " slides, " << n_tiles << " tiles\n";
  return 0;
}

int run_pipeline(const PipelineOptions& o) {
  if (o.jobs < 1) throw UsageError("--jobs must be at least 1");
  if (o.simulate && o.tiles_opt->count() > 0) {
    throw UsageError("--simulate and --tiles are mutually exclusive");
  }
  if (!o.simulate && o.data.tiles.empty()) {
    throw UsageError("pipeline needs --simulate or --tiles");
  }
  if (!o.simulate && o.data.labels.empty()) {
    throw UsageError("pipeline ingest mode needs --labels for threshold calibration");
  }
  const CohortFilter filter = resolve_filter(o.filter);
  if (!(o.bin_width > 0.0 && o.bin_width <= 100.0)) {
    throw UsageError("--bin-width must lie in (0,100]");
  }

  ManifestBuilder m("pipeline");
  Dataset d;
  std::optional<SynthConfig> config;
  if (o.simulate) {
    config = o.synth.resolve();
    SynthCohort cohort = generate_cohort(*config);
    write_file(fs::path(o.out) / "tiles.csv", serialize_tile_table(cohort.bags));
    write_file(fs::path(o.out) / "labels.csv", serialize_labels(cohort.labels));
    d.bags = std::move(cohort.bags);
    d.labels = std::move(cohort.labels);
  } else {
    d = load_dataset(o.data);
    m.inputs(o.data);
  }

  const AggregatorSpec spec = resolve_aggregator(o.agg, o.data, d);
  const RankMetric metric = resolve_metric(o.metric);
  const bool needs_labels = filter == CohortFilter::LabelPositive ||
                            filter == CohortFilter::LabelPositiveAndPredictedPositive;
  if (needs_labels && !d.labels) {
    throw UsageError("filter '" + o.filter + "' requires labels");
  }

  const auto scores = compute_scores(d.bags, spec, o.jobs);
  write_file(fs::path(o.out) / "scores.csv", serialize_slide_scores(scores));

  std::vector<RocPoint> points;
  const DecisionThreshold best = calibrate(scores, *d.labels, &points);
  write_file(fs::path(o.out) / "roc.csv", serialize_roc(points));
  write_file(fs::path(o.out) / "threshold.csv", serialize_threshold(best));
  std::cout << threshold_line(best) << "\n";

  const auto results = run_selection(d.bags, spec, metric, best.value, o.jobs);
  write_file(fs::path(o.out) / "selection.csv", serialize_selection(results, d.bags, metric));
  write_file(fs::path(o.out) / "trajectory.csv", serialize_trajectories(results));
  write_file(fs::path(o.out) / "slides.csv", serialize_slide_summaries(results));

  const auto kept = filter_cohort(results, d.labels ? &*d.labels : nullptr, filter);
  const CohortSummary summary = summarize(kept, o.bin_width);
  write_file(fs::path(o.out) / "summary.csv", serialize_cohort_summary(summary));
  write_file(fs::path(o.out) / "histogram.csv", serialize_histogram(summary.histogram));
  std::cout << report_line(summary) << "\n";

  std::vector<SlideTrajectory> trajectories;
  trajectories.reserve(results.size());
  for (const auto& result : results) {
    trajectories.push_back({result.slide_id, result.trajectory, result.n_tiles});
  }
  write_file(fs::path(o.out) / "weep_plot.svg",
             render_weep_plot(trajectories, best.value, {}));
  write_file(fs::path(o.out) / "histogram.svg", render_histogram_svg(summary.histogram));

  m.param("mode", o.simulate ? "simulate" : "ingest");
  if (config) m.param("synth", nlohmann::json::parse(synth_config_to_json(*config)));
  m.param("aggregator", spec.name());
  m.param("metric", rank_metric_name(metric));
  m.param("threshold", best.value);
  m.param("filter", cohort_filter_name(filter));
  m.param("bin_width", o.bin_width);
  m.param("jobs", o.jobs);
  m.write(o.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weep: backward tile selection for whole-slide-image classifiers"};
  app.set_version_flag("--version", "weep " + std::string(kVersion));
  app.require_subcommand(0, 1);

  ValidateOptions validate_opts;
  CLI::App* validate_cmd =
      app.add_subcommand("validate", "parse input tables and report their shape");
  add_tiles_options(validate_cmd, validate_opts.data);
  validate_cmd->add_option("--out", validate_opts.out, "directory for the run manifest");

  AggregateOptions aggregate_opts;
  CLI::App* aggregate_cmd =
      app.add_subcommand("aggregate", "compute slide-level scores from tile scores");
  add_tiles_options(aggregate_cmd, aggregate_opts.data);
  aggregate_cmd->add_option("--agg", aggregate_opts.agg,
                            "aggregator: p<1..100>, mean, median, attn-score, attn-pool");
  aggregate_cmd->add_option("--out", aggregate_opts.out, "output directory")->required();

  ThresholdOptions threshold_opts;
  CLI::App* threshold_cmd =
      app.add_subcommand("threshold", "calibrate the decision threshold (Youden's J)");
  threshold_cmd->add_option("--scores", threshold_opts.scores, "slide score csv")->required();
  threshold_cmd->add_option("--labels", threshold_opts.labels, "slide label csv")->required();
  threshold_cmd->add_option("--out", threshold_opts.out, "output directory (roc.csv, threshold.csv)");

  SelectOptions select_opts;
  CLI::App* select_cmd =
      app.add_subcommand("select", "run backward tile selection on every slide");
  add_tiles_options(select_cmd, select_opts.data);
  select_cmd->add_option("--agg", select_opts.agg,
                         "aggregator: p<1..100>, mean, median, attn-score, attn-pool");
  select_cmd->add_option("--metric", select_opts.metric, "ranking metric: score or attention");
  select_opts.threshold_opt =
      select_cmd->add_option("--threshold", select_opts.threshold, "decision threshold O");
  select_cmd->add_option("--threshold-from", select_opts.threshold_from,
                         "read O from a threshold.csv");
  select_cmd->add_option("--jobs", select_opts.jobs, "parallel slide workers");
  select_cmd->add_option("--out", select_opts.out, "output directory")->required();

  ReportOptions report_opts;
  CLI::App* report_cmd =
      app.add_subcommand("report", "cohort statistics over per-slide selection summaries");
  report_cmd->add_option("--slides", report_opts.slides, "slides.csv from select")->required();
  report_cmd->add_option("--labels", report_opts.labels, "slide label csv");
  report_cmd->add_option("--filter", report_opts.filter,
                         "all, predicted-positive, label-positive, or "
                         "label-positive-and-predicted-positive");
  report_cmd->add_option("--bin-width", report_opts.bin_width, "histogram bin width in percent");
  report_cmd->add_option("--out", report_opts.out, "output directory")->required();

  MaskOptions mask_opts;
  CLI::App* mask_cmd = app.add_subcommand("mask", "render selection masks as PGM images");
  mask_cmd->add_option("--tiles", mask_opts.tiles, "tile table csv")->required();
  mask_cmd->add_option("--selection", mask_opts.selection, "selection.csv from select")
      ->required();
  mask_cmd->add_option("--slide", mask_opts.slide, "render only this slide");
  mask_cmd->add_option("--jobs", mask_opts.jobs, "parallel slide workers");
  mask_cmd->add_option("--out", mask_opts.out, "output directory")->required();

  PlotOptions plot_opts;
  CLI::App* plot_cmd = app.add_subcommand("plot", "render SVG figures");
  plot_cmd->add_option("--trajectories", plot_opts.trajectories, "trajectory.csv from select");
  plot_cmd->add_option("--slides", plot_opts.slides, "slides.csv from select");
  plot_cmd->add_option("--histogram", plot_opts.histogram, "histogram.csv from report");
  plot_cmd->add_option("--highlight", plot_opts.highlight, "slide ids to emphasize");
  plot_cmd->add_option("--out", plot_opts.out, "output directory")->required();

  SimulateOptions simulate_opts;
  CLI::App* simulate_cmd =
      app.add_subcommand("simulate", "generate a deterministic synthetic cohort");
  simulate_opts.synth.add_to(simulate_cmd);
  simulate_cmd->add_option("--out", simulate_opts.out, "output directory")->required();

  PipelineOptions pipeline_opts;
  CLI::App* pipeline_cmd = app.add_subcommand(
      "pipeline", "simulate-or-ingest, aggregate, threshold, select, report, plot");
  pipeline_cmd->add_flag("--simulate", pipeline_opts.simulate, "generate the cohort instead of reading it");
  pipeline_opts.synth.add_to(pipeline_cmd);
  pipeline_opts.tiles_opt = pipeline_cmd->add_option("--tiles", pipeline_opts.data.tiles,
                                                     "tile table csv (ingest mode)");
  pipeline_cmd->add_option("--labels", pipeline_opts.data.labels, "slide label csv (ingest mode)");
  pipeline_cmd->add_option("--features", pipeline_opts.data.features, "tile feature csv");
  pipeline_cmd->add_option("--params", pipeline_opts.data.params,
                           "attention pooling parameter file");
  pipeline_cmd->add_option("--agg", pipeline_opts.agg,
                           "aggregator: p<1..100>, mean, median, attn-score, attn-pool");
  pipeline_cmd->add_option("--metric", pipeline_opts.metric, "ranking metric: score or attention");
  pipeline_cmd->add_option("--filter", pipeline_opts.filter, "cohort filter for the report stage");
  pipeline_cmd->add_option("--bin-width", pipeline_opts.bin_width,
                           "histogram bin width in percent");
  pipeline_cmd->add_option("--jobs", pipeline_opts.jobs, "parallel slide workers");
  pipeline_cmd->add_option("--out", pipeline_opts.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(validate_cmd)) return run_validate(validate_opts);
    if (app.got_subcommand(aggregate_cmd)) return run_aggregate(aggregate_opts);
    if (app.got_subcommand(threshold_cmd)) return run_threshold(threshold_opts);
    if (app.got_subcommand(select_cmd)) return run_select(select_opts);
    if (app.got_subcommand(report_cmd)) return run_report(report_opts);
    if (app.got_subcommand(mask_cmd)) return run_mask(mask_opts);
    if (app.got_subcommand(plot_cmd)) return run_plot(plot_opts);
    if (app.got_subcommand(simulate_cmd)) return run_simulate(simulate_opts);
    if (app.got_subcommand(pipeline_cmd)) return run_pipeline(pipeline_opts);
    std::cerr << app.help();
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "weep: " << e.what() << "\n";
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "weep: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "weep: " << e.what() << "\n";
    return 2;
  }
}
