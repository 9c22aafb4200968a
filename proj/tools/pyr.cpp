// pyr: career reconstruction, gender inference, population pyramids,
// projections, and trend statistics over bibliographic JSONL records.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pyramids/cache.hpp"
#include "pyramids/careers.hpp"
#include "pyramids/gender.hpp"
#include "pyramids/ingest.hpp"
#include "pyramids/metrics.hpp"
#include "pyramids/pyramid.hpp"
#include "pyramids/report.hpp"
#include "pyramids/svg.hpp"
#include "pyramids/synth.hpp"
#include "pyramids/trends.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string default_cache_path() {
  if (const char* dir = std::getenv("PYR_CACHE_DIR"))
    return (fs::path(dir) / "careers.pyr").string();
  return "careers.pyr";
}

// Header comment stamped into human-facing tables: tool version plus a hash
// of the flags that shaped the run.
std::string provenance(const std::string& config_desc) {
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(pyr::fnv1a(config_desc)));
  return std::string("pyr ") + kVersion + " config=" + hex;
}

void ensure_dir(const std::string& dir) {
  if (!dir.empty()) fs::create_directories(dir);
}

std::vector<std::string> countries_in(const pyr::CareerTable& table) {
  std::set<std::string> seen;
  for (const auto& c : table.careers())
    for (const auto& cc : c.assigned_countries) seen.insert(cc);
  return {seen.begin(), seen.end()};
}

// ---------------------------------------------------------------------------
// Stage implementations. `all` calls these in sequence with the same
// arguments the individual subcommands would, so both paths emit identical
// bytes.

struct IngestArgs {
  std::vector<std::string> inputs;
  std::string cache = default_cache_path();
  int t_min = 1950;
  int t_max = 2023;
  std::vector<std::string> work_types = {"article"};
  unsigned threads = 1;
  bool quiet = false;
};

void run_ingest(const IngestArgs& a) {
  pyr::IngestConfig cfg;
  cfg.t_min = a.t_min;
  cfg.t_max = a.t_max;
  cfg.work_types = a.work_types;
  auto table = pyr::build_career_table(a.inputs, cfg, a.threads);
  ensure_dir(fs::path(a.cache).parent_path().string());
  pyr::save_career_cache(table, a.cache);
  if (a.quiet) return;
  ordered_json j;
  j["cache"] = a.cache;
  j["authors"] = table.size();
  j["accepted"] = table.stats.accepted;
  j["dropped_window"] = table.stats.dropped_window;
  j["dropped_type"] = table.stats.dropped_type;
  j["malformed"] = table.stats.malformed;
  j["malformed_lines"] = table.stats.malformed_lines;
  std::cout << j.dump() << "\n";
}

struct TrainArgs {
  std::string corpus;
  std::string corpus_b;  // second validation family; defaults to corpus
  std::string models_dir = "models";
  std::vector<std::string> countries;  // empty = every country in the corpus
  double min_ratio = 0.2;
  double min_auc = 0.8;
  std::uint64_t seed = 0;
  bool skip_gate = false;
  bool quiet = false;
};

void run_train(const TrainArgs& a) {
  auto corpus = pyr::load_name_corpus(a.corpus, "primary");
  auto corpus_b = a.corpus_b.empty()
                      ? corpus
                      : pyr::load_name_corpus(a.corpus_b, "secondary");
  std::vector<std::string> countries = a.countries;
  if (countries.empty()) {
    std::set<std::string> seen;
    for (const auto& e : corpus.entries) seen.insert(e.country);
    countries.assign(seen.begin(), seen.end());
  }
  ensure_dir(a.models_dir);
  for (const auto& country : countries) {
    auto train = corpus.subset(country, pyr::Split::train);
    auto val_a = corpus.subset(country, pyr::Split::validation);
    auto val_b = corpus_b.subset(country, pyr::Split::validation);
    if (val_b.entries.empty()) val_b = val_a;
    auto [f, m] = train.gender_counts();
    bool downsampled = false;
    if (f > 0 && m > 0 &&
        static_cast<double>(std::min(f, m)) / std::max(f, m) < a.min_ratio) {
      train = pyr::downsample_majority(train, a.min_ratio, a.seed);
      downsampled = true;
    }
    auto fspace = pyr::build_feature_space(train);
    auto tuned = pyr::tune_alpha(train, val_a, fspace);
    pyr::GenderModel model = std::move(tuned.model);
    model.country = country;
    model.downsampled = downsampled;
    model.theta = pyr::tune_threshold(model, val_a, val_b);
    bool gated = !a.skip_gate &&
                 !pyr::passes_auc_gate(model, val_a, val_b, a.min_auc);
    ordered_json j;
    j["country"] = country;
    j["alpha"] = model.alpha;
    j["theta"] = model.theta;
    j["validation_auc"] = tuned.auc;
    j["downsampled"] = downsampled;
    if (gated) {
      j["status"] = "rejected_low_auc";
    } else {
      std::string path =
          (fs::path(a.models_dir) / (country + ".pyrg")).string();
      pyr::save_gender_model(model, path);
      j["status"] = "saved";
      j["path"] = path;
    }
    if (!a.quiet) std::cout << j.dump() << "\n";
  }
}

struct AssignArgs {
  std::string cache = default_cache_path();
  std::string models_dir = "models";
  bool quiet = false;
};

void run_assign(const AssignArgs& a) {
  auto table = pyr::load_career_cache(a.cache);
  std::map<std::string, pyr::GenderModel> models;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(a.models_dir))
    if (entry.path().extension() == ".pyrg") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& p : files) {
    auto model = pyr::load_gender_model(p.string());
    models[model.country] = std::move(model);
  }
  if (models.empty())
    throw pyr::Error("no .pyrg models found in " + a.models_dir);
  pyr::assign_genders(table, models);
  pyr::save_career_cache(table, a.cache);
  if (a.quiet) return;
  std::size_t female = 0, male = 0, unassigned = 0;
  for (const auto& c : table.careers()) {
    if (c.gender == pyr::Gender::female) ++female;
    else if (c.gender == pyr::Gender::male) ++male;
    else ++unassigned;
  }
  ordered_json j;
  j["cache"] = a.cache;
  j["models"] = models.size();
  j["female"] = female;
  j["male"] = male;
  j["unassigned"] = unassigned;
  std::cout << j.dump() << "\n";
}

struct ThresholdArgs {
  std::string cache = default_cache_path();
  std::string fixture;  // when set, load instead of estimating
  std::string out = "thresholds.csv";
  bool quiet = false;
};

void run_thresholds(const ThresholdArgs& a) {
  pyr::IPIThresholdTable table;
  if (!a.fixture.empty()) {
    table = pyr::load_ipi_table(a.fixture);
  } else {
    auto careers = pyr::load_career_cache(a.cache);
    table = pyr::estimate_ipi_table(careers.careers());
  }
  ensure_dir(fs::path(a.out).parent_path().string());
  pyr::save_ipi_table(table, a.out);
  if (a.quiet) return;
  ordered_json j;
  j["out"] = a.out;
  j["provenance"] =
      table.provenance == pyr::IPIThresholdTable::Provenance::fixture
          ? "fixture"
          : "estimated";
  j["entries"] = table.deltas.size();
  std::cout << j.dump() << "\n";
}

struct PyramidArgs {
  std::string cache = default_cache_path();
  std::string thresholds = "thresholds.csv";
  std::string country;
  int year = 2023;
  std::string out_dir = ".";
  bool quiet = false;
};

void run_pyramid(const PyramidArgs& a) {
  auto table = pyr::load_career_cache(a.cache);
  auto th = pyr::load_ipi_table(a.thresholds);
  auto p = pyr::build_pyramid(table.careers(), th, a.country, a.year,
                              &std::cerr);
  ensure_dir(a.out_dir);
  std::string stem = "pyramid_" + a.country + "_" + std::to_string(a.year);
  std::string csv = (fs::path(a.out_dir) / (stem + ".csv")).string();
  std::string svg = (fs::path(a.out_dir) / (stem + ".svg")).string();
  pyr::save_pyramid_csv(
      std::vector<pyr::Pyramid>{p}, csv,
      provenance("pyramid " + a.country + " " + std::to_string(a.year)));
  pyr::save_pyramid_svg(p, svg);
  if (a.quiet) return;
  ordered_json j;
  j["csv"] = csv;
  j["svg"] = svg;
  j["total"] = p.total();
  std::cout << j.dump() << "\n";
}

struct ProjectArgs {
  std::string cache = default_cache_path();
  std::string thresholds = "thresholds.csv";
  std::string country;
  int year = 2023;  // last observed year; the projection base
  int horizon = 2050;
  std::string out_dir = ".";
  bool quiet = false;
};

void run_project(const ProjectArgs& a) {
  auto table = pyr::load_career_cache(a.cache);
  auto th = pyr::load_ipi_table(a.thresholds);
  auto start = pyr::build_pyramid(table.careers(), th, a.country, a.year,
                                  &std::cerr);
  auto models =
      pyr::estimate_transitions(table.careers(), th, a.country, a.year);
  auto projected = pyr::project(start, models, a.horizon);
  ensure_dir(a.out_dir);
  std::string comment =
      provenance("project " + a.country + " " + std::to_string(a.year) + " " +
                 std::to_string(a.horizon));
  for (const auto& p : projected) {
    std::string csv = (fs::path(a.out_dir) /
                       ("pyramid_" + a.country + "_" + std::to_string(p.year) +
                        "_projected.csv"))
                          .string();
    pyr::save_pyramid_csv(std::vector<pyr::Pyramid>{p}, csv, comment);
  }
  std::string tpath =
      (fs::path(a.out_dir) / ("transitions_" + a.country + ".csv")).string();
  std::string apath =
      (fs::path(a.out_dir) / ("inflow_" + a.country + ".csv")).string();
  pyr::save_transition_csv(models, tpath, apath);
  if (a.quiet) return;
  ordered_json j;
  j["country"] = a.country;
  j["base_year"] = a.year;
  j["horizon"] = a.horizon;
  j["files"] = projected.size();
  j["final_total"] = projected.back().total();
  std::cout << j.dump() << "\n";
}

struct MetricsArgs {
  std::string cache = default_cache_path();
  std::string thresholds = "thresholds.csv";
  std::vector<std::string> countries;  // empty = all in cache
  int year = 2023;
  int horizon = 2050;
  double parity_low = 0.45;
  double parity_high = 0.55;
  std::string out_dir = ".";
  bool quiet = false;
};

void run_metrics(const MetricsArgs& a) {
  auto table = pyr::load_career_cache(a.cache);
  auto th = pyr::load_ipi_table(a.thresholds);
  auto countries = a.countries.empty() ? countries_in(table) : a.countries;
  ensure_dir(a.out_dir);
  pyr::ParityBand parity{a.parity_low, a.parity_high};
  std::vector<pyr::MetricsReport> reports;
  for (const auto& country : countries) {
    auto observed =
        pyr::build_pyramid(table.careers(), th, country, a.year, &std::cerr);
    if (observed.total() <= 0.0) {
      std::cerr << "warning: no eligible population for " << country
                << " in " << a.year << "; skipped\n";
      continue;
    }
    auto na = pyr::newly_active_counts(table.careers(), th, country, a.year);
    auto models =
        pyr::estimate_transitions(table.careers(), th, country, a.year);
    auto projected = pyr::project(observed, models, a.horizon);
    std::map<int, const pyr::Pyramid*> by_year{{a.year, &observed}};
    for (const auto& p : projected) by_year[p.year] = &p;
    auto report = pyr::build_metrics_report(
        observed, na, by_year, {{a.year, a.horizon}}, {a.year, a.horizon},
        parity);
    pyr::save_metrics_json(
        report,
        (fs::path(a.out_dir) / ("metrics_" + country + ".json")).string());
    reports.push_back(std::move(report));
  }
  std::string csv = (fs::path(a.out_dir) / "metrics.csv").string();
  char band[64];
  std::snprintf(band, sizeof(band), "%g %g", a.parity_low, a.parity_high);
  pyr::save_metrics_csv(
      reports, csv,
      provenance("metrics " + std::to_string(a.year) + " " +
                 std::to_string(a.horizon) + " " + band));
  if (a.quiet) return;
  ordered_json j;
  j["csv"] = csv;
  j["countries"] = reports.size();
  std::cout << j.dump() << "\n";
}

struct TrendsArgs {
  std::string cache = default_cache_path();
  std::vector<std::string> countries;  // empty = all in cache
  int fit_from = 2000;
  int fit_to = 2023;
  int before_from = 2000, before_to = 2009;
  int after_from = 2014, after_to = 2023;
  std::optional<int> lag;
  std::string out_dir = ".";
  bool quiet = false;
};

void run_trends(const TrendsArgs& a) {
  auto table = pyr::load_career_cache(a.cache);
  auto countries = a.countries.empty() ? countries_in(table) : a.countries;
  ensure_dir(a.out_dir);
  std::vector<std::pair<std::string, pyr::RegressionResult>> growth, share;
  std::vector<std::pair<std::string, pyr::SlopeComparison>> growth_seg,
      share_seg;
  for (const auto& country : countries) {
    auto counts = pyr::annual_unique_authors(table.careers(), country)
                      .window(a.fit_from, a.fit_to);
    auto shares = pyr::annual_female_share(table.careers(), country)
                      .window(a.fit_from, a.fit_to);
    pyr::YearWindow before{a.before_from, a.before_to};
    pyr::YearWindow after{a.after_from, a.after_to};
    try {
      growth.emplace_back(country, pyr::fit_loglinear(counts));
      growth_seg.emplace_back(
          country, pyr::segmented_slope_test(counts, before, after, a.lag));
    } catch (const pyr::Error& e) {
      std::cerr << "warning: growth trend skipped for " << country << ": "
                << e.what() << "\n";
    }
    try {
      share.emplace_back(country, pyr::fit_linear(shares));
      share_seg.emplace_back(
          country, pyr::segmented_slope_test(shares, before, after, a.lag));
    } catch (const pyr::Error& e) {
      std::cerr << "warning: share trend skipped for " << country << ": "
                << e.what() << "\n";
    }
  }
  auto path = [&](const char* name) {
    return (fs::path(a.out_dir) / name).string();
  };
  pyr::save_regression_csv(growth, path("trend_growth.csv"));
  pyr::save_regression_csv(share, path("trend_female_share.csv"));
  pyr::save_slope_comparison_csv(growth_seg, path("trend_growth_break.csv"));
  pyr::save_slope_comparison_csv(share_seg,
                                 path("trend_female_share_break.csv"));
  if (a.quiet) return;
  ordered_json j;
  j["out_dir"] = a.out_dir;
  j["growth_rows"] = growth.size();
  j["share_rows"] = share.size();
  std::cout << j.dump() << "\n";
}

struct SynthArgs {
  std::string config;
  std::string out = "records.jsonl";
  std::string ledger;
  std::string name_corpus;
  std::size_t names_per_gender = 500;
  std::uint64_t corpus_seed = 1;
  bool quiet = false;
};

void run_synth(const SynthArgs& a) {
  auto cfg = pyr::load_regime_config(a.config);
  auto res = pyr::generate(cfg);
  ensure_dir(fs::path(a.out).parent_path().string());
  pyr::save_records_jsonl(res.records, a.out);
  if (!a.ledger.empty()) pyr::save_ledger_csv(res.ledger, a.ledger);
  if (!a.name_corpus.empty()) {
    std::vector<std::string> countries;
    for (const auto& r : cfg.countries) countries.push_back(r.country);
    auto corpus = pyr::generate_name_corpus(countries, a.names_per_gender,
                                            a.corpus_seed);
    pyr::save_name_corpus(corpus, a.name_corpus);
  }
  if (a.quiet) return;
  ordered_json j;
  j["records"] = res.records.size();
  j["authors"] = res.ledger.size();
  j["out"] = a.out;
  std::cout << j.dump() << "\n";
}

struct AllArgs {
  std::string config;
  std::string out_dir = "run";
  int horizon = 2050;
  unsigned threads = 1;
  std::uint64_t seed = 1;
  bool quiet = false;
};

void run_all(const AllArgs& a) {
  ensure_dir(a.out_dir);
  auto cfg = pyr::load_regime_config(a.config);
  auto in_dir = fs::path(a.out_dir);

  SynthArgs synth;
  synth.config = a.config;
  synth.out = (in_dir / "records.jsonl").string();
  synth.ledger = (in_dir / "ledger.csv").string();
  synth.name_corpus = (in_dir / "names.csv").string();
  synth.corpus_seed = a.seed;
  synth.quiet = a.quiet;
  run_synth(synth);

  IngestArgs ingest;
  ingest.inputs = {synth.out};
  ingest.cache = (in_dir / "careers.pyr").string();
  ingest.t_min = cfg.year_start;
  ingest.t_max = cfg.year_end;
  ingest.threads = a.threads;
  ingest.quiet = a.quiet;
  run_ingest(ingest);

  TrainArgs train;
  train.corpus = synth.name_corpus;
  train.models_dir = (in_dir / "models").string();
  train.seed = a.seed;
  train.quiet = a.quiet;
  run_train(train);

  AssignArgs assign;
  assign.cache = ingest.cache;
  assign.models_dir = train.models_dir;
  assign.quiet = a.quiet;
  run_assign(assign);

  ThresholdArgs th;
  th.cache = ingest.cache;
  th.out = (in_dir / "thresholds.csv").string();
  th.quiet = a.quiet;
  run_thresholds(th);

  for (const auto& regime : cfg.countries) {
    PyramidArgs pyramid;
    pyramid.cache = ingest.cache;
    pyramid.thresholds = th.out;
    pyramid.country = regime.country;
    pyramid.year = cfg.year_end;
    pyramid.out_dir = a.out_dir;
    pyramid.quiet = a.quiet;
    run_pyramid(pyramid);

    ProjectArgs project;
    project.cache = ingest.cache;
    project.thresholds = th.out;
    project.country = regime.country;
    project.year = cfg.year_end;
    project.horizon = a.horizon;
    project.out_dir = a.out_dir;
    project.quiet = a.quiet;
    run_project(project);
  }

  MetricsArgs metrics;
  metrics.cache = ingest.cache;
  metrics.thresholds = th.out;
  metrics.year = cfg.year_end;
  metrics.horizon = a.horizon;
  metrics.out_dir = a.out_dir;
  metrics.quiet = a.quiet;
  run_metrics(metrics);

  TrendsArgs trends;
  trends.cache = ingest.cache;
  trends.fit_from = cfg.year_start;
  trends.fit_to = cfg.year_end;
  trends.out_dir = a.out_dir;
  trends.quiet = a.quiet;
  run_trends(trends);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"researcher population pyramids from bibliographic records"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("pyr ") + kVersion);

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand(
      "ingest", "parse JSONL records into a career cache");
  c_ingest->add_option("input", ingest.inputs, "input .jsonl/.jsonl.gz files")
      ->required()
      ->check(CLI::ExistingFile);
  c_ingest->add_option("--cache", ingest.cache,
                       "career cache path (default honors PYR_CACHE_DIR)");
  c_ingest->add_option("--t-min", ingest.t_min, "first publication year kept");
  c_ingest->add_option("--t-max", ingest.t_max, "last publication year kept");
  c_ingest->add_option("--work-type", ingest.work_types,
                       "accepted work types");
  c_ingest->add_option("--threads", ingest.threads, "parser shard count")
      ->check(CLI::Range(1u, 256u));

  TrainArgs train;
  auto* c_train = app.add_subcommand(
      "train-gender", "train per-country name classifiers");
  c_train->add_option("--corpus", train.corpus, "labeled name corpus CSV")
      ->required()
      ->check(CLI::ExistingFile);
  c_train->add_option("--corpus-b", train.corpus_b,
                      "second validation corpus CSV");
  c_train->add_option("--models-dir", train.models_dir, "output directory");
  c_train->add_option("--country", train.countries, "restrict to countries");
  c_train->add_option("--min-ratio", train.min_ratio,
                      "downsample majority below this minority ratio");
  c_train->add_option("--min-auc", train.min_auc, "validation AUC gate");
  c_train->add_option("--seed", train.seed, "downsampling seed");
  c_train->add_flag("--skip-gate", train.skip_gate,
                    "save models even when the AUC gate fails");

  AssignArgs assign;
  auto* c_assign = app.add_subcommand(
      "assign-gender", "assign genders in the cache from trained models");
  c_assign->add_option("--cache", assign.cache, "career cache path");
  c_assign->add_option("--models-dir", assign.models_dir,
                       "directory of .pyrg models");

  ThresholdArgs th;
  auto* c_th = app.add_subcommand(
      "thresholds", "estimate or load inter-publication interval thresholds");
  c_th->add_option("--cache", th.cache, "career cache path");
  c_th->add_option("--fixture", th.fixture,
                   "load thresholds from this CSV instead of estimating")
      ->check(CLI::ExistingFile);
  c_th->add_option("--out", th.out, "output CSV");

  PyramidArgs pyramid;
  auto* c_pyr = app.add_subcommand(
      "pyramid", "build one observed country-year pyramid (CSV + SVG)");
  c_pyr->add_option("--cache", pyramid.cache, "career cache path");
  c_pyr->add_option("--thresholds", pyramid.thresholds, "threshold CSV");
  c_pyr->add_option("--country", pyramid.country, "country code")->required();
  c_pyr->add_option("--year", pyramid.year, "cross-section year");
  c_pyr->add_option("--out-dir", pyramid.out_dir, "output directory");

  ProjectArgs project;
  auto* c_proj = app.add_subcommand(
      "project", "project pyramids forward to a horizon year");
  c_proj->add_option("--cache", project.cache, "career cache path");
  c_proj->add_option("--thresholds", project.thresholds, "threshold CSV");
  c_proj->add_option("--country", project.country, "country code")->required();
  c_proj->add_option("--year", project.year, "last observed year");
  c_proj->add_option("--horizon", project.horizon, "final projected year");
  c_proj->add_option("--out-dir", project.out_dir, "output directory");

  MetricsArgs metrics;
  auto* c_met = app.add_subcommand(
      "metrics", "inflow, gender gap, CAGR, and share tables");
  c_met->add_option("--cache", metrics.cache, "career cache path");
  c_met->add_option("--thresholds", metrics.thresholds, "threshold CSV");
  c_met->add_option("--country", metrics.countries, "restrict to countries");
  c_met->add_option("--year", metrics.year, "observed cross-section year");
  c_met->add_option("--horizon", metrics.horizon, "projection horizon");
  c_met->add_option("--parity-low", metrics.parity_low, "parity band lower");
  c_met->add_option("--parity-high", metrics.parity_high, "parity band upper");
  c_met->add_option("--out-dir", metrics.out_dir, "output directory");

  TrendsArgs trends;
  auto* c_tr = app.add_subcommand(
      "trends", "growth and share regressions with break tests");
  c_tr->add_option("--cache", trends.cache, "career cache path");
  c_tr->add_option("--country", trends.countries, "restrict to countries");
  c_tr->add_option("--from", trends.fit_from, "first fit year");
  c_tr->add_option("--to", trends.fit_to, "last fit year");
  c_tr->add_option("--before-from", trends.before_from, "pre-window start");
  c_tr->add_option("--before-to", trends.before_to, "pre-window end");
  c_tr->add_option("--after-from", trends.after_from, "post-window start");
  c_tr->add_option("--after-to", trends.after_to, "post-window end");
  int lag_flag = -1;
  c_tr->add_option("--lag", lag_flag,
                   "fixed Newey-West lag (default: plug-in rule)");
  c_tr->add_option("--out-dir", trends.out_dir, "output directory");

  SynthArgs synth;
  auto* c_syn = app.add_subcommand(
      "synth", "generate a synthetic corpus from a regime config");
  c_syn->add_option("--config", synth.config, "regime config file")
      ->required()
      ->check(CLI::ExistingFile);
  c_syn->add_option("--out", synth.out, "output JSONL path");
  c_syn->add_option("--ledger", synth.ledger, "ground-truth ledger CSV");
  c_syn->add_option("--name-corpus", synth.name_corpus,
                    "also write a labeled name corpus CSV");
  c_syn->add_option("--names-per-gender", synth.names_per_gender,
                    "corpus names per country and gender");
  c_syn->add_option("--seed", synth.corpus_seed, "name corpus seed");

  AllArgs all;
  auto* c_all = app.add_subcommand(
      "all", "full pipeline from a regime config into one directory");
  c_all->add_option("--config", all.config, "regime config file")
      ->required()
      ->check(CLI::ExistingFile);
  c_all->add_option("--out-dir", all.out_dir, "output directory");
  c_all->add_option("--horizon", all.horizon, "projection horizon");
  c_all->add_option("--threads", all.threads, "parser shard count")
      ->check(CLI::Range(1u, 256u));
  c_all->add_option("--seed", all.seed, "seed for corpus/model auxiliaries");

  bool quiet = false;
  app.add_flag("--quiet", quiet, "suppress status JSON on stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // help/version
    std::cerr << e.what() << "\n" << app.help();
    return 2;
  }

  ingest.quiet = train.quiet = assign.quiet = th.quiet = pyramid.quiet =
      project.quiet = metrics.quiet = trends.quiet = synth.quiet = all.quiet =
          quiet;
  if (lag_flag >= 0) trends.lag = lag_flag;

  try {
    if (app.got_subcommand(c_ingest)) run_ingest(ingest);
    else if (app.got_subcommand(c_train)) run_train(train);
    else if (app.got_subcommand(c_assign)) run_assign(assign);
    else if (app.got_subcommand(c_th)) run_thresholds(th);
    else if (app.got_subcommand(c_pyr)) run_pyramid(pyramid);
    else if (app.got_subcommand(c_proj)) run_project(project);
    else if (app.got_subcommand(c_met)) run_metrics(metrics);
    else if (app.got_subcommand(c_tr)) run_trends(trends);
    else if (app.got_subcommand(c_syn)) run_synth(synth);
    else if (app.got_subcommand(c_all)) run_all(all);
  } catch (const std::exception& e) {
    ordered_json err;
    err["error"] = e.what();
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 0;
}
