#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "pyramids/common.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = PYR_CLI_PATH;

int run(const std::string& args, const std::string& log = "/dev/null") {
  std::string cmd = kCli + " " + args + " >" + log + " 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) {
    path = fs::temp_directory_path() / name;
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& p) const {
    return (path / p).string();
  }
};

const char* kRegime = R"(seed 19
years 2000 2023
country AA
newcomers 50
growth 0.03
female_frac 0.45
papers_per_year 1.2
attrition 0.06
country BB
newcomers 25
growth 0.0
female_frac 0.35
interval lognormal -0.3 0.5
attrition 0.08
)";

std::string write_regime(const TempDir& dir) {
  std::string path = dir / "regime.txt";
  pyr::write_file(path, kRegime);
  return path;
}

}  // namespace

TEST_CASE("exit codes and error surfaces") {
  TempDir dir("pyr_cli_codes");
  SECTION("help exits 0") {
    CHECK(run("--help") == 0);
    CHECK(run("synth --help") == 0);
  }
  SECTION("no subcommand exits 2 with usage") {
    CHECK(run("") == 2);
  }
  SECTION("unknown flag exits 2") {
    CHECK(run("thresholds --no-such-flag") == 2);
  }
  SECTION("IO failure exits 1 with JSON on stderr") {
    std::string log = dir / "err.log";
    CHECK(run("thresholds --cache " + (dir / "missing.pyr") + " --out " +
                  (dir / "t.csv"),
              log) == 1);
    std::string text = pyr::read_file(log);
    CHECK(text.find("{\"error\":") != std::string::npos);
  }
}

TEST_CASE("stage pipeline over a synthetic corpus") {
  TempDir dir("pyr_cli_stage");
  std::string regime = write_regime(dir);
  std::string records = dir / "records.jsonl";
  std::string corpus = dir / "names.csv";
  std::string cache = dir / "careers.pyr";
  std::string models = dir / "models";
  std::string thresholds = dir / "thresholds.csv";

  REQUIRE(run("synth --config " + regime + " --out " + records +
              " --ledger " + (dir / "ledger.csv") + " --name-corpus " +
              corpus) == 0);
  REQUIRE(fs::exists(records));

  SECTION("synth is deterministic across runs") {
    std::string again = dir / "records2.jsonl";
    REQUIRE(run("synth --config " + regime + " --out " + again) == 0);
    CHECK(pyr::read_file(records) == pyr::read_file(again));
  }

  REQUIRE(run("ingest " + records + " --cache " + cache +
              " --t-min 2000 --t-max 2023") == 0);
  REQUIRE(run("train-gender --corpus " + corpus + " --models-dir " + models) ==
          0);
  REQUIRE(fs::exists(models + "/AA.pyrg"));
  REQUIRE(run("assign-gender --cache " + cache + " --models-dir " + models) ==
          0);
  REQUIRE(run("thresholds --cache " + cache + " --out " + thresholds) == 0);

  SECTION("threads never change the cache bytes") {
    std::string c4 = dir / "careers4.pyr";
    REQUIRE(run("ingest " + records + " --cache " + c4 +
                " --t-min 2000 --t-max 2023 --threads 4") == 0);
    // Reassign genders so both caches went through identical stages.
    REQUIRE(run("assign-gender --cache " + c4 + " --models-dir " + models) ==
            0);
    CHECK(pyr::read_file(cache) == pyr::read_file(c4));
  }
  SECTION("fixture thresholds load instead of estimating") {
    std::string fixture = dir / "fixture.csv";
    pyr::write_file(fixture,
                    "country,gender,delta_years\nAA,female,12.01\n"
                    "AA,male,10.47\n");
    std::string out = dir / "fixture_out.csv";
    std::string log = dir / "fix.log";
    REQUIRE(run("thresholds --fixture " + fixture + " --out " + out, log) ==
            0);
    CHECK(pyr::read_file(log).find("\"provenance\":\"fixture\"") !=
          std::string::npos);
    CHECK(pyr::read_file(out).find("12.01") != std::string::npos);
  }

  REQUIRE(run("pyramid --cache " + cache + " --thresholds " + thresholds +
              " --country AA --year 2023 --out-dir " + (dir / "out")) == 0);
  CHECK(fs::exists(dir / "out/pyramid_AA_2023.csv"));
  CHECK(fs::exists(dir / "out/pyramid_AA_2023.svg"));

  SECTION("pyramid runs are idempotent, byte for byte") {
    auto first = pyr::read_file(dir / "out/pyramid_AA_2023.csv");
    REQUIRE(run("pyramid --cache " + cache + " --thresholds " + thresholds +
                " --country AA --year 2023 --out-dir " + (dir / "out")) == 0);
    CHECK(pyr::read_file(dir / "out/pyramid_AA_2023.csv") == first);
  }
  SECTION("pyramid CSV carries a provenance header") {
    auto text = pyr::read_file(dir / "out/pyramid_AA_2023.csv");
    CHECK(text.rfind("# pyr ", 0) == 0);
    CHECK(text.find("config=") != std::string::npos);
  }

  SECTION("project writes one CSV per horizon year") {
    REQUIRE(run("project --cache " + cache + " --thresholds " + thresholds +
                " --country AA --year 2023 --horizon 2033 --out-dir " +
                (dir / "proj")) == 0);
    for (int y = 2024; y <= 2033; ++y)
      CHECK(fs::exists(dir / ("proj/pyramid_AA_" + std::to_string(y) +
                              "_projected.csv")));
    CHECK(fs::exists(dir / "proj/transitions_AA.csv"));
    CHECK(fs::exists(dir / "proj/inflow_AA.csv"));
  }
  SECTION("metrics and trends emit their tables") {
    REQUIRE(run("metrics --cache " + cache + " --thresholds " + thresholds +
                " --year 2023 --horizon 2033 --out-dir " + (dir / "met")) ==
            0);
    CHECK(fs::exists(dir / "met/metrics.csv"));
    CHECK(fs::exists(dir / "met/metrics_AA.json"));
    CHECK(fs::exists(dir / "met/metrics_BB.json"));
    REQUIRE(run("trends --cache " + cache + " --out-dir " + (dir / "tr")) ==
            0);
    CHECK(fs::exists(dir / "tr/trend_growth.csv"));
    CHECK(fs::exists(dir / "tr/trend_female_share.csv"));
    CHECK(fs::exists(dir / "tr/trend_growth_break.csv"));
    CHECK(fs::exists(dir / "tr/trend_female_share_break.csv"));
  }
}

TEST_CASE("all equals the stages run individually") {
  TempDir dir("pyr_cli_all");
  std::string regime = write_regime(dir);
  std::string a = dir / "A";
  REQUIRE(run("all --config " + regime + " --out-dir " + a +
              " --horizon 2033 --seed 1") == 0);

  // Replicate stage by stage with the same effective arguments.
  std::string b = dir / "B";
  fs::create_directories(b);
  REQUIRE(run("synth --config " + regime + " --out " + b + "/records.jsonl" +
              " --ledger " + b + "/ledger.csv --name-corpus " + b +
              "/names.csv --seed 1") == 0);
  REQUIRE(run("ingest " + b + "/records.jsonl --cache " + b + "/careers.pyr" +
              " --t-min 2000 --t-max 2023") == 0);
  REQUIRE(run("train-gender --corpus " + b + "/names.csv --models-dir " + b +
              "/models --seed 1") == 0);
  REQUIRE(run("assign-gender --cache " + b + "/careers.pyr --models-dir " + b +
              "/models") == 0);
  REQUIRE(run("thresholds --cache " + b + "/careers.pyr --out " + b +
              "/thresholds.csv") == 0);
  for (const std::string country : {"AA", "BB"}) {
    REQUIRE(run("pyramid --cache " + b + "/careers.pyr --thresholds " + b +
                "/thresholds.csv --country " + country +
                " --year 2023 --out-dir " + b) == 0);
    REQUIRE(run("project --cache " + b + "/careers.pyr --thresholds " + b +
                "/thresholds.csv --country " + country +
                " --year 2023 --horizon 2033 --out-dir " + b) == 0);
  }
  REQUIRE(run("metrics --cache " + b + "/careers.pyr --thresholds " + b +
              "/thresholds.csv --year 2023 --horizon 2033 --out-dir " + b) ==
          0);
  REQUIRE(run("trends --cache " + b + "/careers.pyr --from 2000 --to 2023" +
              " --out-dir " + b) == 0);

  std::size_t compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    auto rel = fs::relative(entry.path(), a);
    INFO("file " << rel);
    REQUIRE(fs::exists(b / rel));
    CHECK(pyr::read_file(entry.path().string()) ==
          pyr::read_file((b / rel).string()));
    ++compared;
  }
  CHECK(compared >= 30);
}
