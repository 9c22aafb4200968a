#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pyramids/metrics.hpp"
#include "pyramids/report.hpp"
#include "pyramids/rng.hpp"

using namespace pyr;

namespace {

Pyramid pyramid_with(std::map<int, double> female, std::map<int, double> male,
                     int year = 2023) {
  Pyramid p;
  p.country = "US";
  p.year = year;
  p.counts[Gender::female] = std::move(female);
  p.counts[Gender::male] = std::move(male);
  return p;
}

}  // namespace

TEST_CASE("researcher_inflow") {
  auto p = pyramid_with({{1, 30.0}, {5, 20.0}}, {{2, 50.0}});  // 100 active
  SECTION("five percent inflow") {
    std::map<Gender, std::map<int, double>> na;
    na[Gender::female][1] = 2.0;
    na[Gender::male][1] = 3.0;
    auto r = researcher_inflow(p, na);
    CHECK(r.inflow == Catch::Approx(0.05));
    CHECK(r.female_share == Catch::Approx(0.4));
  }
  SECTION("zero inflow") {
    auto r = researcher_inflow(p, {});
    CHECK(r.inflow == 0.0);
    CHECK(r.female_share == 0.0);
  }
  SECTION("empty population is an error") {
    Pyramid empty;
    CHECK_THROWS_AS(researcher_inflow(empty, {}), Error);
  }
}

TEST_CASE("gender gap") {
  SECTION("identical distributions gap to zero") {
    auto p = pyramid_with({{2, 10.0}, {6, 10.0}}, {{2, 10.0}, {6, 10.0}});
    CHECK(gender_gap(p) == 0.0);
  }
  SECTION("female mean half the male mean") {
    auto p = pyramid_with({{2, 10.0}}, {{4, 10.0}});
    CHECK(gender_gap(p) == Catch::Approx(-0.5));
  }
  SECTION("invariant under scaling both populations") {
    Rng rng(81);
    std::map<int, double> f, m;
    for (int k = 1; k <= 30; ++k) {
      f[k] = static_cast<double>(1 + rng.below(40));
      m[k] = static_cast<double>(1 + rng.below(40));
    }
    auto p = pyramid_with(f, m);
    for (auto& [k, n] : f) n *= 7.0;
    for (auto& [k, n] : m) n *= 7.0;
    auto scaled = pyramid_with(f, m);
    CHECK(gender_gap(scaled) == Catch::Approx(gender_gap(p)).epsilon(1e-12));
  }
  SECTION("missing gender is an error") {
    Pyramid p;
    p.counts[Gender::female] = {{1, 1.0}};
    CHECK_THROWS_AS(gender_gap(p), Error);
  }
}

TEST_CASE("cagr") {
  SECTION("doubling over ten years") {
    CHECK(cagr(100.0, 200.0, 2013, 2023) ==
          Catch::Approx(std::pow(2.0, 0.1) - 1.0).epsilon(1e-14));
  }
  SECTION("flat population") { CHECK(cagr(50.0, 50.0, 2000, 2010) == 0.0); }
  SECTION("inverse consistency: applying the rate recovers n2") {
    Rng rng(83);
    for (int trial = 0; trial < 100; ++trial) {
      double n1 = 1.0 + rng.uniform() * 1000.0;
      double n2 = 1.0 + rng.uniform() * 1000.0;
      double t1 = 2000, t2 = 2000 + 1 + rng.below(30);
      double g = cagr(n1, n2, t1, t2);
      CHECK(n1 * std::pow(1.0 + g, t2 - t1) == Catch::Approx(n2).epsilon(1e-9));
    }
  }
  SECTION("bad arguments") {
    CHECK_THROWS_AS(cagr(0.0, 10.0, 2000, 2001), Error);
    CHECK_THROWS_AS(cagr(10.0, 10.0, 2001, 2000), Error);
  }
}

TEST_CASE("female share") {
  auto p = pyramid_with({{1, 30.0}, {60, 10.0}}, {{1, 10.0}, {70, 30.0}});
  SECTION("all stages") {
    CHECK(female_share(p, StageFilter::all) == Catch::Approx(0.5));
  }
  SECTION("senior stage only counts k >= 51") {
    CHECK(female_share(p, StageFilter::senior) == Catch::Approx(0.25));
  }
  SECTION("boundary: k = 50 is not senior, k = 51 is") {
    auto q = pyramid_with({{50, 100.0}, {51, 1.0}}, {{51, 3.0}});
    CHECK(female_share(q, StageFilter::senior) == Catch::Approx(0.25));
  }
  SECTION("empty senior cohort is an error") {
    auto q = pyramid_with({{1, 5.0}}, {{2, 5.0}});
    CHECK_THROWS_AS(female_share(q, StageFilter::senior), Error);
  }
  SECTION("parity band bounds are inclusive") {
    ParityBand band;
    CHECK(band.contains(0.45));
    CHECK(band.contains(0.55));
    CHECK(!band.contains(0.4499999));
    CHECK(!band.contains(0.5500001));
  }
}

TEST_CASE("metrics report") {
  auto observed = pyramid_with({{1, 20.0}, {55, 5.0}}, {{1, 20.0}, {55, 5.0}},
                               2023);
  auto proj = pyramid_with({{2, 30.0}}, {{2, 70.0}}, 2033);
  proj.provenance = Pyramid::Provenance::projected;
  std::map<Gender, std::map<int, double>> na;
  na[Gender::female][1] = 1.0;
  na[Gender::male][1] = 4.0;
  std::map<int, const Pyramid*> by_year{{2023, &observed}, {2033, &proj}};

  auto r = build_metrics_report(observed, na, by_year, {{2023, 2033}},
                                {2023, 2033}, ParityBand{});
  CHECK(r.country == "US");
  CHECK(r.year == 2023);
  CHECK(r.inflow == Catch::Approx(5.0 / 50.0));
  CHECK(r.inflow_female_share == Catch::Approx(0.2));
  CHECK(r.gender_gap == 0.0);
  REQUIRE(r.cagr.size() == 1);
  CHECK(r.cagr[0].value ==
        Catch::Approx(std::pow(100.0 / 50.0, 0.1) - 1.0).epsilon(1e-12));
  REQUIRE(r.shares.size() == 2);
  CHECK(r.shares[0].all == Catch::Approx(0.5));
  CHECK(r.shares[0].all_parity);
  CHECK(r.shares[0].senior == Catch::Approx(0.5));
  CHECK(r.shares[1].all == Catch::Approx(0.3));
  CHECK(!r.shares[1].all_parity);
  // The projected pyramid has no senior cohort: share is NaN, not parity.
  CHECK(std::isnan(r.shares[1].senior));
  CHECK(!r.shares[1].senior_parity);

  SECTION("missing years are skipped, not fabricated") {
    auto r2 = build_metrics_report(observed, na, by_year, {{2023, 2040}},
                                   {2023, 2040}, ParityBand{});
    CHECK(r2.cagr.empty());
    REQUIRE(r2.shares.size() == 1);
    CHECK(r2.shares[0].year == 2023);
  }
  SECTION("JSON report carries the headline numbers") {
    auto j = metrics_report_json(r);
    CHECK(j["country"] == "US");
    CHECK(j["inflow"].get<double>() == Catch::Approx(0.1));
    CHECK(j["gender_gap"].get<double>() == 0.0);
    REQUIRE(j["female_share"].size() == 2);
    CHECK(j["female_share"][0]["all"].get<double>() == Catch::Approx(0.5));
    CHECK(j["female_share"][1]["senior"].is_null());  // NaN maps to null
  }
}
