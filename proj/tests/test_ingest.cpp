#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <map>
#include <set>

#include "pyramids/cache.hpp"
#include "pyramids/ingest.hpp"
#include "pyramids/rng.hpp"

using namespace pyr;

namespace {

std::string record_line(const std::string& id, const std::string& date,
                        const std::vector<std::string>& authors,
                        const std::string& type = "article",
                        const std::vector<std::string>& countries = {"US"}) {
  nlohmann::ordered_json j;
  j["id"] = id;
  j["type"] = type;
  j["publication_date"] = date;
  auto& arr = j["authorships"] = nlohmann::json::array();
  for (const auto& a : authors)
    arr.push_back({{"author_id", a},
                   {"author_name", "Name " + a},
                   {"countries", countries}});
  return j.dump();
}

}  // namespace

TEST_CASE("parse_publications basics") {
  IngestConfig cfg;
  SECTION("well-formed line with two authorships") {
    ParseStats stats;
    auto recs = parse_publications(
        record_line("w1", "2001-06-15", {"a1", "a2"}) + "\n", cfg, stats);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].authorships.size() == 2);
    CHECK(recs[0].date == Date::from_ymd(2001, 6, 15));
    CHECK(stats.accepted == 1);
  }
  SECTION("date below t_min is dropped and counted") {
    ParseStats stats;
    auto recs = parse_publications(
        record_line("w1", "1949-12-31", {"a1"}) + "\n", cfg, stats);
    CHECK(recs.empty());
    CHECK(stats.dropped_window == 1);
  }
  SECTION("wrong work type is dropped and counted") {
    ParseStats stats;
    auto recs = parse_publications(
        record_line("w1", "2001-01-01", {"a1"}, "dataset") + "\n", cfg, stats);
    CHECK(recs.empty());
    CHECK(stats.dropped_type == 1);
  }
  SECTION("empty author_id rejects the line") {
    ParseStats stats;
    auto recs = parse_publications(
        record_line("w1", "2001-01-01", {""}) + "\n", cfg, stats);
    CHECK(recs.empty());
    CHECK(stats.malformed == 1);
    REQUIRE(stats.malformed_lines.size() == 1);
    CHECK(stats.malformed_lines[0] == 1);
  }
  SECTION("malformed JSON is tallied with its line number, parsing continues") {
    ParseStats stats;
    std::string buf = record_line("w1", "2001-01-01", {"a1"}) + "\n" +
                      "{not json\n" +
                      record_line("w2", "2002-01-01", {"a2"}) + "\n";
    auto recs = parse_publications(buf, cfg, stats);
    CHECK(recs.size() == 2);
    CHECK(stats.malformed == 1);
    REQUIRE(stats.malformed_lines.size() == 1);
    CHECK(stats.malformed_lines[0] == 2);
  }
  SECTION("valid header marker is skipped; invalid is fatal") {
    ParseStats stats;
    std::string good = R"({"format":"pyr-records","version":1})" "\n" +
                       record_line("w1", "2001-01-01", {"a1"}) + "\n";
    CHECK(parse_publications(good, cfg, stats).size() == 1);
    std::string bad = R"({"format":"pyr-records","version":99})" "\n";
    CHECK_THROWS_AS(parse_publications(bad, cfg, stats), Error);
  }
}

TEST_CASE("record serialization is byte-stable") {
  IngestConfig cfg;
  ParseStats stats;
  std::string canonical =
      record_line("w1", "2001-06-15", {"a1", "a2"}) + "\n";
  auto recs = parse_publications(canonical, cfg, stats);
  REQUIRE(recs.size() == 1);
  std::string once = serialize_record(recs[0]) + "\n";
  ParseStats stats2;
  auto again = parse_publications(once, cfg, stats2);
  REQUIRE(again.size() == 1);
  CHECK(serialize_record(again[0]) + "\n" == once);
  CHECK(once == canonical);
}

TEST_CASE("build_careers aggregation") {
  IngestConfig cfg;
  SECTION("dates aggregate per author in order") {
    ParseStats stats;
    auto recs = parse_publications(
        record_line("w1", "2000-03-01", {"a"}) + "\n" +
            record_line("w2", "2005-07-01", {"a"}) + "\n",
        cfg, stats);
    auto table = build_careers(recs);
    const auto* c = table.find("a");
    REQUIRE(c != nullptr);
    REQUIRE(c->publication_dates.size() == 2);
    CHECK(c->publication_dates[0] == Date::from_ymd(2000, 3, 1));
    CHECK(c->publication_dates[1] == Date::from_ymd(2005, 7, 1));
  }
  SECTION("duplicate authorship on one work contributes one date") {
    ParseStats stats;
    auto recs = parse_publications(
        record_line("w1", "2000-03-01", {"a", "a"}) + "\n", cfg, stats);
    auto table = build_careers(recs);
    const auto* c = table.find("a");
    REQUIRE(c != nullptr);
    CHECK(c->publication_dates.size() == 1);
    // But the country vote counts each listed occurrence.
    REQUIRE(c->country_frequencies.size() == 1);
    CHECK(c->country_frequencies[0].second == 2);
  }
  SECTION("duplicate work records contribute one date") {
    ParseStats stats;
    std::string line = record_line("w1", "2000-03-01", {"a"}) + "\n";
    auto recs = parse_publications(line + line, cfg, stats);
    auto table = build_careers(recs);
    CHECK(table.find("a")->publication_dates.size() == 1);
  }
  SECTION("most frequent name wins, ties lexicographic") {
    std::vector<PublicationRecord> recs;
    auto mk = [](std::string wid, std::string name) {
      PublicationRecord r;
      r.work_id = std::move(wid);
      r.date = Date::from_ymd(2000, 1, 1);
      Authorship a;
      a.author_id = "a";
      a.full_name = std::move(name);
      r.authorships.push_back(a);
      return r;
    };
    recs.push_back(mk("w1", "Zed Q"));
    recs.push_back(mk("w2", "Ann Q"));
    auto table = build_careers(recs);
    CHECK(table.find("a")->full_name == "Ann Q");
  }
  SECTION("10k synthetic records equal brute-force grouping") {
    Rng rng(41);
    std::vector<PublicationRecord> recs;
    for (int i = 0; i < 10000; ++i) {
      PublicationRecord r;
      r.work_id = "w" + std::to_string(rng.below(4000));
      r.work_type = "article";
      r.date = Date(static_cast<std::int32_t>(10957 + rng.below(8000)));
      int n_auth = 1 + static_cast<int>(rng.below(3));
      for (int k = 0; k < n_auth; ++k) {
        Authorship a;
        a.author_id = "a" + std::to_string(rng.below(500));
        if (rng.bernoulli(0.8))
          a.countries.push_back(rng.bernoulli(0.5) ? "US" : "JP");
        r.authorships.push_back(a);
      }
      recs.push_back(r);
    }
    // Brute-force nested-loop oracle. Duplicate work ids may carry different
    // dates; the career keeps one entry per work, at the earliest date.
    std::map<std::string, std::map<std::string, std::int32_t>> first_date;
    for (const auto& r : recs)
      for (const auto& a : r.authorships) {
        auto [it, fresh] =
            first_date[a.author_id].emplace(r.work_id, r.date.days());
        if (!fresh) it->second = std::min(it->second, r.date.days());
      }
    auto table = build_careers(recs);
    REQUIRE(table.size() == first_date.size());
    for (const auto& [aid, works] : first_date) {
      const auto* c = table.find(aid);
      REQUIRE(c != nullptr);
      std::multiset<std::int32_t> expect;
      for (const auto& [w, d] : works) expect.insert(d);
      std::multiset<std::int32_t> got;
      for (Date d : c->publication_dates) got.insert(d.days());
      CHECK(got == expect);
    }
  }
}

TEST_CASE("assign_countries") {
  SECTION("unique argmax") {
    CHECK(assign_countries({{"US", 3}, {"JP", 1}}) ==
          std::vector<std::string>{"US"});
  }
  SECTION("ties keep all") {
    CHECK(assign_countries({{"US", 2}, {"JP", 2}}) ==
          std::vector<std::string>{"JP", "US"});
  }
  SECTION("no observations, no countries") {
    CHECK(assign_countries({}).empty());
    AuthorCareer c;
    CHECK(c.excluded_no_country());
  }
}

TEST_CASE("sharded parse equals single pass") {
  Rng rng(43);
  std::string buf;
  std::uint64_t n_lines = 0;
  for (int i = 0; i < 2000; ++i) {
    if (rng.bernoulli(0.02)) {
      buf += "garbage line\n";
    } else {
      buf += record_line("w" + std::to_string(rng.below(900)),
                         "20" + std::to_string(10 + rng.below(10)) + "-01-15",
                         {"a" + std::to_string(rng.below(200))}) +
             "\n";
    }
    ++n_lines;
  }
  std::string path = "shard_test.jsonl";
  write_file(path, buf);
  IngestConfig cfg;
  auto one = build_career_table({path}, cfg, 1);
  auto four = build_career_table({path}, cfg, 4);
  REQUIRE(one.size() == four.size());
  CHECK(one.stats.accepted == four.stats.accepted);
  CHECK(one.stats.malformed == four.stats.malformed);
  CHECK(one.stats.malformed_lines == four.stats.malformed_lines);
  for (std::size_t i = 0; i < one.size(); ++i) {
    const auto& a = one.careers()[i];
    const auto& b = four.careers()[i];
    CHECK(a.author_id == b.author_id);
    CHECK(a.publication_dates == b.publication_dates);
    CHECK(a.country_frequencies == b.country_frequencies);
    CHECK(a.assigned_countries == b.assigned_countries);
  }
  std::remove(path.c_str());
}

TEST_CASE("permutation invariance of careers") {
  Rng rng(47);
  std::vector<std::string> lines;
  for (int i = 0; i < 300; ++i)
    lines.push_back(record_line("w" + std::to_string(i), "2005-04-01",
                                {"a" + std::to_string(rng.below(40))},
                                "article",
                                {rng.bernoulli(0.5) ? "US" : "JP"}));
  auto build = [](const std::vector<std::string>& ls) {
    std::string buf;
    for (const auto& l : ls) buf += l + "\n";
    IngestConfig cfg;
    ParseStats stats;
    return build_careers(parse_publications(buf, cfg, stats));
  };
  auto t1 = build(lines);
  shuffle(lines, rng);
  auto t2 = build(lines);
  REQUIRE(t1.size() == t2.size());
  for (std::size_t i = 0; i < t1.size(); ++i) {
    CHECK(t1.careers()[i].author_id == t2.careers()[i].author_id);
    CHECK(t1.careers()[i].assigned_countries ==
          t2.careers()[i].assigned_countries);
    CHECK(t1.careers()[i].country_frequencies ==
          t2.careers()[i].country_frequencies);
  }
}

TEST_CASE("career cache round-trip") {
  IngestConfig cfg;
  ParseStats stats;
  auto recs = parse_publications(
      record_line("w1", "2000-03-01", {"a1", "a2"}) + "\n" +
          record_line("w2", "2010-05-02", {"a1"}) + "\n",
      cfg, stats);
  auto table = build_careers(recs);
  table.stats = stats;
  table.find("a1")->gender = Gender::female;
  table.find("a1")->gender_by_country.emplace_back("US", Gender::female);

  std::string path = "cache_test.pyr";
  save_career_cache(table, path);
  auto loaded = load_career_cache(path);
  REQUIRE(loaded.size() == table.size());
  CHECK(loaded.stats.accepted == stats.accepted);
  const auto* a1 = loaded.find("a1");
  REQUIRE(a1 != nullptr);
  CHECK(a1->gender == Gender::female);
  CHECK(a1->gender_for("US") == Gender::female);
  CHECK(a1->publication_dates == table.find("a1")->publication_dates);
  CHECK(a1->country_frequencies == table.find("a1")->country_frequencies);

  // Saving the loaded table is byte-identical.
  std::string path2 = "cache_test2.pyr";
  save_career_cache(loaded, path2);
  CHECK(read_file(path) == read_file(path2));

  SECTION("bad magic is rejected") {
    write_file(path, "NOPE");
    CHECK_THROWS_AS(load_career_cache(path), Error);
  }
  std::remove(path.c_str());
  std::remove(path2.c_str());
}

TEST_CASE("gzip input") {
  std::string line = record_line("w1", "2001-06-15", {"a1"}) + "\n";
  std::string path = "gz_test.jsonl.gz";
  gzFile f = gzopen(path.c_str(), "wb");
  REQUIRE(f != nullptr);
  gzwrite(f, line.data(), static_cast<unsigned>(line.size()));
  gzclose(f);
  IngestConfig cfg;
  auto table = build_career_table({path}, cfg, 2);
  CHECK(table.size() == 1);
  CHECK(table.stats.accepted == 1);
  std::remove(path.c_str());
}
