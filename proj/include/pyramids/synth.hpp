#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "pyramids/common.hpp"
#include "pyramids/date.hpp"
#include "pyramids/gender.hpp"
#include "pyramids/ingest.hpp"
#include "pyramids/rng.hpp"

namespace pyr {

struct IntervalDist {
  enum class Kind { exponential, lognormal, fixed };
  Kind kind = Kind::exponential;
  double p1 = 1.0;  // mean / mu / value
  double p2 = 0.0;  // sigma for lognormal

  double sample(Rng& rng) const {
    switch (kind) {
      case Kind::exponential: return rng.exponential(p1);
      case Kind::lognormal: return rng.lognormal(p1, p2);
      default: return p1;
    }
  }

  void validate() const {
    switch (kind) {
      case Kind::exponential:
        if (!(p1 > 0.0)) throw Error("exponential interval needs mean > 0");
        break;
      case Kind::lognormal:
        if (!(p2 > 0.0)) throw Error("lognormal interval needs sigma > 0");
        break;
      default:
        if (!(p1 >= 0.0)) throw Error("fixed interval must be >= 0");
    }
  }
};

struct CountryRegime {
  std::string country;
  double newcomers0 = 0.0;          // newcomers in the first year
  double growth = 0.0;              // annual compound growth of newcomers
  double female_frac = 0.5;         // female fraction of newcomers, year 0
  double female_frac_growth = 0.0;  // additive per year once the ramp starts
  int female_frac_onset = 0;        // years before the ramp starts
  double female_frac_cap = 1.0;     // plateau for the growing fraction
  IntervalDist interval;
  double attrition = 0.0;  // per-year career stop hazard

  double female_frac_at(int years_in) const {
    int ramp = std::max(0, years_in - female_frac_onset);
    return std::clamp(female_frac + female_frac_growth * ramp, 0.0,
                      female_frac_cap);
  }
};

struct RegimeConfig {
  std::uint64_t seed = 0;
  int year_start = 2000;
  int year_end = 2023;
  std::vector<CountryRegime> countries;
  // Seeded authors present from year_start regardless of newcomer rates.
  std::vector<std::pair<std::string, Gender>> seeded_authors;

  void validate() const {
    if (year_end < year_start) throw Error("regime years out of order");
    for (const auto& c : countries) {
      if (c.newcomers0 < 0.0) throw Error("newcomer rate must be >= 0");
      if (c.female_frac < 0.0 || c.female_frac > 1.0)
        throw Error("female fraction must be in [0, 1]");
      if (c.female_frac_cap <= 0.0 || c.female_frac_cap > 1.0)
        throw Error("female fraction cap must be in (0, 1]");
      if (c.attrition < 0.0 || c.attrition >= 1.0)
        throw Error("attrition hazard must be in [0, 1)");
      c.interval.validate();
    }
  }
};

// Plain-text key-value config. `country CODE` opens a block; following
// lines set that block's fields until the next `country`.
inline RegimeConfig parse_regime_config(const std::string& text) {
  RegimeConfig cfg;
  std::istringstream in(text);
  std::string line;
  CountryRegime* cur = nullptr;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    auto fail = [&](const std::string& msg) -> Error {
      return Error("regime config line " + std::to_string(line_no) + ": " + msg);
    };
    if (key == "seed") {
      if (!(ls >> cfg.seed)) throw fail("seed needs a value");
    } else if (key == "years") {
      if (!(ls >> cfg.year_start >> cfg.year_end))
        throw fail("years needs start and end");
    } else if (key == "country") {
      std::string code;
      if (!(ls >> code)) throw fail("country needs a code");
      cfg.countries.push_back({});
      cur = &cfg.countries.back();
      cur->country = code;
    } else if (key == "seeded_author") {
      std::string code, g;
      if (!(ls >> code >> g)) throw fail("seeded_author needs country gender");
      auto gender = gender_from_string(g);
      if (!gender || *gender == Gender::unassigned) throw fail("bad gender");
      cfg.seeded_authors.emplace_back(code, *gender);
    } else if (!cur) {
      throw fail("field '" + key + "' before any country block");
    } else if (key == "newcomers") {
      if (!(ls >> cur->newcomers0)) throw fail("newcomers needs a value");
    } else if (key == "growth") {
      if (!(ls >> cur->growth)) throw fail("growth needs a value");
    } else if (key == "female_frac") {
      if (!(ls >> cur->female_frac)) throw fail("female_frac needs a value");
    } else if (key == "female_frac_growth") {
      if (!(ls >> cur->female_frac_growth))
        throw fail("female_frac_growth needs a value");
    } else if (key == "female_frac_cap") {
      if (!(ls >> cur->female_frac_cap))
        throw fail("female_frac_cap needs a value");
    } else if (key == "female_frac_onset") {
      if (!(ls >> cur->female_frac_onset) || cur->female_frac_onset < 0)
        throw fail("female_frac_onset needs a nonnegative year count");
    } else if (key == "attrition") {
      if (!(ls >> cur->attrition)) throw fail("attrition needs a value");
    } else if (key == "interval") {
      std::string kind;
      if (!(ls >> kind)) throw fail("interval needs a kind");
      if (kind == "exponential") {
        cur->interval.kind = IntervalDist::Kind::exponential;
        if (!(ls >> cur->interval.p1)) throw fail("exponential needs a mean");
      } else if (kind == "lognormal") {
        cur->interval.kind = IntervalDist::Kind::lognormal;
        if (!(ls >> cur->interval.p1 >> cur->interval.p2))
          throw fail("lognormal needs mu and sigma");
      } else if (kind == "fixed") {
        cur->interval.kind = IntervalDist::Kind::fixed;
        if (!(ls >> cur->interval.p1)) throw fail("fixed needs a value");
      } else {
        throw fail("unknown interval kind '" + kind + "'");
      }
    } else if (key == "papers_per_year") {
      double ppy;
      if (!(ls >> ppy) || !(ppy > 0.0))
        throw fail("papers_per_year needs a positive value");
      cur->interval.kind = IntervalDist::Kind::exponential;
      cur->interval.p1 = 1.0 / ppy;
    } else {
      throw fail("unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

inline RegimeConfig load_regime_config(const std::string& path) {
  return parse_regime_config(read_file(path));
}

struct LedgerEntry {
  std::string author_id;
  std::string full_name;
  std::string country;
  Gender gender = Gender::unassigned;
  std::vector<Date> dates;
};

struct SynthResult {
  std::vector<PublicationRecord> records;  // sorted by (date, work_id)
  std::vector<LedgerEntry> ledger;         // in author-id order
};

namespace detail {

// Suffix-coded pronounceable name: random CV syllables, 'a' ending for
// female, 'o' for male. Interior vowels avoid 'a'/'o' so the suffix stays a
// clean, learnable gender signal.
inline std::string synth_name(Rng& rng, Gender g) {
  static constexpr const char* kConsonants = "bdfghklmnprstvz";
  static constexpr const char* kVowels = "eiu";
  std::string given;
  std::size_t syllables = 2 + rng.below(2);
  for (std::size_t i = 0; i < syllables; ++i) {
    given += kConsonants[rng.below(15)];
    given += kVowels[rng.below(3)];
  }
  given.back() = g == Gender::female ? 'a' : 'o';
  given[0] = static_cast<char>(given[0] - 'a' + 'A');
  std::string family;
  for (std::size_t i = 0; i < 2; ++i) {
    family += kConsonants[rng.below(15)];
    family += kVowels[rng.below(3)];
  }
  family[0] = static_cast<char>(family[0] - 'a' + 'A');
  return given + " " + family;
}

inline Date random_date_in_year(Rng& rng, int year) {
  std::int32_t start = Date::from_ymd(year, 1, 1).days();
  std::int32_t end = Date::end_of_year(year).days();
  return Date(start + static_cast<std::int32_t>(
                          rng.below(static_cast<std::uint64_t>(end - start + 1))));
}

}  // namespace detail

// Deterministic corpus generation: every author's career comes from a child
// stream forked by author index, so the output is byte-identical for a seed
// no matter how the loop is scheduled.
inline SynthResult generate(const RegimeConfig& cfg) {
  cfg.validate();
  SynthResult out;
  Rng master(cfg.seed);
  std::uint64_t author_index = 0;
  const Date hard_end = Date::end_of_year(cfg.year_end);

  auto emit_author = [&](const std::string& country, Gender g,
                         const CountryRegime& regime, int start_year) {
    Rng rng = master.fork(author_index);
    LedgerEntry entry;
    char idbuf[16];
    std::snprintf(idbuf, sizeof(idbuf), "A%08llu",
                  static_cast<unsigned long long>(author_index));
    ++author_index;
    entry.author_id = idbuf;
    entry.country = country;
    entry.gender = g;
    entry.full_name = detail::synth_name(rng, g);

    Date d = detail::random_date_in_year(rng, start_year);
    while (d <= hard_end) {
      entry.dates.push_back(d);
      double gap = regime.interval.sample(rng);
      // Career survival over the gap under a constant annual hazard.
      if (regime.attrition > 0.0 &&
          !rng.bernoulli(std::pow(1.0 - regime.attrition, gap)))
        break;
      auto days = static_cast<std::int64_t>(std::llround(gap * 365.0));
      if (days < 1) days = 1;
      d = Date(static_cast<std::int32_t>(d.days() + days));
    }
    if (!entry.dates.empty()) out.ledger.push_back(std::move(entry));
  };

  for (const auto& [country, g] : cfg.seeded_authors) {
    const CountryRegime* regime = nullptr;
    for (const auto& r : cfg.countries)
      if (r.country == country) regime = &r;
    if (!regime) throw Error("seeded_author country has no regime: " + country);
    emit_author(country, g, *regime, cfg.year_start);
  }

  for (const auto& regime : cfg.countries) {
    for (int y = cfg.year_start; y <= cfg.year_end; ++y) {
      int years_in = y - cfg.year_start;
      auto n = static_cast<std::uint64_t>(std::llround(
          regime.newcomers0 * std::pow(1.0 + regime.growth, years_in)));
      double f_frac = regime.female_frac_at(years_in);
      auto n_female = static_cast<std::uint64_t>(std::llround(n * f_frac));
      for (std::uint64_t i = 0; i < n; ++i)
        emit_author(regime.country, i < n_female ? Gender::female : Gender::male,
                    regime, y);
    }
  }

  for (const auto& e : out.ledger) {
    for (std::size_t i = 0; i < e.dates.size(); ++i) {
      PublicationRecord rec;
      rec.work_id = "W" + e.author_id.substr(1) + "_" + std::to_string(i);
      rec.work_type = "article";
      rec.date = e.dates[i];
      Authorship a;
      a.author_id = e.author_id;
      a.full_name = e.full_name;
      a.countries = {e.country};
      rec.authorships.push_back(std::move(a));
      out.records.push_back(std::move(rec));
    }
  }
  std::sort(out.records.begin(), out.records.end(),
            [](const PublicationRecord& a, const PublicationRecord& b) {
              return a.date != b.date ? a.date < b.date
                                      : a.work_id < b.work_id;
            });
  return out;
}

inline void save_records_jsonl(const std::vector<PublicationRecord>& records,
                               const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << R"({"format":"pyr-records","version":1})" << "\n";
  for (const auto& r : records) out << serialize_record(r) << '\n';
}

inline void save_ledger_csv(const std::vector<LedgerEntry>& ledger,
                            const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << "author_id,full_name,country,gender,n_pubs,dates\n";
  for (const auto& e : ledger) {
    out << e.author_id << ',' << e.full_name << ',' << e.country << ','
        << to_string(e.gender) << ',' << e.dates.size() << ',';
    for (std::size_t i = 0; i < e.dates.size(); ++i) {
      if (i) out << ';';
      out << e.dates[i].to_string();
    }
    out << '\n';
  }
}

// Suffix-coded labeled name corpus for classifier tests: per country and
// gender, `per_gender` names split train/validation/test 60/20/20.
inline NameCorpus generate_name_corpus(const std::vector<std::string>& countries,
                                       std::size_t per_gender,
                                       std::uint64_t seed) {
  NameCorpus corpus;
  corpus.source_tag = "synthetic";
  Rng master(seed);
  std::uint64_t key = 0;
  for (const auto& country : countries)
    for (Gender g : {Gender::female, Gender::male}) {
      Rng rng = master.fork(key++);
      for (std::size_t i = 0; i < per_gender; ++i) {
        NameEntry e;
        e.first_name = normalize_first_name(detail::synth_name(rng, g));
        e.gender = g;
        e.country = country;
        e.split = i < per_gender * 3 / 5   ? Split::train
                  : i < per_gender * 4 / 5 ? Split::validation
                                           : Split::test;
        corpus.entries.push_back(std::move(e));
      }
    }
  return corpus;
}

}  // namespace pyr
