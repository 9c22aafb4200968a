#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pyramids/common.hpp"
#include "pyramids/date.hpp"
#include "pyramids/ingest.hpp"

namespace pyr {

// Consecutive inter-publication intervals in years (days / 365), in
// chronological order. Authors with fewer than two publications contribute
// nothing.
inline std::vector<double> interpublication_intervals(
    const AuthorCareer& career) {
  std::vector<double> out;
  const auto& d = career.publication_dates;
  if (d.size() < 2) return out;
  out.reserve(d.size() - 1);
  for (std::size_t i = 1; i < d.size(); ++i)
    out.push_back(days_to_years(d[i].days() - d[i - 1].days()));
  return out;
}

// Largest interval at which the empirical survival probability stays above
// 1%. S(x) = fraction of intervals strictly greater than x; the returned
// value is the smallest observed interval with S <= 0.01 (exact ties at 1%
// count as not above). Empty pool -> nullopt.
inline std::optional<double> estimate_ipi_threshold(
    std::vector<double> intervals) {
  if (intervals.empty()) return std::nullopt;
  std::sort(intervals.begin(), intervals.end());
  const std::size_t n = intervals.size();
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && intervals[j] == intervals[i]) ++j;
    // S(v) = (n - j) / n; integer comparison: S <= 0.01 <=> 100*(n-j) <= n
    if (100 * (n - j) <= n) return intervals[i];
    i = j;
  }
  return intervals.back();  // unreachable: the last value always has S = 0
}

struct IPIThresholdTable {
  enum class Provenance { estimated, fixture };

  std::map<std::pair<std::string, Gender>, double> deltas;
  Provenance provenance = Provenance::estimated;

  std::optional<double> find(const std::string& country, Gender g) const {
    auto it = deltas.find({country, g});
    if (it == deltas.end()) return std::nullopt;
    return it->second;
  }
};

// Pools intervals from gender-assigned authors with >= 2 papers, per
// (country, gender), and estimates each threshold. Multi-country authors
// contribute to every assigned country's pool.
inline IPIThresholdTable estimate_ipi_table(
    std::span<const AuthorCareer> careers) {
  std::map<std::pair<std::string, Gender>, std::vector<double>> pools;
  for (const auto& c : careers) {
    auto intervals = interpublication_intervals(c);
    if (intervals.empty()) continue;
    for (const auto& country : c.assigned_countries) {
      Gender g = c.gender_for(country);
      if (g == Gender::unassigned) continue;
      auto& pool = pools[{country, g}];
      pool.insert(pool.end(), intervals.begin(), intervals.end());
    }
  }
  IPIThresholdTable table;
  for (auto& [key, pool] : pools)
    if (auto delta = estimate_ipi_threshold(std::move(pool)))
      table.deltas[key] = *delta;
  return table;
}

inline void save_ipi_table(const IPIThresholdTable& table,
                           const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << "country,gender,delta_years\n";
  out.precision(10);
  for (const auto& [key, delta] : table.deltas)
    out << key.first << ',' << to_string(key.second) << ',' << delta << '\n';
}

inline IPIThresholdTable load_ipi_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  IPIThresholdTable table;
  table.provenance = IPIThresholdTable::Provenance::fixture;
  std::string line;
  if (!std::getline(in, line) || line.rfind("country,gender,delta_years", 0) != 0)
    throw Error("bad threshold table header in " + path);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split(line, ',');
    if (fields.size() != 3)
      throw Error(path + ": bad row at line " + std::to_string(line_no));
    auto g = gender_from_string(fields[1]);
    if (!g || *g == Gender::unassigned)
      throw Error(path + ": bad gender at line " + std::to_string(line_no));
    double delta = std::stod(fields[2]);
    if (!(delta > 0))
      throw Error(path + ": nonpositive delta at line " + std::to_string(line_no));
    table.deltas[{fields[0], *g}] = delta;
  }
  return table;
}

// Active in year t: published within delta years before the end-of-year
// reference point, boundary inclusive.
inline bool is_active(const AuthorCareer& career, int year, double delta) {
  const Date ref = Date::end_of_year(year);
  for (auto it = career.publication_dates.rbegin();
       it != career.publication_dates.rend(); ++it) {
    if (*it > ref) continue;
    return days_to_years(ref.days() - it->days()) <= delta;
  }
  return false;
}

namespace detail {

// Dates at or before the end of year t, as a prefix of the sorted list.
inline std::span<const Date> dates_through(const AuthorCareer& career,
                                           int year) {
  const Date ref = Date::end_of_year(year);
  auto end = std::upper_bound(career.publication_dates.begin(),
                              career.publication_dates.end(), ref);
  return {career.publication_dates.data(),
          static_cast<std::size_t>(end - career.publication_dates.begin())};
}

}  // namespace detail

// Eligibility at year t: (i) >= 2 papers by t; (ii) first-to-latest span in
// [1, 40] years; (iii) annual productivity (papers / span) < 20; (iv) active.
inline bool is_eligible(const AuthorCareer& career, int year, double delta) {
  auto dates = detail::dates_through(career, year);
  if (dates.size() < 2) return false;
  double span = days_to_years(dates.back().days() - dates.front().days());
  if (span < 1.0 || span > 40.0) return false;
  if (static_cast<double>(dates.size()) / span >= 20.0) return false;
  return is_active(career, year, delta);
}

// Length of the most recent publication chain whose consecutive gaps are all
// <= delta, over publications through year t. Same-day pairs give a gap of
// 0 and never reset.
inline int cumulative_productivity(const AuthorCareer& career, int year,
                                   double delta) {
  auto dates = detail::dates_through(career, year);
  if (dates.empty())
    throw Error("cumulative_productivity: no publications by year " +
                std::to_string(year));
  int k = 1;
  for (std::size_t i = 1; i < dates.size(); ++i) {
    double gap = days_to_years(dates[i].days() - dates[i - 1].days());
    k = gap > delta ? 1 : k + 1;
  }
  return k;
}

}  // namespace pyr
