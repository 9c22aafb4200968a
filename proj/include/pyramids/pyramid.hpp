#pragma once

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pyramids/careers.hpp"
#include "pyramids/common.hpp"
#include "pyramids/ingest.hpp"

namespace pyr {

// Sparse counts over cumulative productivity k >= 1 for one country-year.
// Counts are integers when observed and reals when projected.
struct Pyramid {
  enum class Provenance { observed, projected };

  std::string country;
  int year = 0;
  // gender -> k -> count; ordered maps keep serialization deterministic.
  std::map<Gender, std::map<int, double>> counts;
  Provenance provenance = Provenance::observed;

  double total(Gender g) const {
    auto it = counts.find(g);
    if (it == counts.end()) return 0.0;
    double sum = 0.0;
    for (const auto& [k, n] : it->second) sum += n;
    return sum;
  }

  double total() const { return total(Gender::female) + total(Gender::male); }
};

struct StageBuckets {
  double early = 0.0;   // k in 1..10
  double mid = 0.0;     // k in 11..50
  double senior = 0.0;  // k >= 51
};

inline StageBuckets stage_counts(const std::map<int, double>& by_k) {
  StageBuckets b;
  for (const auto& [k, n] : by_k) {
    if (k <= 10)
      b.early += n;
    else if (k <= 50)
      b.mid += n;
    else
      b.senior += n;
  }
  return b;
}

inline StageBuckets stage_counts(const Pyramid& p, Gender g) {
  auto it = p.counts.find(g);
  return it == p.counts.end() ? StageBuckets{} : stage_counts(it->second);
}

// Observed pyramid: every gender-assigned, eligible (hence active) author
// affiliated with the country, counted at their cumulative productivity.
// A missing (country, gender) threshold skips that gender with a warning.
inline Pyramid build_pyramid(std::span<const AuthorCareer> careers,
                             const IPIThresholdTable& thresholds,
                             const std::string& country, int year,
                             std::ostream* warnings = nullptr) {
  Pyramid p;
  p.country = country;
  p.year = year;
  p.counts[Gender::female];
  p.counts[Gender::male];
  for (Gender g : {Gender::female, Gender::male}) {
    if (!thresholds.find(country, g) && warnings)
      *warnings << "warning: no IPI threshold for " << country << "/"
                << to_string(g) << "; gender skipped\n";
  }
  for (const auto& c : careers) {
    if (!c.affiliated_with(country)) continue;
    Gender g = c.gender_for(country);
    if (g == Gender::unassigned) continue;
    auto delta = thresholds.find(country, g);
    if (!delta) continue;
    if (!is_eligible(c, year, *delta)) continue;
    p.counts[g][cumulative_productivity(c, year, *delta)] += 1.0;
  }
  return p;
}

// Newly active at year t: eligible at t but with no publication inside the
// activity window anchored at the end of year t-1.
inline bool is_newly_active(const AuthorCareer& career, int year,
                            double delta) {
  return is_eligible(career, year, delta) &&
         !is_active(career, year - 1, delta);
}

// Per-gender inflow counts a_k at year t.
inline std::map<Gender, std::map<int, double>> newly_active_counts(
    std::span<const AuthorCareer> careers, const IPIThresholdTable& thresholds,
    const std::string& country, int year) {
  std::map<Gender, std::map<int, double>> out;
  out[Gender::female];
  out[Gender::male];
  for (const auto& c : careers) {
    if (!c.affiliated_with(country)) continue;
    Gender g = c.gender_for(country);
    if (g == Gender::unassigned) continue;
    auto delta = thresholds.find(country, g);
    if (!delta) continue;
    if (!is_newly_active(c, year, *delta)) continue;
    out[g][cumulative_productivity(c, year, *delta)] += 1.0;
  }
  return out;
}

// Inflow a_k and one-year transition rows P_{j->k} estimated from the last
// observed year pair. Row sums may fall short of 1; the missing mass is
// attrition to inactive.
struct TransitionModel {
  std::string country;
  Gender gender = Gender::unassigned;
  int base_year = 0;                        // t_max
  std::map<int, double> inflow;             // k -> a_k at t_max
  std::map<int, std::map<int, double>> transitions;  // j -> (k -> P)
};

inline std::map<Gender, TransitionModel> estimate_transitions(
    std::span<const AuthorCareer> careers, const IPIThresholdTable& thresholds,
    const std::string& country, int t_max) {
  std::map<Gender, TransitionModel> out;
  auto inflow = newly_active_counts(careers, thresholds, country, t_max);
  for (Gender g : {Gender::female, Gender::male}) {
    auto& m = out[g];
    m.country = country;
    m.gender = g;
    m.base_year = t_max;
    m.inflow = inflow[g];
  }

  std::map<Gender, std::map<int, double>> denom;
  std::map<Gender, std::map<int, std::map<int, double>>> numer;
  for (const auto& c : careers) {
    if (!c.affiliated_with(country)) continue;
    Gender g = c.gender_for(country);
    if (g == Gender::unassigned) continue;
    auto delta = thresholds.find(country, g);
    if (!delta) continue;
    if (!is_eligible(c, t_max - 1, *delta)) continue;
    int j = cumulative_productivity(c, t_max - 1, *delta);
    denom[g][j] += 1.0;
    if (is_eligible(c, t_max, *delta)) {
      int k = cumulative_productivity(c, t_max, *delta);
      numer[g][j][k] += 1.0;
    }
  }
  for (Gender g : {Gender::female, Gender::male})
    for (const auto& [j, n] : denom[g])
      for (const auto& [k, cnt] : numer[g][j])
        out[g].transitions[j][k] = cnt / n;
  return out;
}

// Forward projection: n_{k,t} = a_k + sum_j n_{j,t-1} P_{j->k},
// iterated from the t_max pyramid to the horizon. States without an
// estimated row persist in place (P_{j->j} = 1).
inline std::vector<Pyramid> project(
    const Pyramid& start, const std::map<Gender, TransitionModel>& models,
    int horizon) {
  if (horizon <= start.year)
    throw Error("projection horizon must exceed the start year");
  std::vector<Pyramid> out;
  Pyramid prev = start;
  for (int t = start.year + 1; t <= horizon; ++t) {
    Pyramid next;
    next.country = start.country;
    next.year = t;
    next.provenance = Pyramid::Provenance::projected;
    for (const auto& [g, model] : models) {
      auto& target = next.counts[g];
      for (const auto& [k, a] : model.inflow)
        if (a != 0.0) target[k] += a;
      auto pit = prev.counts.find(g);
      if (pit == prev.counts.end()) continue;
      for (const auto& [j, n] : pit->second) {
        if (n == 0.0) continue;
        auto row = model.transitions.find(j);
        if (row == model.transitions.end()) {
          target[j] += n;  // persistence fallback for unobserved states
          continue;
        }
        for (const auto& [k, p] : row->second)
          if (p != 0.0) target[k] += n * p;
      }
    }
    out.push_back(std::move(next));
    prev = out.back();
  }
  return out;
}

inline void save_pyramid_csv(std::span<const Pyramid> pyramids,
                             const std::string& path,
                             const std::string& header_comment = "") {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  if (!header_comment.empty()) out << "# " << header_comment << '\n';
  out << "country,gender,year,k,count,provenance\n";
  out.precision(17);
  for (const auto& p : pyramids)
    for (const auto& [g, by_k] : p.counts)
      for (const auto& [k, n] : by_k)
        out << p.country << ',' << to_string(g) << ',' << p.year << ',' << k
            << ',' << n << ','
            << (p.provenance == Pyramid::Provenance::observed ? "observed"
                                                              : "projected")
            << '\n';
}

inline void save_transition_csv(const std::map<Gender, TransitionModel>& models,
                                const std::string& trans_path,
                                const std::string& inflow_path) {
  std::ofstream t(trans_path, std::ios::binary);
  if (!t) throw Error("cannot write " + trans_path);
  t << "country,gender,j,k,p\n";
  t.precision(17);
  for (const auto& [g, m] : models)
    for (const auto& [j, row] : m.transitions)
      for (const auto& [k, p] : row)
        t << m.country << ',' << to_string(g) << ',' << j << ',' << k << ','
          << p << '\n';

  std::ofstream a(inflow_path, std::ios::binary);
  if (!a) throw Error("cannot write " + inflow_path);
  a << "country,gender,k,a\n";
  a.precision(17);
  for (const auto& [g, m] : models)
    for (const auto& [k, v] : m.inflow)
      a << m.country << ',' << to_string(g) << ',' << k << ',' << v << '\n';
}

}  // namespace pyr
