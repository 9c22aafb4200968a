#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "pyramids/common.hpp"
#include "pyramids/pyramid.hpp"

namespace pyr {

struct ParityBand {
  double low = 0.45;
  double high = 0.55;

  bool contains(double share) const { return share >= low && share <= high; }
};

struct InflowResult {
  double inflow = 0.0;        // newly active / all active, both genders
  double female_share = 0.0;  // female inflow / total inflow
};

// Inflow fraction for one country-year.
inline InflowResult researcher_inflow(
    const Pyramid& pyramid,
    const std::map<Gender, std::map<int, double>>& newly_active) {
  double population = pyramid.total();
  if (population <= 0.0) throw Error("researcher_inflow: empty population");
  double total = 0.0, female = 0.0;
  for (const auto& [g, by_k] : newly_active)
    for (const auto& [k, a] : by_k) {
      total += a;
      if (g == Gender::female) female += a;
    }
  InflowResult r;
  r.inflow = total / population;
  r.female_share = total > 0.0 ? female / total : 0.0;
  return r;
}

inline double mean_productivity(const Pyramid& p, Gender g) {
  auto it = p.counts.find(g);
  if (it == p.counts.end()) throw Error("mean_productivity: missing gender");
  double num = 0.0, den = 0.0;
  for (const auto& [k, n] : it->second) {
    num += k * n;
    den += n;
  }
  if (den <= 0.0) throw Error("mean_productivity: empty population");
  return num / den;
}

// (female mean k - male mean k) / male mean k.
inline double gender_gap(const Pyramid& pyramid) {
  double f = mean_productivity(pyramid, Gender::female);
  double m = mean_productivity(pyramid, Gender::male);
  return (f - m) / m;
}

// (n2/n1)^(1/(t2-t1)) - 1.
inline double cagr(double n1, double n2, double t1, double t2) {
  if (!(n1 > 0.0)) throw Error("cagr: n1 must be positive");
  if (!(t2 > t1)) throw Error("cagr: t2 must exceed t1");
  return std::pow(n2 / n1, 1.0 / (t2 - t1)) - 1.0;
}

enum class StageFilter { all, senior };

inline const char* to_string(StageFilter f) {
  return f == StageFilter::all ? "all" : "senior";
}

inline double female_share(const Pyramid& pyramid, StageFilter filter) {
  double female = 0.0, total = 0.0;
  for (const auto& [g, by_k] : pyramid.counts)
    for (const auto& [k, n] : by_k) {
      if (filter == StageFilter::senior && k < 51) continue;
      total += n;
      if (g == Gender::female) female += n;
    }
  if (total <= 0.0) throw Error("female_share: empty filtered population");
  return female / total;
}

struct CagrEntry {
  int t1 = 0;
  int t2 = 0;
  double value = 0.0;
};

struct ShareEntry {
  int year = 0;
  double all = 0.0;
  double senior = 0.0;
  bool all_parity = false;
  bool senior_parity = false;
};

struct MetricsReport {
  std::string country;
  int year = 0;  // reference cross-section (t_max)
  double inflow = 0.0;
  double inflow_female_share = 0.0;
  double gender_gap = 0.0;
  std::vector<CagrEntry> cagr;
  std::vector<ShareEntry> shares;
};

// One country's metrics over the observed cross-section plus projected
// pyramids keyed by year.
inline MetricsReport build_metrics_report(
    const Pyramid& observed,
    const std::map<Gender, std::map<int, double>>& newly_active,
    const std::map<int, const Pyramid*>& by_year,
    const std::vector<std::pair<int, int>>& cagr_periods,
    const std::vector<int>& share_years, const ParityBand& parity) {
  MetricsReport r;
  r.country = observed.country;
  r.year = observed.year;
  auto inflow = researcher_inflow(observed, newly_active);
  r.inflow = inflow.inflow;
  r.inflow_female_share = inflow.female_share;
  r.gender_gap = gender_gap(observed);
  for (auto [t1, t2] : cagr_periods) {
    auto p1 = by_year.find(t1);
    auto p2 = by_year.find(t2);
    if (p1 == by_year.end() || p2 == by_year.end()) continue;
    r.cagr.push_back({t1, t2, cagr(p1->second->total(), p2->second->total(),
                                   t1, t2)});
  }
  for (int y : share_years) {
    auto p = by_year.find(y);
    if (p == by_year.end()) continue;
    ShareEntry s;
    s.year = y;
    s.all = female_share(*p->second, StageFilter::all);
    s.all_parity = parity.contains(s.all);
    try {
      s.senior = female_share(*p->second, StageFilter::senior);
      s.senior_parity = parity.contains(s.senior);
    } catch (const Error&) {
      s.senior = std::numeric_limits<double>::quiet_NaN();  // no senior cohort
    }
    r.shares.push_back(s);
  }
  return r;
}

}  // namespace pyr
