#pragma once

#include <fstream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "pyramids/common.hpp"
#include "pyramids/metrics.hpp"
#include "pyramids/trends.hpp"

namespace pyr {

inline nlohmann::ordered_json metrics_report_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["country"] = r.country;
  j["year"] = r.year;
  j["inflow"] = r.inflow;
  j["inflow_female_share"] = r.inflow_female_share;
  j["gender_gap"] = r.gender_gap;
  auto& cagr = j["cagr"] = nlohmann::ordered_json::array();
  for (const auto& c : r.cagr)
    cagr.push_back({{"t1", c.t1}, {"t2", c.t2}, {"value", c.value}});
  auto& shares = j["female_share"] = nlohmann::ordered_json::array();
  for (const auto& s : r.shares) {
    nlohmann::ordered_json e;
    e["year"] = s.year;
    e["all"] = s.all;
    e["all_parity"] = s.all_parity;
    if (std::isnan(s.senior)) {
      e["senior"] = nullptr;
    } else {
      e["senior"] = s.senior;
      e["senior_parity"] = s.senior_parity;
    }
    shares.push_back(std::move(e));
  }
  return j;
}

inline void save_metrics_json(const MetricsReport& r, const std::string& path) {
  write_file(path, metrics_report_json(r).dump(2) + "\n");
}

// Combined Table-1-style layout: one row per country, CAGR per period then
// female shares (all, senior) per share year.
inline void save_metrics_csv(std::span<const MetricsReport> reports,
                             const std::string& path,
                             const std::string& header_comment = "") {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  if (!header_comment.empty()) out << "# " << header_comment << '\n';
  out << "country";
  if (!reports.empty()) {
    for (const auto& c : reports.front().cagr)
      out << ",cagr_" << c.t1 << '_' << c.t2;
    for (const auto& s : reports.front().shares)
      out << ",share_all_" << s.year << ",share_senior_" << s.year;
  }
  out << ",inflow,inflow_female_share,gender_gap\n";
  out.precision(10);
  for (const auto& r : reports) {
    out << r.country;
    for (const auto& c : r.cagr) out << ',' << c.value;
    for (const auto& s : r.shares) {
      out << ',' << s.all << ',';
      if (!std::isnan(s.senior)) out << s.senior;
    }
    out << ',' << r.inflow << ',' << r.inflow_female_share << ','
        << r.gender_gap << '\n';
  }
}

// Growth and proportion regression tables (slope, R^2 per country).
inline void save_regression_csv(
    const std::vector<std::pair<std::string, RegressionResult>>& rows,
    const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << "country,slope,intercept,r_squared,std_error\n";
  out.precision(10);
  for (const auto& [country, r] : rows)
    out << country << ',' << r.slope << ',' << r.intercept << ','
        << r.r_squared << ',' << r.std_error << '\n';
}

// Segmented pre/post slope comparison table.
inline void save_slope_comparison_csv(
    const std::vector<std::pair<std::string, SlopeComparison>>& rows,
    const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << "country,slope_before,slope_after,se_before,se_after,t,df,p_value,"
         "nw_lag_before,nw_lag_after\n";
  out.precision(10);
  for (const auto& [country, c] : rows)
    out << country << ',' << c.slope_before << ',' << c.slope_after << ','
        << c.se_before << ',' << c.se_after << ',' << c.t_statistic << ','
        << c.degrees_of_freedom << ',' << c.p_value << ',' << c.nw_lag_before
        << ',' << c.nw_lag_after << '\n';
}

}  // namespace pyr
