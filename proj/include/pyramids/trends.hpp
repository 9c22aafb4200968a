#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "pyramids/common.hpp"
#include "pyramids/ingest.hpp"
#include "pyramids/stats.hpp"

namespace pyr {

struct AnnualSeries {
  enum class Kind { count, proportion };

  std::string country;
  Kind kind = Kind::count;
  std::vector<int> years;      // strictly increasing
  std::vector<double> values;  // same length as years

  AnnualSeries window(int from, int to) const {
    AnnualSeries out;
    out.country = country;
    out.kind = kind;
    for (std::size_t i = 0; i < years.size(); ++i)
      if (years[i] >= from && years[i] <= to) {
        out.years.push_back(years[i]);
        out.values.push_back(values[i]);
      }
    return out;
  }
};

namespace detail {

// year -> (female, male) distinct-author counts for one country.
inline std::map<int, std::pair<double, double>> annual_author_counts(
    std::span<const AuthorCareer> careers, const std::string& country) {
  std::map<int, std::pair<double, double>> by_year;
  for (const auto& c : careers) {
    if (!c.affiliated_with(country)) continue;
    Gender g = c.gender_for(country);
    if (g == Gender::unassigned) continue;
    std::set<int> years;
    for (Date d : c.publication_dates) years.insert(d.year());
    for (int y : years) {
      auto& [f, m] = by_year[y];
      (g == Gender::female ? f : m) += 1.0;
    }
  }
  return by_year;
}

}  // namespace detail

// Distinct gender-assigned authors with >= 1 publication per year, zero-filled
// across the observed year range.
inline AnnualSeries annual_unique_authors(std::span<const AuthorCareer> careers,
                                          const std::string& country) {
  AnnualSeries s;
  s.country = country;
  s.kind = AnnualSeries::Kind::count;
  auto by_year = detail::annual_author_counts(careers, country);
  if (by_year.empty()) return s;
  for (int y = by_year.begin()->first; y <= by_year.rbegin()->first; ++y) {
    auto it = by_year.find(y);
    s.years.push_back(y);
    s.values.push_back(it == by_year.end() ? 0.0
                                           : it->second.first + it->second.second);
  }
  return s;
}

// Female proportion among unique gender-assigned authors per year; years
// with no authors are omitted.
inline AnnualSeries annual_female_share(std::span<const AuthorCareer> careers,
                                        const std::string& country) {
  AnnualSeries s;
  s.country = country;
  s.kind = AnnualSeries::Kind::proportion;
  for (const auto& [y, fm] : detail::annual_author_counts(careers, country)) {
    double total = fm.first + fm.second;
    if (total <= 0.0) continue;
    s.years.push_back(y);
    s.values.push_back(fm.first / total);
  }
  return s;
}

struct RegressionResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double std_error = 0.0;  // of the slope
  enum class SeKind { ols, newey_west } se_kind = SeKind::ols;
  int nw_lag = 0;
  std::vector<double> residuals;
  std::vector<double> centered_years;
  double sum_xx = 0.0;
  std::size_t n = 0;
};

namespace detail {

inline RegressionResult ols_fit(std::span<const int> years,
                                std::span<const double> y) {
  const std::size_t n = years.size();
  if (n < 3) throw Error("regression needs at least 3 points");
  double xm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    xm += years[i];
    ym += y[i];
  }
  xm /= n;
  ym /= n;
  // Years are centered for conditioning; the intercept is mapped back.
  double sxx = 0.0, sxy = 0.0;
  RegressionResult r;
  r.centered_years.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double xc = years[i] - xm;
    r.centered_years[i] = xc;
    sxx += xc * xc;
    sxy += xc * y[i];
  }
  if (sxx <= 0.0) throw Error("regression needs distinct years");
  r.slope = sxy / sxx;
  r.intercept = ym - r.slope * xm;
  r.sum_xx = sxx;
  r.n = n;
  double ssr = 0.0, sst = 0.0;
  r.residuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double e = y[i] - (ym + r.slope * r.centered_years[i]);
    r.residuals[i] = e;
    ssr += e * e;
    sst += (y[i] - ym) * (y[i] - ym);
  }
  r.r_squared = sst > 0.0 ? 1.0 - ssr / sst : 1.0;
  r.std_error = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
  return r;
}

}  // namespace detail

// OLS of ln(N) on year for a count series; every count must be positive.
inline RegressionResult fit_loglinear(const AnnualSeries& series) {
  if (series.kind != AnnualSeries::Kind::count)
    throw Error("fit_loglinear expects a count series");
  std::vector<double> logs;
  logs.reserve(series.values.size());
  for (std::size_t i = 0; i < series.values.size(); ++i) {
    if (!(series.values[i] > 0.0))
      throw Error("fit_loglinear: zero count at year " +
                  std::to_string(series.years[i]) +
                  "; restrict the fitting window");
    logs.push_back(std::log(series.values[i]));
  }
  return detail::ols_fit(series.years, logs);
}

// OLS of raw values on year for a proportion series.
inline RegressionResult fit_linear(const AnnualSeries& series) {
  return detail::ols_fit(series.years, series.values);
}

// Standard plug-in lag: floor(4 * (n/100)^(2/9)).
inline int default_newey_west_lag(std::size_t n) {
  return static_cast<int>(
      std::floor(4.0 * std::pow(static_cast<double>(n) / 100.0, 2.0 / 9.0)));
}

// HAC standard error of the slope with Bartlett weights. The centered
// regressor is orthogonal to the intercept, so the slope variance reduces
// to S / (sum x^2)^2 with S the weighted autocovariance sum of x_t * e_t.
inline double newey_west_se(const RegressionResult& fit, int lag) {
  const std::size_t n = fit.n;
  if (lag < 0) throw Error("newey_west_se: lag must be >= 0");
  if (static_cast<std::size_t>(lag) >= n)
    throw Error("newey_west_se: lag must be < n");
  if (n <= 2) throw Error("newey_west_se: needs n > 2");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = fit.centered_years[i] * fit.residuals[i];
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += g[i] * g[i];
  for (int ell = 1; ell <= lag; ++ell) {
    double w = 1.0 - static_cast<double>(ell) / (lag + 1.0);
    double acc = 0.0;
    for (std::size_t i = ell; i < n; ++i) acc += g[i] * g[i - ell];
    s += 2.0 * w * acc;
  }
  return std::sqrt(s) / fit.sum_xx;
}

struct SlopeComparison {
  double slope_before = 0.0;
  double slope_after = 0.0;
  double se_before = 0.0;
  double se_after = 0.0;
  double t_statistic = 0.0;
  int degrees_of_freedom = 0;
  double p_value = 1.0;
  int nw_lag_before = 0;
  int nw_lag_after = 0;
};

struct YearWindow {
  int from;
  int to;
};

// Pre/post-event slope comparison with Newey-West SEs. Count series are fit
// on the log scale, proportion series on the raw scale.
inline SlopeComparison segmented_slope_test(
    const AnnualSeries& series, YearWindow before = {2000, 2009},
    YearWindow after = {2014, 2023}, std::optional<int> lag = std::nullopt) {
  auto fit_window = [&](YearWindow w) {
    AnnualSeries sub = series.window(w.from, w.to);
    if (sub.years.size() < 3)
      throw Error("segmented_slope_test: window needs at least 3 points");
    return series.kind == AnnualSeries::Kind::count ? fit_loglinear(sub)
                                                    : fit_linear(sub);
  };
  RegressionResult b = fit_window(before);
  RegressionResult a = fit_window(after);

  SlopeComparison cmp;
  cmp.nw_lag_before = lag ? *lag : default_newey_west_lag(b.n);
  cmp.nw_lag_after = lag ? *lag : default_newey_west_lag(a.n);
  cmp.slope_before = b.slope;
  cmp.slope_after = a.slope;
  cmp.se_before = newey_west_se(b, cmp.nw_lag_before);
  cmp.se_after = newey_west_se(a, cmp.nw_lag_after);
  cmp.degrees_of_freedom = static_cast<int>(b.n + a.n) - 4;
  cmp.t_statistic = (cmp.slope_before - cmp.slope_after) /
                    std::sqrt(cmp.se_before * cmp.se_before +
                              cmp.se_after * cmp.se_after);
  cmp.p_value = student_t_two_sided_p(cmp.t_statistic, cmp.degrees_of_freedom);
  return cmp;
}

}  // namespace pyr
