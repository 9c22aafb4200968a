#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "pyramids/common.hpp"
#include "pyramids/pyramid.hpp"

namespace pyr {

// Back-to-back horizontal-bar pyramid, female bars extending left and male
// bars right on a logarithmic horizontal axis. k is binned in steps of
// `k_bin` so tall sparse pyramids stay readable.
inline std::string render_pyramid_svg(const Pyramid& pyramid, int k_bin = 5) {
  if (k_bin < 1) k_bin = 1;
  std::map<int, std::pair<double, double>> bins;  // bin -> (female, male)
  double max_count = 1.0;
  for (const auto& [g, by_k] : pyramid.counts)
    for (const auto& [k, n] : by_k) {
      if (n <= 0.0) continue;
      auto& b = bins[(k - 1) / k_bin];
      (g == Gender::female ? b.first : b.second) += n;
    }
  for (const auto& [bin, fm] : bins)
    max_count = std::max({max_count, fm.first, fm.second});

  const double half_w = 360.0, row_h = 14.0, margin = 40.0;
  const int n_rows = bins.empty() ? 1 : bins.rbegin()->first + 1;
  const double height = margin * 2 + n_rows * row_h;
  const double width = margin * 2 + 2 * half_w;
  const double cx = margin + half_w;
  const double log_max = std::log10(max_count + 1.0);

  auto bar_len = [&](double n) {
    return n <= 0.0 ? 0.0 : std::log10(n + 1.0) / log_max * (half_w - 10.0);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  svg << "<text x=\"" << cx << "\" y=\"20\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"14\">" << pyramid.country
      << ' ' << pyramid.year
      << (pyramid.provenance == Pyramid::Provenance::projected
              ? " (projected)"
              : "")
      << "</text>\n";
  for (const auto& [bin, fm] : bins) {
    double y = height - margin - (bin + 1) * row_h;
    double lf = bar_len(fm.first), lm = bar_len(fm.second);
    if (lf > 0.0)
      svg << "<rect x=\"" << cx - lf << "\" y=\"" << y << "\" width=\"" << lf
          << "\" height=\"" << row_h - 2
          << "\" fill=\"#c2607e\"/>\n";
    if (lm > 0.0)
      svg << "<rect x=\"" << cx << "\" y=\"" << y << "\" width=\"" << lm
          << "\" height=\"" << row_h - 2
          << "\" fill=\"#4a7fb5\"/>\n";
    svg << "<text x=\"" << cx << "\" y=\"" << y + row_h - 4
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"8\" fill=\"#333\">" << bin * k_bin + 1 << "-"
        << (bin + 1) * k_bin << "</text>\n";
  }
  svg << "<line x1=\"" << cx << "\" y1=\"" << margin << "\" x2=\"" << cx
      << "\" y2=\"" << height - margin
      << "\" stroke=\"#000\" stroke-width=\"0.5\"/>\n";
  svg << "<text x=\"" << margin << "\" y=\"" << height - margin / 2
      << "\" font-family=\"sans-serif\" font-size=\"10\">female (log scale)"
      << "</text>\n";
  svg << "<text x=\"" << width - margin << "\" y=\"" << height - margin / 2
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
      << "font-size=\"10\">male (log scale)</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

inline void save_pyramid_svg(const Pyramid& pyramid, const std::string& path,
                             int k_bin = 5) {
  write_file(path, render_pyramid_svg(pyramid, k_bin));
}

}  // namespace pyr
