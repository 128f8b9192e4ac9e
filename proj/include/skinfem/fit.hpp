#pragma once

// Experimental order of convergence: pairwise EOC values, the least-squares
// slope of log e against log h, and the log-corrected slope that divides the
// errors by |log h|^w before fitting.

#include <cmath>
#include <vector>

#include "skinfem/core.hpp"

namespace skinfem {

struct RateFit {
  std::vector<double> pairwise_eoc;
  double slope = 0;
  double slope_log_corrected = 0;
  int points_used = 0;
};

inline RateFit fit_rate(const std::vector<std::pair<double, double>>& rows,
                        double log_correction_w = 1.0) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& [h, e] : rows)
    if (e > 0) pts.push_back({h, e});  // exact errors are excluded from fits
  RateFit out;
  out.points_used = static_cast<int>(pts.size());
  if (pts.size() < 2) throw DegenerateFit("need at least two nonzero errors");
  bool distinct = false;
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (pts[i].first != pts[0].first) distinct = true;
  if (!distinct) throw DegenerateFit("all h equal");

  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const auto& [h0, e0] = pts[i];
    const auto& [h1, e1] = pts[i + 1];
    if (h0 != h1)
      out.pairwise_eoc.push_back(std::log(e0 / e1) / std::log(h0 / h1));
  }

  const auto ls_slope = [&](bool corrected) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = static_cast<int>(pts.size());
    for (const auto& [h, e] : pts) {
      const double x = std::log(h);
      double y = std::log(e);
      if (corrected) y -= log_correction_w * std::log(std::abs(std::log(h)));
      sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  };
  out.slope = ls_slope(false);
  out.slope_log_corrected = ls_slope(true);
  return out;
}

}  // namespace skinfem
