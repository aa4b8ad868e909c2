#pragma once

// Least-squares regret exponent on (log2 T, log2 mean regret).

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mbol/core/instance.hpp"
#include "mbol/harness/experiment.hpp"

namespace mbol::harness {

struct SlopeFit {
  std::vector<std::pair<double, double>> points;  // (log2 x, log2 y)
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// OLS of log2 y on log2 x. y is clamped below at 1 before the log.
inline SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit: x and y differ in length");
  if (x.size() < 3) throw std::invalid_argument("fit: a slope needs at least 3 points");
  SlopeFit f;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0)) throw std::invalid_argument("fit: x must be positive");
    f.points.emplace_back(std::log2(x[i]), std::log2(std::max(1.0, y[i])));
  }
  const double m = static_cast<double>(f.points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [a, b] : f.points) {
    mx += a;
    my += b;
  }
  mx /= m;
  my /= m;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (const auto& [a, b] : f.points) {
    sxy += (a - mx) * (b - my);
    sxx += (a - mx) * (a - mx);
    syy += (b - my) * (b - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit: x values must not all be equal");
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

/// Groups rows by T and fits the mean cumulative regret; rows with errors
/// are skipped.
inline SlopeFit fit_slope(const std::vector<CellRow>& rows) {
  std::map<Day, std::pair<double, std::size_t>> by_t;
  for (const auto& r : rows) {
    if (!r.cumulative_regret) continue;
    auto& [sum, count] = by_t[r.T];
    sum += *r.cumulative_regret;
    ++count;
  }
  std::vector<double> x, y;
  for (const auto& [T, acc] : by_t) {
    x.push_back(static_cast<double>(T));
    y.push_back(acc.first / static_cast<double>(acc.second));
  }
  return fit_loglog(x, y);
}

}  // namespace mbol::harness
