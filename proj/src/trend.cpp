#include "sns/trend.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "sns/types.hpp"

namespace sns {

const char* to_string(TrendLaw law) { return law == TrendLaw::linear ? "linear" : "hyperbolic"; }

TrendLaw trend_law_from_string(const std::string& s) {
  if (s == "linear") return TrendLaw::linear;
  if (s == "hyperbolic") return TrendLaw::hyperbolic;
  throw DomainError("unknown trend law '" + s + "' (expected linear or hyperbolic)");
}

TrendFit fit_trend(std::span<const double> x, std::span<const double> y, TrendLaw law) {
  if (x.size() != y.size()) throw DomainError("fit_trend: x and y differ in length");
  if (x.size() < 3) throw DomainError("fit_trend: need at least 3 points");
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (*lo == *hi) throw DomainError("fit_trend: degenerate abscissae (all x equal)");

  // Both laws are y = a * g(x) with g(x) = x or 1/x.
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (law == TrendLaw::hyperbolic) {
      if (x[i] == 0.0) throw DomainError("fit_trend: hyperbolic law needs nonzero abscissae");
      g[i] = 1.0 / x[i];
    } else {
      g[i] = x[i];
    }
  }

  double sgy = 0.0, sgg = 0.0, ymean = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sgy += g[i] * y[i];
    sgg += g[i] * g[i];
    ymean += y[i];
  }
  if (sgg == 0.0) throw DomainError("fit_trend: degenerate abscissae");
  ymean /= static_cast<double>(y.size());

  TrendFit out;
  out.law = law;
  out.coefficient = sgy / sgg;
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - out.coefficient * g[i];
    ss_res += r * r;
    ss_tot += (y[i] - ymean) * (y[i] - ymean);
  }
  out.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
  return out;
}

}  // namespace sns
