#pragma once

#include <span>
#include <string>

namespace sns {

enum class TrendLaw { linear, hyperbolic };

const char* to_string(TrendLaw law);
TrendLaw trend_law_from_string(const std::string& s);

struct TrendFit {
  TrendLaw law = TrendLaw::linear;
  double coefficient = 0.0;  // a in y = a*x or y = a/x
  double r_squared = 0.0;
};

/// Least-squares fit of y = a*x (through the origin) or y = a/x.
/// Needs at least 3 points with at least 2 distinct abscissae; the
/// hyperbolic law rejects x = 0.
TrendFit fit_trend(std::span<const double> x, std::span<const double> y, TrendLaw law);

}  // namespace sns
