#include "svnl/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace svnl {

double quantile_inplace(std::span<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile of empty sample");
  const double h = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const double frac = h - static_cast<double>(lo);
  std::nth_element(values.begin(), values.begin() + lo, values.end());
  const double a = values[lo];
  if (frac == 0.0 || lo + 1 >= values.size()) return a;
  const double b = *std::min_element(values.begin() + lo + 1, values.end());
  return a + frac * (b - a);
}

}  // namespace svnl
