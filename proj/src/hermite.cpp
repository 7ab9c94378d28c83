#include "svnl/hermite.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "svnl/errors.hpp"
#include "svnl/quantile.hpp"

namespace svnl {

HermiteOrder::HermiteOrder(int k) : k_(k) {
  if (k < 0 || k > kMaxHermiteOrder) {
    throw ConfigError("Hermite order " + std::to_string(k) + " outside [0, " + std::to_string(kMaxHermiteOrder) +
                      "]");
  }
}

LeverageSpec::LeverageSpec(std::span<const double> coeffs) {
  order_ = HermiteOrder(static_cast<int>(coeffs.size())).value();
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    if (!std::isfinite(coeffs[j])) throw ConfigError("non-finite leverage coefficient");
    coeffs_[j] = coeffs[j];
  }
}

LeverageSpec::LeverageSpec(std::initializer_list<double> coeffs)
    : LeverageSpec(std::span<const double>(coeffs.begin(), coeffs.size())) {}

LeverageSpec LeverageSpec::zeros(HermiteOrder order) {
  LeverageSpec spec;
  spec.order_ = order.value();
  return spec;
}

double hermite_eval(int k, double z) {
  if (k == 0) return 1.0;
  double prev = 1.0;
  double cur = z;
  for (int j = 1; j < k; ++j) {
    const double next = z * cur - j * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

void hermite_basis(int k, double z, std::span<double> out) {
  if (k == 0) return;
  double prev = 1.0;
  double cur = z;
  out[0] = cur;
  for (int j = 1; j < k; ++j) {
    const double next = z * cur - j * prev;
    prev = cur;
    cur = next;
    out[j] = cur;
  }
}

std::vector<double> hermite_basis(int k, double z) {
  std::vector<double> out(static_cast<std::size_t>(k));
  hermite_basis(k, z, out);
  return out;
}

double leverage_eval(const LeverageSpec& spec, double z) {
  const auto phi = spec.coeffs();
  if (phi.empty()) return 0.0;
  double prev = 1.0;
  double cur = z;
  double sum = phi[0] * cur;
  for (std::size_t j = 1; j < phi.size(); ++j) {
    const double next = z * cur - static_cast<double>(j) * prev;
    prev = cur;
    cur = next;
    sum += phi[j] * cur;
  }
  return sum;
}

std::vector<CurvePoint> leverage_curve(std::span<const LeverageSpec> samples, std::span<const double> grid) {
  if (samples.empty()) throw ConfigError("leverage_curve needs at least one posterior sample");
  const HermiteOrder order = samples.front().order();
  for (const auto& s : samples) {
    if (s.order() != order) throw ConfigError("leverage_curve samples have mixed orders");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i]) || (i > 0 && grid[i] < grid[i - 1])) {
      throw ConfigError("leverage_curve grid must be finite and sorted");
    }
  }

  std::vector<CurvePoint> curve;
  curve.reserve(grid.size());
  std::vector<double> values(samples.size());
  for (const double z : grid) {
    double sum = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      values[i] = leverage_eval(samples[i], z);
      sum += values[i];
    }
    const double mean = sum / static_cast<double>(samples.size());
    const double lo = quantile_inplace(values, 0.025);
    const double hi = quantile_inplace(values, 0.975);
    curve.push_back({z, mean, lo, hi});
  }
  return curve;
}

}  // namespace svnl
