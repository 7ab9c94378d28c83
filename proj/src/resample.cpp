#include "svnl/resample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "svnl/errors.hpp"

namespace svnl {
namespace {

void check_weights(std::span<const double> weights) {
  if (weights.empty()) throw InputError("resampling needs at least one weight");
  double sum = 0.0;
  for (const double w : weights) {
    if (std::isnan(w)) throw InputError("NaN resampling weight");
    if (w < 0.0) throw InputError("negative resampling weight");
    sum += w;
  }
  if (sum == 0.0) throw DegeneracyError("all resampling weights are zero: particle system has collapsed");
  if (std::abs(sum - 1.0) > 1e-9) throw InputError("resampling weights are not normalized");
}

}  // namespace

void resample(std::span<const double> weights, ResampleScheme scheme, Xoshiro256pp& rng,
              std::span<int> ancestors) {
  check_weights(weights);
  const int n = static_cast<int>(ancestors.size());
  if (n == 0) return;
  // Rounding in the running sum must never select a trailing zero-weight index.
  int m = static_cast<int>(weights.size());
  while (weights[m - 1] == 0.0) --m;

  if (scheme == ResampleScheme::kSystematic) {
    const double step = 1.0 / n;
    const double u0 = rng.uniform() * step;
    double cumulative = weights[0];
    int i = 0;
    for (int j = 0; j < n; ++j) {
      const double u = u0 + j * step;
      while (u >= cumulative && i < m - 1) cumulative += weights[++i];
      ancestors[j] = i;
    }
    return;
  }

  // Multinomial: sorted uniforms from normalized exponential spacings, one pass.
  std::vector<double> spacing(static_cast<std::size_t>(n) + 1);
  double total = 0.0;
  for (auto& e : spacing) {
    e = -std::log1p(-rng.uniform());
    total += e;
  }
  double u = 0.0;
  double cumulative = weights[0];
  int i = 0;
  for (int j = 0; j < n; ++j) {
    u += spacing[j] / total;
    while (u >= cumulative && i < m - 1) cumulative += weights[++i];
    ancestors[j] = i;
  }
}

std::vector<int> resample(std::span<const double> weights, int n, ResampleScheme scheme, Xoshiro256pp& rng) {
  std::vector<int> out(static_cast<std::size_t>(n));
  resample(weights, scheme, rng, out);
  return out;
}

WeightSummary normalize_log_weights(std::span<const double> log_w, std::span<double> weights) {
  const double neg_inf = -std::numeric_limits<double>::infinity();
  double max_lw = neg_inf;
  for (const double lw : log_w) {
    if (lw > max_lw) max_lw = lw;  // NaN compares false
  }
  if (max_lw == neg_inf) throw DegeneracyError("every particle has zero likelihood");
  if (max_lw == std::numeric_limits<double>::infinity()) {
    throw DegeneracyError("infinite particle likelihood");
  }

  double sum = 0.0;
  for (std::size_t i = 0; i < log_w.size(); ++i) {
    const double lw = log_w[i];
    const double w = (lw > neg_inf) ? std::exp(lw - max_lw) : 0.0;
    weights[i] = w;
    sum += w;
  }
  double sum_sq = 0.0;
  for (auto& w : weights) {
    w /= sum;
    sum_sq += w * w;
  }
  return {max_lw + std::log(sum) - std::log(static_cast<double>(log_w.size())), 1.0 / sum_sq};
}

double effective_sample_size(std::span<const double> weights) {
  double sum = 0.0;
  double sum_sq = 0.0;
  for (const double w : weights) {
    sum += w;
    sum_sq += w * w;
  }
  if (sum == 0.0) return 0.0;
  return sum * sum / sum_sq;
}

}  // namespace svnl
