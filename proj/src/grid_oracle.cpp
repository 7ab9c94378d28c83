#include "svnl/grid_oracle.hpp"

#include <cmath>
#include <limits>

#include "svnl/errors.hpp"

namespace svnl {
namespace {

constexpr double kBoundaryMass = 1e-6;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Probability that N(mean, sd^2) falls in each cell [edges[j], edges[j+1]).
// The outer cells absorb the tails.
void cell_masses(double mean, double sd, const std::vector<double>& edges, std::vector<double>& out) {
  const std::size_t g = edges.size() - 1;
  double prev = 0.0;
  for (std::size_t j = 0; j < g; ++j) {
    double cdf;
    if (j + 1 == g) {
      cdf = 1.0;
    } else if (sd > 0.0) {
      cdf = normal_cdf((edges[j + 1] - mean) / sd);
    } else {
      cdf = mean < edges[j + 1] ? 1.0 : 0.0;
    }
    out[j] = cdf - prev;
    prev = cdf;
  }
}

// Transition weights from one node. A kernel that spans several cells is
// evaluated pointwise (trapezoid rule, very accurate for Gaussians); a
// narrower one is integrated per cell so that sd -> 0 stays well defined.
void kernel_weights(double mean, double sd, const std::vector<double>& grid, const std::vector<double>& edges,
                    double h, std::vector<double>& out) {
  if (sd < 2.0 * h) {
    cell_masses(mean, sd, edges, out);
    return;
  }
  const double inv = 1.0 / sd;
  double total = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double z = (grid[j] - mean) * inv;
    out[j] = z * z > 1500.0 ? 0.0 : std::exp(-0.5 * z * z);
    total += out[j];
  }
  if (total > 0.0) {
    for (auto& v : out) v /= total;
  } else {
    cell_masses(mean, sd, edges, out);
  }
}

}  // namespace

GridFilterResult grid_filter_oracle(const ReturnSeries& series, const SvParams& theta, GridSpec spec,
                                    StateInit x0) {
  theta.validate();
  if (spec.points < 3 || !(spec.hi > spec.lo)) throw ConfigError("grid needs hi > lo and at least 3 points");
  const auto G = static_cast<std::size_t>(spec.points);
  const double h = (spec.hi - spec.lo) / static_cast<double>(G - 1);

  GridFilterResult out;
  out.grid.resize(G);
  for (std::size_t j = 0; j < G; ++j) out.grid[j] = spec.lo + h * static_cast<double>(j);
  std::vector<double> edges(G + 1);
  edges[0] = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j < G; ++j) edges[j] = out.grid[j - 1] + 0.5 * h;
  edges[G] = std::numeric_limits<double>::infinity();

  // x_0 law on the grid.
  const auto [m0, v0] = x0.moments(theta);
  std::vector<double> filtered(G);
  kernel_weights(m0, std::sqrt(v0), out.grid, edges, h, filtered);

  std::vector<double> predicted(G);
  std::vector<double> kernel(G);
  for (std::size_t t = 0; t < series.size(); ++t) {
    const double y = series.y[t];
    std::fill(predicted.begin(), predicted.end(), 0.0);
    for (std::size_t i = 0; i < G; ++i) {
      if (filtered[i] == 0.0) continue;
      const std::optional<double> eps =
          t > 0 ? std::optional<double>(shock_from_obs(series.y[t - 1], out.grid[i])) : std::nullopt;
      kernel_weights(state_mean(theta, out.grid[i], eps), theta.omega, out.grid, edges, h, kernel);
      for (std::size_t j = 0; j < G; ++j) predicted[j] += filtered[i] * kernel[j];
    }

    double evidence = 0.0;
    for (std::size_t j = 0; j < G; ++j) {
      filtered[j] = predicted[j] * std::exp(obs_logdensity(y, out.grid[j]));
      evidence += filtered[j];
    }
    if (!(evidence > 0.0)) throw DegeneracyError("grid filter lost all mass; widen the grid");
    double mean = 0.0;
    for (std::size_t j = 0; j < G; ++j) {
      filtered[j] /= evidence;
      mean += filtered[j] * out.grid[j];
    }
    if (filtered.front() > kBoundaryMass || filtered.back() > kBoundaryMass) {
      throw DegeneracyError("grid too narrow: filtered mass on a boundary cell at t = " + std::to_string(t + 1));
    }
    out.log_pred.push_back(std::log(evidence));
    out.means.push_back(mean);
    out.mass.push_back(filtered);
  }
  return out;
}

}  // namespace svnl
