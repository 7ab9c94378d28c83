#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "svnl/hermite.hpp"

namespace svnl {

/// theta = (mu, beta, phi_1..phi_k, omega) of
///   y_t = exp(x_t / 2) eps_t
///   x_t = mu + beta x_{t-1} + l(eps_{t-1}) + omega u_t
struct SvParams {
  double mu = 0.0;
  double beta = 0.0;
  LeverageSpec leverage;
  double omega = 1.0;

  HermiteOrder order() const { return leverage.order(); }
  /// Throws ConfigError on non-finite values or omega <= 0.
  void validate() const;
};

/// Correlated-noise leverage model: corr(eps_t, eta_t) = rho, sd(eta_t) = tau.
struct LinearLeverageParams {
  double mu = 0.0;
  double beta = 0.0;
  double rho = 0.0;
  double tau = 1.0;
};

/// Ordered observations with labels (dates or integer indices).
struct ReturnSeries {
  std::vector<std::string> labels;
  std::vector<double> y;

  std::size_t size() const { return y.size(); }
  /// Series with labels "1".."n".
  static ReturnSeries from_values(std::vector<double> values);
};

struct SimOutput {
  ReturnSeries returns;
  std::vector<double> latent;  // x_1..x_T
  std::vector<double> shocks;  // eps_1..eps_T
};

/// Distribution of the initial log-volatility.
struct StateInit {
  enum class Kind { kStationary, kGaussian };
  Kind kind = Kind::kStationary;
  double mean = 0.0;
  double variance = 0.0;

  static StateInit stationary() { return {}; }
  static StateInit gaussian(double mean, double variance) { return {Kind::kGaussian, mean, variance}; }
  static StateInit fixed(double x) { return gaussian(x, 0.0); }

  /// (mean, variance) under theta; stationary uses the no-leverage AR(1) moments.
  std::pair<double, double> moments(const SvParams& theta) const;
};

SvParams reparam_to_uncorrelated(const LinearLeverageParams& p);
LinearLeverageParams reparam_from_uncorrelated(const SvParams& p);

/// log N(y; 0, exp(x)).
inline double obs_logdensity(double y, double x) {
  constexpr double kHalfLog2Pi = 0.91893853320467274178;
  const double quad = y == 0.0 ? 0.0 : 0.5 * y * y * std::exp(-x);
  return -kHalfLog2Pi - 0.5 * x - quad;
}

/// Conditional mean of x_t. Without eps_prev (first observation) the
/// leverage term is absent.
double state_mean(const SvParams& theta, double x_prev, std::optional<double> eps_prev);

/// eps_t = y_t exp(-x_t / 2); a zero return is a zero shock even when the
/// exponential overflows.
inline double shock_from_obs(double y, double x) { return y == 0.0 ? 0.0 : y * std::exp(-0.5 * x); }

/// Runs the state recursion on supplied draws. x1 is the first state; the
/// leverage recursion starts at t = 2 with u[t] driving x_{t+1}.
/// eps.size() == T, u.size() == T - 1.
SimOutput simulate_with_shocks(const SvParams& theta, double x1, std::span<const double> eps,
                               std::span<const double> u);

/// Draw order from the (seed, kSimulate) stream: x_1 (if random), eps_1..eps_T, u_2..u_T.
SimOutput simulate(const SvParams& theta, int T, StateInit x0, std::uint64_t seed);

}  // namespace svnl
