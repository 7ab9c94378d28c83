#include "svnl/model.hpp"

#include <cmath>
#include <random>

#include "svnl/errors.hpp"
#include "svnl/rng.hpp"

namespace svnl {

void SvParams::validate() const {
  if (!std::isfinite(mu) || !std::isfinite(beta) || !std::isfinite(omega)) {
    throw ConfigError("non-finite SV parameter");
  }
  if (omega <= 0.0) throw ConfigError("omega must be positive");
}

ReturnSeries ReturnSeries::from_values(std::vector<double> values) {
  ReturnSeries s;
  s.labels.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) s.labels.push_back(std::to_string(i + 1));
  s.y = std::move(values);
  return s;
}

std::pair<double, double> StateInit::moments(const SvParams& theta) const {
  if (kind == Kind::kGaussian) return {mean, variance};
  if (std::abs(theta.beta) >= 1.0) throw ConfigError("stationary initialization requires |beta| < 1");
  return {theta.mu / (1.0 - theta.beta), theta.omega * theta.omega / (1.0 - theta.beta * theta.beta)};
}

SvParams reparam_to_uncorrelated(const LinearLeverageParams& p) {
  if (!(std::abs(p.rho) < 1.0)) throw ConfigError("|rho| must be < 1");
  if (!(p.tau > 0.0)) throw ConfigError("tau must be positive");
  SvParams out;
  out.mu = p.mu;
  out.beta = p.beta;
  out.leverage = LeverageSpec{p.rho * p.tau};
  out.omega = std::sqrt(1.0 - p.rho * p.rho) * p.tau;
  return out;
}

LinearLeverageParams reparam_from_uncorrelated(const SvParams& p) {
  if (p.order().value() != 1) throw ConfigError("reparam_from_uncorrelated needs an order-1 leverage");
  if (!(p.omega > 0.0)) throw ConfigError("omega must be positive");
  const double phi = p.leverage.phi(1);
  const double tau = std::hypot(phi, p.omega);
  return {p.mu, p.beta, phi / tau, tau};
}

double state_mean(const SvParams& theta, double x_prev, std::optional<double> eps_prev) {
  double m = theta.mu + theta.beta * x_prev;
  if (eps_prev) m += leverage_eval(theta.leverage, *eps_prev);
  return m;
}

SimOutput simulate_with_shocks(const SvParams& theta, double x1, std::span<const double> eps,
                               std::span<const double> u) {
  const std::size_t T = eps.size();
  if (T == 0) throw ConfigError("simulation length must be positive");
  if (u.size() + 1 != T) throw ConfigError("state noise must have length T - 1");

  SimOutput out;
  out.latent.resize(T);
  out.shocks.assign(eps.begin(), eps.end());
  std::vector<double> y(T);
  double x = x1;
  for (std::size_t t = 0; t < T; ++t) {
    if (t > 0) x = state_mean(theta, x, eps[t - 1]) + theta.omega * u[t - 1];
    out.latent[t] = x;
    y[t] = std::exp(0.5 * x) * eps[t];
  }
  out.returns = ReturnSeries::from_values(std::move(y));
  return out;
}

SimOutput simulate(const SvParams& theta, int T, StateInit x0, std::uint64_t seed) {
  if (T < 1) throw ConfigError("simulation length must be positive");
  theta.validate();
  const auto [m0, v0] = x0.moments(theta);
  if (v0 < 0.0) throw ConfigError("initial variance must be non-negative");

  auto rng = StreamKey{seed, StreamPurpose::kSimulate, 0, 0}.generator();
  std::normal_distribution<double> normal;
  const double x1 = v0 > 0.0 ? m0 + std::sqrt(v0) * normal(rng) : m0;
  std::vector<double> eps(static_cast<std::size_t>(T));
  std::vector<double> u(static_cast<std::size_t>(T - 1));
  for (auto& e : eps) e = normal(rng);
  for (auto& v : u) v = normal(rng);
  return simulate_with_shocks(theta, x1, eps, u);
}

}  // namespace svnl
