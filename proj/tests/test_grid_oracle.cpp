#include <doctest.h>

#include <cmath>

#include "svnl/errors.hpp"
#include "svnl/grid_oracle.hpp"
#include "svnl/model.hpp"

using namespace svnl;

namespace {

SvParams theta_k1() {
  SvParams th;
  th.mu = -0.026;
  th.beta = 0.97;
  th.leverage = LeverageSpec{-0.045};
  th.omega = 0.143;
  return th;
}

// Stationary window of +-6 sd around the mean.
GridSpec stationary_grid(const SvParams& th, int points) {
  const double m = th.mu / (1.0 - th.beta);
  const double sd = th.omega / std::sqrt(1.0 - th.beta * th.beta);
  return {m - 6.0 * sd, m + 6.0 * sd, points};
}

}  // namespace

TEST_CASE("noiseless state concentrates on mu") {
  SvParams th;
  th.mu = -0.5;
  th.beta = 0.0;
  th.leverage = LeverageSpec::zeros(HermiteOrder(0));
  th.omega = 1e-300;
  const auto series = ReturnSeries::from_values({0.3, -1.2, 0.0, 2.0});
  // Grid step 0.01 places a node at exactly -0.5.
  const auto r = grid_filter_oracle(series, th, {-1.5, 0.5, 201}, StateInit::fixed(0.2));
  for (std::size_t t = 0; t < series.size(); ++t) {
    CHECK(r.means[t] == doctest::Approx(-0.5).epsilon(1e-12));
    double max_mass = 0.0;
    for (const double m : r.mass[t]) max_mass = std::max(max_mass, m);
    CHECK(max_mass == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.log_pred[t] == doctest::Approx(obs_logdensity(series.y[t], -0.5)).epsilon(1e-9));
  }
}

TEST_CASE("grid refinement changes filtered means by less than 1e-4") {
  const auto th = theta_k1();
  const auto sim = simulate(th, 50, StateInit::stationary(), 21);
  const auto coarse = grid_filter_oracle(sim.returns, th, stationary_grid(th, 400));
  const auto fine = grid_filter_oracle(sim.returns, th, stationary_grid(th, 800));
  for (std::size_t t = 0; t < 50; ++t) {
    CHECK(std::abs(coarse.means[t] - fine.means[t]) < 1e-4);
    CHECK(std::abs(coarse.log_pred[t] - fine.log_pred[t]) < 1e-4);
  }
}

TEST_CASE("filtered masses are probability vectors") {
  const auto th = theta_k1();
  const auto sim = simulate(th, 20, StateInit::stationary(), 22);
  const auto r = grid_filter_oracle(sim.returns, th, stationary_grid(th, 300));
  for (const auto& m : r.mass) {
    double s = 0.0;
    for (const double v : m) {
      CHECK(v >= 0.0);
      s += v;
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("a grid that is too narrow is rejected") {
  const auto th = theta_k1();
  const auto sim = simulate(th, 20, StateInit::stationary(), 23);
  const double m = th.mu / (1.0 - th.beta);
  CHECK_THROWS_AS(grid_filter_oracle(sim.returns, th, {m - 0.2, m + 0.2, 100}), DegeneracyError);
  CHECK_THROWS_AS(grid_filter_oracle(sim.returns, th, {1.0, 0.0, 100}), ConfigError);
}
