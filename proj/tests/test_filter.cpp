#include <doctest.h>

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "svnl/errors.hpp"
#include "svnl/filter.hpp"
#include "svnl/grid_oracle.hpp"

using namespace svnl;

namespace {

SvParams make_theta(double mu, double beta, LeverageSpec lev, double omega) {
  SvParams th;
  th.mu = mu;
  th.beta = beta;
  th.leverage = lev;
  th.omega = omega;
  return th;
}

ParticleCloud run_steps(ParticleCloud cloud, const ReturnSeries& s, bool plav) {
  for (std::size_t t = 0; t < s.size(); ++t) {
    const std::optional<double> y_prev = t > 0 ? std::optional<double>(s.y[t - 1]) : std::nullopt;
    cloud = plav ? plav_step(std::move(cloud), s.y[t], y_prev) : naive_pl_step(std::move(cloud), s.y[t], y_prev);
  }
  return cloud;
}

double mean_x(const ParticleCloud& c) {
  double s = 0.0;
  for (const auto& p : c.particles) s += p.x;
  return s / c.size();
}

// E[beta | |beta| < bound] under omega^2 ~ IG(c0, d0), beta | omega^2 ~ N(b, v omega^2),
// by quadrature over omega^2 with the inner truncated-normal moments in closed form.
double truncated_prior_beta_mean(double b, double v, double c0, double d0, double bound) {
  const double h = 1e-5;
  double num = 0.0;
  double den = 0.0;
  for (double s = h / 2; s < 40.0; s += h) {
    const double log_ig = c0 * std::log(d0) - std::lgamma(c0) - (c0 + 1.0) * std::log(s) - d0 / s;
    const double w = std::exp(log_ig);
    const double sd = std::sqrt(v * s);
    const double a = (-bound - b) / sd;
    const double z = (bound - b) / sd;
    const double mass = 0.5 * (std::erfc(-z / std::sqrt(2.0)) - std::erfc(-a / std::sqrt(2.0)));
    const double pdf_a = std::exp(-0.5 * a * a) / std::sqrt(2.0 * M_PI);
    const double pdf_z = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
    num += w * (b * mass + sd * (pdf_a - pdf_z));
    den += w * mass;
  }
  return num / den;
}

// A separate no-leverage implementation of the auxiliary-variable particle
// learning filter with 2x2 closed-form algebra, drawing from the same streams.
struct Ref0Particle {
  double x;
  double mu, beta, omega;
  double a11, a21, a22;  // precision
  double m1, m2;         // posterior mean
  double c, d;
};

void ref0_draw_theta(Ref0Particle& p, const StreamKey& key) {
  const double l11 = std::sqrt(p.a11);
  const double l21 = p.a21 / l11;
  const double l22 = std::sqrt(p.a22 - l21 * l21);
  for (int attempt = 0; attempt < kBetaMaxAttempts; ++attempt) {
    auto rng = key.generator(static_cast<std::uint64_t>(attempt));
    std::gamma_distribution<double> gamma(p.c, 1.0);
    std::normal_distribution<double> normal;
    const double omega = std::sqrt(p.d / gamma(rng));
    const double z1 = normal(rng);
    const double z2 = normal(rng);
    const double v2 = z2 / l22;
    const double v1 = (z1 - l21 * v2) / l11;
    p.mu = p.m1 + omega * v1;
    p.beta = p.m2 + omega * v2;
    p.omega = omega;
    if (std::abs(p.beta) < kBetaBound) return;
  }
  p.beta = std::copysign(std::nextafter(kBetaBound, 0.0), p.beta);
}

void ref0_fold(Ref0Particle& p, double x_prev, double x) {
  const double det = p.a11 * p.a22 - p.a21 * p.a21;
  const double v1 = (p.a22 * 1.0 - p.a21 * x_prev) / det;  // A^{-1} w
  const double v2 = (-p.a21 * 1.0 + p.a11 * x_prev) / det;
  const double q = v1 + x_prev * v2;
  const double e = x - (p.m1 + x_prev * p.m2);
  const double step = e / (1.0 + q);
  p.m1 += v1 * step;
  p.m2 += v2 * step;
  p.d += 0.5 * e * step;
  p.c += 0.5;
  p.a11 += 1.0;
  p.a21 += x_prev;
  p.a22 += x_prev * x_prev;
}

struct Ref0Result {
  double cum = 0.0;
  std::vector<double> x_mean;
};

Ref0Result ref0_run(const ReturnSeries& s, double mu_var, double beta_var, double b_mu, double b_beta, double c0,
                    double d0, int n, std::uint64_t seed) {
  std::vector<Ref0Particle> P(n);
  for (int i = 0; i < n; ++i) {
    auto& p = P[i];
    p.a11 = 1.0 / mu_var;
    p.a21 = 0.0;
    p.a22 = 1.0 / beta_var;
    p.m1 = b_mu;
    p.m2 = b_beta;
    p.c = c0;
    p.d = d0;
    ref0_draw_theta(p, {seed, StreamPurpose::kInit, 0, static_cast<std::uint64_t>(i)});
    auto rng = StreamKey{seed, StreamPurpose::kInit, 1, static_cast<std::uint64_t>(i)}.generator();
    std::normal_distribution<double> normal;
    p.x = p.mu / (1.0 - p.beta) + std::sqrt(p.omega * p.omega / (1.0 - p.beta * p.beta)) * normal(rng);
  }
  Ref0Result out;
  std::vector<double> g(n), ll(n), w(n), xh(n), lw(n);
  std::vector<int> a1(n), a2(n);
  for (std::size_t t = 0; t < s.size(); ++t) {
    const auto ut = static_cast<std::uint64_t>(t + 1);
    const double y = s.y[t];
    for (int i = 0; i < n; ++i) {
      g[i] = P[i].mu + P[i].beta * P[i].x;
      ll[i] = -0.5 * std::log(2.0 * M_PI) - 0.5 * g[i] - 0.5 * y * y * std::exp(-g[i]);
    }
    const double first = normalize_log_weights(ll, w).log_mean;
    auto r1 = StreamKey{seed, StreamPurpose::kResample, ut, 0}.generator();
    resample(w, ResampleScheme::kSystematic, r1, a1);
    for (int j = 0; j < n; ++j) {
      auto rng = StreamKey{seed, StreamPurpose::kPropagate, ut, static_cast<std::uint64_t>(j)}.generator();
      std::normal_distribution<double> normal;
      xh[j] = g[a1[j]] + P[a1[j]].omega * normal(rng);
      lw[j] = -0.5 * std::log(2.0 * M_PI) - 0.5 * xh[j] - 0.5 * y * y * std::exp(-xh[j]) - ll[a1[j]];
    }
    const double second = normalize_log_weights(lw, w).log_mean;
    auto r2 = StreamKey{seed, StreamPurpose::kResample, ut, 1}.generator();
    resample(w, ResampleScheme::kSystematic, r2, a2);
    std::vector<Ref0Particle> next(n);
    double sx = 0.0;
    for (int k = 0; k < n; ++k) {
      next[k] = P[a1[a2[k]]];
      ref0_fold(next[k], next[k].x, xh[a2[k]]);
      next[k].x = xh[a2[k]];
      ref0_draw_theta(next[k], {seed, StreamPurpose::kTheta, ut, static_cast<std::uint64_t>(k)});
      sx += next[k].x;
    }
    P.swap(next);
    out.cum += first + second;
    out.x_mean.push_back(sx / n);
  }
  return out;
}

}  // namespace

TEST_CASE("init_cloud: beta prior mean under the stationarity truncation") {
  const HermiteOrder order(1);
  const PriorSpec prior = PriorSettings{}.for_order(order);
  const int n = 100000;
  const auto cloud = init_cloud(prior, order, n, 1);
  double s = 0.0;
  double s2 = 0.0;
  for (const auto& p : cloud.particles) {
    s += p.theta.beta;
    s2 += p.theta.beta * p.theta.beta;
  }
  const double mean = s / n;
  const double se = std::sqrt((s2 / n - mean * mean) / n);
  const double target = truncated_prior_beta_mean(0.95, 0.01, 5.0, 0.4, kBetaBound);
  INFO("mean " << mean << " target " << target << " se " << se);
  CHECK(std::abs(mean - target) <= 3.0 * se);
  // Without the truncation the prior mean is 0.95; the bound pulls it below.
  CHECK(target < 0.95);
  CHECK(cloud.diagnostics.beta_retries > 0);
}

TEST_CASE("init_cloud: a nearly degenerate prior pins every draw at b0") {
  PriorSettings settings;
  settings.mu_mean = -0.03;
  settings.beta_mean = 0.9;
  settings.phi_mean = -0.04;
  settings.mu_scale = settings.beta_scale = settings.phi_scale = 1e-12;
  const HermiteOrder order(2);
  const auto cloud = init_cloud(settings.for_order(order), order, 1000, 2);
  for (const auto& p : cloud.particles) {
    CHECK(std::abs(p.theta.mu + 0.03) <= 1e-5);
    CHECK(std::abs(p.theta.beta - 0.9) <= 1e-5);
    CHECK(std::abs(p.theta.leverage.phi(1) + 0.04) <= 1e-5);
    CHECK(std::abs(p.theta.leverage.phi(2) + 0.04) <= 1e-5);
  }
}

TEST_CASE("init_cloud: determinism and argument checks") {
  const HermiteOrder order(2);
  const PriorSpec prior = PriorSettings{}.for_order(order);
  const auto a = init_cloud(prior, order, 500, 9);
  const auto b = init_cloud(prior, order, 500, 9);
  for (int i = 0; i < 500; ++i) {
    CHECK(a.particles[i].x == b.particles[i].x);
    CHECK(a.particles[i].theta.mu == b.particles[i].theta.mu);
    CHECK(a.particles[i].theta.beta == b.particles[i].theta.beta);
    CHECK(a.particles[i].theta.leverage.phi(2) == b.particles[i].theta.leverage.phi(2));
    CHECK(a.particles[i].theta.omega == b.particles[i].theta.omega);
  }
  CHECK(a.cum_log_marglik == 0.0);
  CHECK_THROWS_AS(init_cloud(prior, order, 1, 9), ConfigError);
  CHECK_THROWS_AS(init_cloud(prior, HermiteOrder(1), 10, 9), ConfigError);
}

TEST_CASE("plav_step: vanishing state noise makes second-stage weights equal") {
  const auto th = make_theta(-0.1, 0.9, LeverageSpec{-0.05}, 1e-300);
  auto cloud = init_cloud_fixed(th, StateInit::gaussian(-1.0, 0.25), 200, 4);
  const auto before = cloud;
  cloud = plav_step(std::move(cloud), 0.8, 0.3);
  CHECK(cloud.ess == doctest::Approx(200.0).epsilon(1e-12));

  // The predictive reduces to the first-stage average of p(y | g).
  double m = -1e300;
  std::vector<double> lg;
  for (const auto& p : before.particles) {
    lg.push_back(obs_logdensity(0.8, state_mean(th, p.x, shock_from_obs(0.3, p.x))));
    m = std::max(m, lg.back());
  }
  double s = 0.0;
  for (const double v : lg) s += std::exp(v - m);
  CHECK(cloud.last_log_pred == doctest::Approx(m + std::log(s / 200.0)).epsilon(1e-12));
}

TEST_CASE("plav_step: a single particle follows the recursion") {
  const auto th = make_theta(-0.026, 0.97, LeverageSpec{-0.045}, 0.143);
  const std::uint64_t seed = 17;
  auto cloud = init_cloud_fixed(th, StateInit::fixed(-0.9), 1, seed);
  const auto sim = simulate(th, 30, StateInit::stationary(), 5);
  double x = -0.9;
  for (std::size_t t = 0; t < sim.returns.size(); ++t) {
    const std::optional<double> y_prev = t > 0 ? std::optional<double>(sim.returns.y[t - 1]) : std::nullopt;
    const std::optional<double> eps = y_prev ? std::optional<double>(shock_from_obs(*y_prev, x)) : std::nullopt;
    auto rng = StreamKey{seed, StreamPurpose::kPropagate, t + 1, 0}.generator();
    std::normal_distribution<double> normal;
    x = state_mean(th, x, eps) + th.omega * normal(rng);
    cloud = plav_step(std::move(cloud), sim.returns.y[t], y_prev);
    CHECK(cloud.particles[0].x == doctest::Approx(x).epsilon(1e-14));
    CHECK(cloud.last_log_pred == doctest::Approx(obs_logdensity(sim.returns.y[t], x)).epsilon(1e-12));
  }
}

TEST_CASE("fixed-parameter PLAV tracks the grid filter") {
  const auto th = make_theta(-0.026, 0.970, LeverageSpec::zeros(HermiteOrder(0)), 0.150);
  const auto sim = simulate(th, 50, StateInit::stationary(), 31);
  const double m = th.mu / (1.0 - th.beta);
  const double sd = th.omega / std::sqrt(1.0 - th.beta * th.beta);
  const auto grid = grid_filter_oracle(sim.returns, th, {m - 8.0 * sd, m + 8.0 * sd, 800});
  auto cloud = init_cloud_fixed(th, StateInit::stationary(), 50000, 32);
  for (std::size_t t = 0; t < 50; ++t) {
    const std::optional<double> y_prev = t > 0 ? std::optional<double>(sim.returns.y[t - 1]) : std::nullopt;
    cloud = plav_step(std::move(cloud), sim.returns.y[t], y_prev);
    CHECK(std::abs(mean_x(cloud) - grid.means[t]) <= 0.05);
  }
}

TEST_CASE("naive and auxiliary filters estimate the same predictive likelihood") {
  const auto th = make_theta(-0.2, 0.5, LeverageSpec{-0.1}, 1.0);
  const auto series = ReturnSeries::from_values(std::vector<double>(15, 0.0));
  const double m = th.mu / (1.0 - th.beta);
  const double sd = th.omega / std::sqrt(1.0 - th.beta * th.beta);
  const auto grid = grid_filter_oracle(series, th, {m - 10.0 * sd, m + 10.0 * sd, 800});
  const double exact = std::accumulate(grid.log_pred.begin(), grid.log_pred.end(), 0.0);

  const int reps = 30;
  std::vector<double> plav, naive;
  for (int r = 0; r < reps; ++r) {
    plav.push_back(run_steps(init_cloud_fixed(th, StateInit::stationary(), 2000, 100 + r), series, true)
                       .cum_log_marglik);
    naive.push_back(run_steps(init_cloud_fixed(th, StateInit::stationary(), 2000, 100 + r), series, false)
                        .cum_log_marglik);
  }
  const auto stats = [](const std::vector<double>& v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    double ss = 0.0;
    for (const double x : v) ss += (x - mean) * (x - mean);
    return std::pair{mean, std::sqrt(ss / (v.size() - 1) / v.size())};
  };
  const auto [pm, pse] = stats(plav);
  const auto [nm, nse] = stats(naive);
  INFO("plav " << pm << " +- " << pse << ", naive " << nm << " +- " << nse << ", grid " << exact);
  CHECK(std::abs(pm - nm) <= 4.0 * std::hypot(pse, nse) + 1e-3);
  CHECK(std::abs(pm - exact) <= 4.0 * pse + 1e-3);
  CHECK(std::abs(nm - exact) <= 4.0 * nse + 1e-3);
}

TEST_CASE("identical particles under a constant likelihood keep full ESS") {
  const auto th = make_theta(0.0, 0.0, LeverageSpec::zeros(HermiteOrder(0)), 1e-300);
  auto cloud = init_cloud_fixed(th, StateInit::fixed(0.0), 300, 1);
  cloud = naive_pl_step(std::move(cloud), 1.3, std::nullopt);
  CHECK(cloud.ess == doctest::Approx(300.0).epsilon(1e-12));
  cloud = plav_step(std::move(cloud), -0.4, 1.3);
  CHECK(cloud.ess == doctest::Approx(300.0).epsilon(1e-12));
}

TEST_CASE("run_filter: constant zero series") {
  const auto series = ReturnSeries::from_values(std::vector<double>(200, 0.0));
  for (const auto algo : {Algorithm::kPlav, Algorithm::kPl, Algorithm::kNaive}) {
    const auto r = run_filter(series, HermiteOrder(3), PriorSettings{}.for_order(HermiteOrder(3)), 500, 3, algo, 40);
    CHECK(std::isfinite(r.cum_log_marglik));
    CHECK(r.log_pred.size() == 200);
    CHECK(r.scored_log_pred().size() == 160);
    CHECK(r.posterior.size() == 500);
  }
}

TEST_CASE("run_filter: empty scoring window and bookkeeping") {
  const auto th = make_theta(-0.026, 0.97, LeverageSpec{-0.045}, 0.143);
  const auto sim = simulate(th, 60, StateInit::stationary(), 2);
  const auto prior = PriorSettings{}.for_order(HermiteOrder(1));
  const auto full = run_filter(sim.returns, HermiteOrder(1), prior, 300, 5, Algorithm::kPlav, 60);
  CHECK(full.cum_log_marglik == 0.0);
  CHECK(full.scored_log_pred().empty());

  RunOptions opts;
  opts.checkpoints = {10, 30};
  const auto part = run_filter(sim.returns, HermiteOrder(1), prior, 300, 5, Algorithm::kPlav, 20, opts);
  double tail = 0.0;
  for (int t = 20; t < 60; ++t) tail += part.log_pred[t];
  CHECK(part.cum_log_marglik == tail);
  REQUIRE(part.checkpoints.size() == 3);
  CHECK(part.checkpoints[0].t == 10);
  CHECK(part.checkpoints[2].t == 60);
  CHECK(part.checkpoints[2].params.size() == 4);
  CHECK(part.checkpoints[2].params[2].name == "phi1");
  for (const auto& p : part.checkpoints[2].params) {
    CHECK(p.lo <= p.mean);
    CHECK(p.mean <= p.hi);
  }
}

TEST_CASE("run_filter: argument errors") {
  const auto prior = PriorSettings{}.for_order(HermiteOrder(0));
  const auto ok = ReturnSeries::from_values({0.1, -0.2, 0.3});
  CHECK_THROWS_AS(run_filter(ReturnSeries::from_values({0.1}), HermiteOrder(0), prior, 10, 1, Algorithm::kPlav, 0),
                  InputError);
  CHECK_THROWS_AS(run_filter(ReturnSeries::from_values({0.1, std::nan(""), 0.2}), HermiteOrder(0), prior, 10, 1,
                             Algorithm::kPlav, 0),
                  InputError);
  CHECK_THROWS_AS(run_filter(ok, HermiteOrder(0), prior, 10, 1, Algorithm::kPlav, 4), ConfigError);
  CHECK_THROWS_AS(run_filter(ok, HermiteOrder(0), prior, 10, 1, Algorithm::kPlav, -1), ConfigError);
  CHECK_THROWS_AS(run_filter(ok, HermiteOrder(0), prior, 1, 1, Algorithm::kPlav, 0), ConfigError);
  CHECK_THROWS_AS(plav_step(init_cloud(prior, HermiteOrder(0), 10, 1), INFINITY, std::nullopt), InputError);
  CHECK_THROWS_AS(parse_algorithm("mcmc"), ConfigError);
}

namespace {

// Runs one fuzz series; returns +1 for a finite result, 0 for a reported
// degeneracy, -1 for any non-finite output.
int fuzz_outcome(const std::vector<double>& y, HermiteOrder order, int rep) {
  try {
    const auto r = run_filter(ReturnSeries::from_values(y), order, PriorSettings{}.for_order(order), 64, rep,
                              rep % 2 ? Algorithm::kPlav : Algorithm::kPl, 0);
    bool finite = std::isfinite(r.cum_log_marglik);
    for (const double v : r.log_pred) finite = finite && std::isfinite(v);
    for (const double v : r.filtered_x_mean) finite = finite && std::isfinite(v);
    return finite ? 1 : -1;
  } catch (const DegeneracyError&) {
    return 0;
  }
}

}  // namespace

TEST_CASE("log-space weights stay finite on random series") {
  // Random SV paths across a wide parameter range, fitted at random orders.
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> order_dist(0, 4);
  int finite = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    SvParams th;
    th.beta = 0.8 + 0.19 * unit(rng);
    th.mu = (-3.0 + 5.0 * unit(rng)) * (1.0 - th.beta);
    th.omega = 0.05 + 0.4 * unit(rng);
    th.leverage = LeverageSpec{-0.1 * unit(rng), -0.05 * unit(rng)};
    const auto sim = simulate(th, 40, StateInit::stationary(), rep);
    finite += fuzz_outcome(sim.returns.y, HermiteOrder(order_dist(rng)), rep) == 1 ? 1 : 0;
  }
  CHECK(finite == 1000);
}

TEST_CASE("zeros, outliers and regime jumps never produce non-finite output") {
  // Such series can push every particle's likelihood below the double range
  // (a zero return has unbounded density as x -> -inf; a huge shock makes the
  // Hermite terms explode). That is reported as DegeneracyError.
  std::mt19937_64 rng(2717);
  std::uniform_real_distribution<double> log_scale(-2.5, 1.5);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> order_dist(0, 4);
  int non_finite = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    std::vector<double> y(40);
    double scale = std::pow(10.0, log_scale(rng));
    for (auto& v : y) {
      if (rng() % 8 == 0) scale = std::pow(10.0, log_scale(rng));
      v = normal(rng) * scale;
      if (rng() % 15 == 0) v = 0.0;
      if (rng() % 25 == 0) v *= 20.0;
    }
    non_finite += fuzz_outcome(y, HermiteOrder(order_dist(rng)), rep) < 0 ? 1 : 0;
  }
  CHECK(non_finite == 0);
}

TEST_CASE("extreme series either stay finite or report degeneracy") {
  // Magnitudes spanning eleven decades can underflow every particle's
  // likelihood in double precision; that must surface as DegeneracyError.
  std::mt19937_64 rng(2719);
  std::uniform_real_distribution<double> log_scale(-8.0, 3.0);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> order_dist(0, 3);
  int non_finite = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    std::vector<double> y(25);
    for (auto& v : y) {
      v = normal(rng) * std::pow(10.0, log_scale(rng));
      if (rng() % 10 == 0) v = 0.0;
    }
    non_finite += fuzz_outcome(y, HermiteOrder(order_dist(rng)), rep) < 0 ? 1 : 0;
  }
  CHECK(non_finite == 0);
}

TEST_CASE("permuting particles changes summaries only at noise level") {
  const auto th = make_theta(-0.026, 0.97, LeverageSpec{-0.045}, 0.143);
  const auto sim = simulate(th, 30, StateInit::stationary(), 8);
  const HermiteOrder order(1);
  auto cloud = run_steps(init_cloud(PriorSettings{}.for_order(order), order, 20000, 3), sim.returns, true);
  auto shuffled = cloud;
  std::mt19937_64 rng(1);
  std::shuffle(shuffled.particles.begin(), shuffled.particles.end(), rng);

  const double y = 0.7;
  const double y_prev = sim.returns.y.back();
  const auto a = plav_step(cloud, y, y_prev);
  const auto b = plav_step(shuffled, y, y_prev);
  const auto sa = summarize(a);
  const auto sb = summarize(b);
  for (std::size_t p = 0; p < sa.size(); ++p) {
    // Posterior sd from the 95% band; mean of 20000 draws has sd / sqrt(20000).
    const double sd = (sa[p].hi - sa[p].lo) / 3.92;
    const double se = sd / std::sqrt(20000.0);
    INFO(sa[p].name << ": " << sa[p].mean << " vs " << sb[p].mean << " se " << se);
    CHECK(std::abs(sa[p].mean - sb[p].mean) < 3.0 * std::sqrt(2.0) * se);
  }
}

TEST_CASE("results do not depend on the thread count") {
  const auto th = make_theta(-0.026, 0.97, LeverageSpec{-0.045, -0.05}, 0.143);
  const auto sim = simulate(th, 80, StateInit::stationary(), 6);
  const HermiteOrder order(2);
  const auto prior = PriorSettings{}.for_order(order);
  std::vector<FilterResult> runs;
  for (const int threads : {1, 2, std::max(1, omp_get_num_procs()), 7}) {
    RunOptions opts;
    opts.filter.threads = threads;
    runs.push_back(run_filter(sim.returns, order, prior, 3000, 12, Algorithm::kPlav, 10, opts));
  }
  for (std::size_t r = 1; r < runs.size(); ++r) {
    CHECK(runs[r].log_pred == runs[0].log_pred);
    CHECK(runs[r].ess == runs[0].ess);
    CHECK(runs[r].filtered_x_mean == runs[0].filtered_x_mean);
    CHECK(runs[r].diagnostics.beta_retries == runs[0].diagnostics.beta_retries);
    bool same = true;
    for (std::size_t i = 0; i < runs[0].posterior.size(); ++i) {
      const auto& p = runs[0].posterior[i];
      const auto& q = runs[r].posterior[i];
      same = same && p.mu == q.mu && p.beta == q.beta && p.omega == q.omega &&
             p.leverage.phi(1) == q.leverage.phi(1) && p.leverage.phi(2) == q.leverage.phi(2);
    }
    CHECK(same);
  }
}

TEST_CASE("order-0 run matches a dedicated no-leverage implementation") {
  const auto th = make_theta(-0.026, 0.970, LeverageSpec::zeros(HermiteOrder(0)), 0.150);
  const auto sim = simulate(th, 150, StateInit::stationary(), 44);
  const PriorSpec prior = PriorSettings{}.for_order(HermiteOrder(0));
  const int n = 2000;
  const auto lib = run_filter(sim.returns, HermiteOrder(0), prior, n, 7, Algorithm::kPlav, 0);
  const auto ref = ref0_run(sim.returns, 1.0, 0.01, 0.0, 0.95, 5.0, 0.4, n, 7);
  INFO("library " << lib.cum_log_marglik << " reference " << ref.cum);
  CHECK(std::abs(lib.cum_log_marglik - ref.cum) <= 1e-9 * std::abs(ref.cum));
  double worst = 0.0;
  for (std::size_t t = 0; t < ref.x_mean.size(); ++t) {
    worst = std::max(worst, std::abs(lib.filtered_x_mean[t] - ref.x_mean[t]));
  }
  CHECK(worst <= 1e-9);
}
