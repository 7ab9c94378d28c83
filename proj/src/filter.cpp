#include "svnl/filter.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <set>

#include "svnl/errors.hpp"
#include "svnl/quantile.hpp"

namespace svnl {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_observation(double y, std::optional<double> y_prev) {
  if (!std::isfinite(y) || (y_prev && !std::isfinite(*y_prev))) {
    throw InputError("non-finite observation passed to the filter");
  }
}

std::optional<double> previous_shock(std::optional<double> y_prev, double x) {
  if (!y_prev) return std::nullopt;
  return shock_from_obs(*y_prev, x);
}

double log_likelihood_or_floor(double y, double x) {
  if (!std::isfinite(x)) return kNegInf;
  const double lw = obs_logdensity(y, x);
  return std::isnan(lw) ? kNegInf : lw;
}

void track_ess(ParticleCloud& cloud) {
  auto& diag = cloud.diagnostics;
  if (cloud.ess < cloud.size() / 100.0) {
    ++diag.low_ess_run;
    if (diag.low_ess_run == kLowEssRunLength) {
      diag.warnings.push_back({cloud.t - kLowEssRunLength + 1, cloud.t});
    }
  } else {
    diag.low_ess_run = 0;
  }
}

// Steps 4-5 for one destination slot: fold (x_prev, eps_prev) -> x_new into
// the parent's statistics and draw a fresh theta.
void refresh_particle(const Particle& parent, double x_new, std::optional<double> y_prev, HermiteOrder order,
                      const StreamKey& key, Particle& out, long& retries, long& clamps) {
  std::array<double, kMaxRegressors> w{};
  const int dim = fill_regressor(order, parent.x, previous_shock(y_prev, parent.x), w);
  out.stats = parent.stats;
  out.stats.fold(std::span<const double>(w.data(), static_cast<std::size_t>(dim)), x_new);
  const ThetaDraw draw = sample_theta(out.stats, order, key);
  out.theta = draw.theta;
  retries += draw.retries;
  clamps += draw.clamped ? 1 : 0;
}

}  // namespace

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kPlav:
      return "plav";
    case Algorithm::kPl:
      return "pl";
    case Algorithm::kNaive:
      return "naive";
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& s) {
  if (s == "plav") return Algorithm::kPlav;
  if (s == "pl") return Algorithm::kPl;
  if (s == "naive") return Algorithm::kNaive;
  throw ConfigError("unknown algorithm '" + s + "' (expected plav, pl or naive)");
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SVNL_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return std::max(1, omp_get_num_procs());
}

ParticleCloud init_cloud(const PriorSpec& prior, HermiteOrder order, int n, std::uint64_t seed,
                         FilterOptions options) {
  if (n < 2) throw ConfigError("particle count must be at least 2");
  prior.validate();
  if (prior.dim() != order.regressors()) throw ConfigError("prior dimension does not match the leverage order");

  const SufficientStats s0 = SufficientStats::from_prior(prior);
  ParticleCloud cloud;
  cloud.particles.resize(static_cast<std::size_t>(n));
  cloud.order = order;
  cloud.seed = seed;
  cloud.options = options;

  long retries = 0;
  long clamps = 0;
  auto& P = cloud.particles;
  const int nt = resolve_threads(options.threads);
#pragma omp parallel for num_threads(nt) schedule(static) reduction(+ : retries, clamps)
  for (int i = 0; i < n; ++i) {
    const ThetaDraw draw = sample_theta(s0, order, {seed, StreamPurpose::kInit, 0, static_cast<std::uint64_t>(i)});
    retries += draw.retries;
    clamps += draw.clamped ? 1 : 0;
    const auto [m0, v0] = prior.x0.moments(draw.theta);
    auto rng = StreamKey{seed, StreamPurpose::kInit, 1, static_cast<std::uint64_t>(i)}.generator();
    std::normal_distribution<double> normal;
    P[i].x = m0 + std::sqrt(v0) * normal(rng);
    P[i].theta = draw.theta;
    P[i].stats = s0;
  }
  cloud.diagnostics.beta_retries = retries;
  cloud.diagnostics.beta_clamps = clamps;
  return cloud;
}

ParticleCloud init_cloud_fixed(const SvParams& theta, StateInit x0, int n, std::uint64_t seed,
                               FilterOptions options) {
  if (n < 1) throw ConfigError("particle count must be positive");
  theta.validate();
  options.learn_params = false;
  options.refresh_params = false;

  ParticleCloud cloud;
  cloud.order = theta.order();
  cloud.seed = seed;
  cloud.options = options;
  cloud.particles.resize(static_cast<std::size_t>(n));
  const auto [m0, v0] = x0.moments(theta);
  for (int i = 0; i < n; ++i) {
    auto rng = StreamKey{seed, StreamPurpose::kInit, 1, static_cast<std::uint64_t>(i)}.generator();
    std::normal_distribution<double> normal;
    cloud.particles[i].x = m0 + std::sqrt(v0) * normal(rng);
    cloud.particles[i].theta = theta;
  }
  return cloud;
}

ParticleCloud plav_step(ParticleCloud cloud, double y, std::optional<double> y_prev) {
  check_observation(y, y_prev);
  const int n = cloud.size();
  const int t = cloud.t + 1;
  const auto ut = static_cast<std::uint64_t>(t);
  const HermiteOrder order = cloud.order;
  const bool learn = cloud.options.learn_params;
  const int nt = resolve_threads(cloud.options.threads);
  const auto& P = cloud.particles;

  // Step 1: first-stage weights at the lookahead g = E[x_t | x_{t-1}, theta].
  std::vector<double> g(n);
  std::vector<double> log_lambda(n);
#pragma omp parallel for num_threads(nt) schedule(static)
  for (int i = 0; i < n; ++i) {
    g[i] = state_mean(P[i].theta, P[i].x, previous_shock(y_prev, P[i].x));
    log_lambda[i] = log_likelihood_or_floor(y, g[i]);
  }
  std::vector<double> weights(n);
  const WeightSummary first = normalize_log_weights(log_lambda, weights);
  std::vector<int> a1(n);
  {
    auto rng = StreamKey{cloud.seed, StreamPurpose::kResample, ut, 0}.generator();
    resample(weights, cloud.options.scheme, rng, a1);
  }

  // Step 2: propagate; Step 3 weights correct for the lookahead.
  std::vector<double> x_hat(n);
  std::vector<double> log_w(n);
#pragma omp parallel for num_threads(nt) schedule(static)
  for (int j = 0; j < n; ++j) {
    const int p = a1[j];
    auto rng = StreamKey{cloud.seed, StreamPurpose::kPropagate, ut, static_cast<std::uint64_t>(j)}.generator();
    std::normal_distribution<double> normal;
    x_hat[j] = g[p] + P[p].theta.omega * normal(rng);
    log_w[j] = log_likelihood_or_floor(y, x_hat[j]) - log_lambda[p];
    if (std::isnan(log_w[j])) log_w[j] = kNegInf;
  }
  const WeightSummary second = normalize_log_weights(log_w, weights);
  std::vector<int> a2(n);
  {
    auto rng = StreamKey{cloud.seed, StreamPurpose::kResample, ut, 1}.generator();
    resample(weights, cloud.options.scheme, rng, a2);
  }

  // Steps 4-5 on the composed ancestry.
  std::vector<Particle> next(static_cast<std::size_t>(n));
  long retries = 0;
  long clamps = 0;
#pragma omp parallel for num_threads(nt) schedule(static) reduction(+ : retries, clamps)
  for (int k = 0; k < n; ++k) {
    const int s = a2[k];
    const Particle& parent = P[a1[s]];
    Particle& out = next[k];
    out.x = x_hat[s];
    if (learn) {
      refresh_particle(parent, x_hat[s], y_prev, order,
                       {cloud.seed, StreamPurpose::kTheta, ut, static_cast<std::uint64_t>(k)}, out, retries, clamps);
    } else {
      out.theta = parent.theta;
      out.stats = parent.stats;
    }
  }

  cloud.particles.swap(next);
  cloud.t = t;
  cloud.last_log_pred = first.log_mean + second.log_mean;
  cloud.cum_log_marglik += cloud.last_log_pred;
  cloud.ess = second.ess;
  cloud.diagnostics.beta_retries += retries;
  cloud.diagnostics.beta_clamps += clamps;
  track_ess(cloud);
  return cloud;
}

ParticleCloud naive_pl_step(ParticleCloud cloud, double y, std::optional<double> y_prev) {
  check_observation(y, y_prev);
  const int n = cloud.size();
  const int t = cloud.t + 1;
  const auto ut = static_cast<std::uint64_t>(t);
  const HermiteOrder order = cloud.order;
  const bool refresh = cloud.options.learn_params && cloud.options.refresh_params;
  const int nt = resolve_threads(cloud.options.threads);
  const auto& P = cloud.particles;

  std::vector<double> x_hat(n);
  std::vector<double> log_w(n);
#pragma omp parallel for num_threads(nt) schedule(static)
  for (int i = 0; i < n; ++i) {
    const double g = state_mean(P[i].theta, P[i].x, previous_shock(y_prev, P[i].x));
    auto rng = StreamKey{cloud.seed, StreamPurpose::kPropagate, ut, static_cast<std::uint64_t>(i)}.generator();
    std::normal_distribution<double> normal;
    x_hat[i] = g + P[i].theta.omega * normal(rng);
    log_w[i] = log_likelihood_or_floor(y, x_hat[i]);
  }
  std::vector<double> weights(n);
  const WeightSummary summary = normalize_log_weights(log_w, weights);
  std::vector<int> a(n);
  {
    auto rng = StreamKey{cloud.seed, StreamPurpose::kResample, ut, 0}.generator();
    resample(weights, cloud.options.scheme, rng, a);
  }

  std::vector<Particle> next(static_cast<std::size_t>(n));
  long retries = 0;
  long clamps = 0;
#pragma omp parallel for num_threads(nt) schedule(static) reduction(+ : retries, clamps)
  for (int k = 0; k < n; ++k) {
    const int p = a[k];
    Particle& out = next[k];
    out.x = x_hat[p];
    if (refresh) {
      refresh_particle(P[p], x_hat[p], y_prev, order,
                       {cloud.seed, StreamPurpose::kTheta, ut, static_cast<std::uint64_t>(k)}, out, retries, clamps);
    } else {
      out.theta = P[p].theta;
      out.stats = P[p].stats;
    }
  }

  cloud.particles.swap(next);
  cloud.t = t;
  cloud.last_log_pred = summary.log_mean;
  cloud.cum_log_marglik += cloud.last_log_pred;
  cloud.ess = summary.ess;
  cloud.diagnostics.beta_retries += retries;
  cloud.diagnostics.beta_clamps += clamps;
  track_ess(cloud);
  return cloud;
}

std::vector<std::string> param_names(HermiteOrder order) {
  std::vector<std::string> names{"mu", "beta"};
  for (int j = 1; j <= order.value(); ++j) names.push_back("phi" + std::to_string(j));
  names.push_back("omega");
  return names;
}

std::vector<ParamSummary> summarize(const ParticleCloud& cloud) {
  const auto names = param_names(cloud.order);
  const int n = cloud.size();
  const int k = cloud.order.value();
  std::vector<ParamSummary> out;
  std::vector<double> values(static_cast<std::size_t>(n));
  for (std::size_t p = 0; p < names.size(); ++p) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const SvParams& th = cloud.particles[i].theta;
      double v;
      if (p == 0) {
        v = th.mu;
      } else if (p == 1) {
        v = th.beta;
      } else if (static_cast<int>(p) < 2 + k) {
        v = th.leverage.phi(static_cast<int>(p) - 1);
      } else {
        v = th.omega;
      }
      values[i] = v;
      sum += v;
    }
    const double mean = sum / n;
    const double lo = quantile_inplace(values, 0.025);
    const double hi = quantile_inplace(values, 0.975);
    out.push_back({names[p], mean, lo, hi});
  }
  return out;
}

std::vector<double> FilterResult::scored_log_pred() const {
  return {log_pred.begin() + std::min<std::size_t>(static_cast<std::size_t>(burn), log_pred.size()), log_pred.end()};
}

FilterResult run_filter(const ReturnSeries& series, HermiteOrder order, const PriorSpec& prior, int n,
                        std::uint64_t seed, Algorithm algorithm, int burn, const RunOptions& options) {
  const int T = static_cast<int>(series.size());
  if (T < 2) throw InputError("series must contain at least two observations");
  if (burn < 0 || burn > T) throw ConfigError("burn must lie in [0, series length]");
  for (const double v : series.y) {
    if (!std::isfinite(v)) throw InputError("series contains non-finite values");
  }

  FilterOptions fopts = options.filter;
  if (algorithm == Algorithm::kPl) fopts.refresh_params = true;
  if (algorithm == Algorithm::kNaive) fopts.refresh_params = false;
  ParticleCloud cloud = init_cloud(prior, order, n, seed, fopts);
  const std::set<int> checkpoints(options.checkpoints.begin(), options.checkpoints.end());

  FilterResult result;
  result.order = order;
  result.algorithm = algorithm;
  result.n_particles = n;
  result.seed = seed;
  result.burn = burn;
  result.log_pred.reserve(T);
  result.ess.reserve(T);
  result.filtered_x_mean.reserve(T);

  for (int t = 0; t < T; ++t) {
    const std::optional<double> y_prev = t > 0 ? std::optional<double>(series.y[t - 1]) : std::nullopt;
    cloud = algorithm == Algorithm::kPlav ? plav_step(std::move(cloud), series.y[t], y_prev)
                                          : naive_pl_step(std::move(cloud), series.y[t], y_prev);
    result.log_pred.push_back(cloud.last_log_pred);
    result.ess.push_back(cloud.ess);
    double sx = 0.0;
    for (const auto& p : cloud.particles) sx += p.x;
    result.filtered_x_mean.push_back(sx / n);
    if (checkpoints.contains(t + 1) && t + 1 != T) result.checkpoints.push_back({t + 1, summarize(cloud)});
  }
  result.checkpoints.push_back({T, summarize(cloud)});

  double cum = 0.0;
  for (int t = burn; t < T; ++t) cum += result.log_pred[t];
  result.cum_log_marglik = cum;
  result.posterior.reserve(n);
  for (const auto& p : cloud.particles) result.posterior.push_back(p.theta);
  result.diagnostics = cloud.diagnostics;
  return result;
}

}  // namespace svnl
