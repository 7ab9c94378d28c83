#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "svnl/model.hpp"
#include "svnl/resample.hpp"
#include "svnl/sufficient_stats.hpp"

namespace svnl {

enum class Algorithm {
  kPlav,   // auxiliary-variable particle learning
  kPl,     // propagate-weight-resample with sufficient-statistic refresh
  kNaive,  // plain filter on (x, theta), theta fixed at its initial draw
};

std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& s);

struct FilterOptions {
  ResampleScheme scheme = ResampleScheme::kSystematic;
  /// Steps 4-5 of the learning loop; off means theta stays fixed per particle.
  bool learn_params = true;
  /// Used by naive_pl_step only: refresh theta from sufficient statistics.
  bool refresh_params = false;
  /// 0: SVNL_THREADS environment variable, else all available.
  int threads = 0;
};

struct Particle {
  double x = 0.0;
  SvParams theta;
  SufficientStats stats;
};

struct DegeneracyWarning {
  int t_start;  // first step of the low-ESS run
  int t_flag;   // step at which the run reached the reporting length
};

struct FilterDiagnostics {
  long beta_retries = 0;
  long beta_clamps = 0;
  int low_ess_run = 0;
  std::vector<DegeneracyWarning> warnings;
};

inline constexpr int kLowEssRunLength = 50;

/// N particles after processing t observations.
struct ParticleCloud {
  std::vector<Particle> particles;
  int t = 0;
  double cum_log_marglik = 0.0;
  double last_log_pred = 0.0;
  double ess = 0.0;
  HermiteOrder order;
  std::uint64_t seed = 0;
  FilterOptions options;
  FilterDiagnostics diagnostics;

  int size() const { return static_cast<int>(particles.size()); }
};

/// Draws N particles from the prior: omega^2, gamma | omega^2, then x_0.
ParticleCloud init_cloud(const PriorSpec& prior, HermiteOrder order, int n, std::uint64_t seed,
                         FilterOptions options = {});

/// N copies of a known theta, x_0 drawn per `x0`; parameter learning off.
ParticleCloud init_cloud_fixed(const SvParams& theta, StateInit x0, int n, std::uint64_t seed,
                               FilterOptions options = {});

/// One step of auxiliary-variable particle learning. y_prev is the previous
/// observation (nullopt for the first step, where the leverage term is absent).
ParticleCloud plav_step(ParticleCloud cloud, double y, std::optional<double> y_prev);

/// One step of the propagate-weight-resample filter on (x, theta).
ParticleCloud naive_pl_step(ParticleCloud cloud, double y, std::optional<double> y_prev);

struct ParamSummary {
  std::string name;
  double mean;
  double lo;  // 2.5%
  double hi;  // 97.5%
};

struct Checkpoint {
  int t;
  std::vector<ParamSummary> params;
};

struct RunOptions {
  FilterOptions filter;
  /// 1-based time indices at which to summarize theta; the final step is always included.
  std::vector<int> checkpoints;
};

struct FilterResult {
  HermiteOrder order;
  Algorithm algorithm = Algorithm::kPlav;
  int n_particles = 0;
  std::uint64_t seed = 0;
  int burn = 0;
  std::vector<double> log_pred;         // one-step log predictive, every t
  double cum_log_marglik = 0.0;         // sum of log_pred over t > burn
  std::vector<double> ess;              // ESS of the final weighting at every t
  std::vector<double> filtered_x_mean;  // E[x_t | y_1:t]
  std::vector<Checkpoint> checkpoints;
  std::vector<SvParams> posterior;      // theta of every particle after the last step
  FilterDiagnostics diagnostics;

  /// log_pred restricted to the scoring window t > burn.
  std::vector<double> scored_log_pred() const;
};

/// Posterior summaries of (mu, beta, phi_1..phi_k, omega) over a cloud.
std::vector<ParamSummary> summarize(const ParticleCloud& cloud);
std::vector<std::string> param_names(HermiteOrder order);

/// Runs the chosen step over the whole series. Requires size >= 2 and
/// 0 <= burn <= size; throws InputError on non-finite values.
FilterResult run_filter(const ReturnSeries& series, HermiteOrder order, const PriorSpec& prior, int n,
                        std::uint64_t seed, Algorithm algorithm, int burn, const RunOptions& options = {});

/// Resolved worker count for the given request (see FilterOptions::threads).
int resolve_threads(int requested);

}  // namespace svnl
