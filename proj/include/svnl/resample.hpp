#pragma once

#include <span>
#include <vector>

#include "svnl/rng.hpp"

namespace svnl {

enum class ResampleScheme { kSystematic, kMultinomial };

/// Ancestor indices drawn from normalized weights. Systematic resampling
/// keeps every count within {floor(N w_i), ceil(N w_i)}.
/// Throws DegeneracyError for all-zero weights, InputError for NaN/negative
/// weights or a sum outside 1 +- 1e-9.
void resample(std::span<const double> weights, ResampleScheme scheme, Xoshiro256pp& rng,
              std::span<int> ancestors);
std::vector<int> resample(std::span<const double> weights, int n, ResampleScheme scheme, Xoshiro256pp& rng);

struct WeightSummary {
  double log_mean;  // log((1/N) sum exp(log_w))
  double ess;       // 1 / sum w_i^2 of the normalized weights
};

/// Normalizes log-weights into `weights` with max-subtraction. NaN entries
/// count as -inf. Throws DegeneracyError if every entry is -inf.
WeightSummary normalize_log_weights(std::span<const double> log_w, std::span<double> weights);

double effective_sample_size(std::span<const double> weights);

}  // namespace svnl
