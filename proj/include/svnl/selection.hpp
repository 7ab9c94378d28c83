#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "svnl/filter.hpp"

namespace svnl {

struct MarginalLikelihood {
  double cumulative = 0.0;
  std::vector<double> per_t;  // t = burn+1..T
};

/// Accumulated one-step log predictive density of a PLAV run over t > burn.
MarginalLikelihood log_marglik(const ReturnSeries& series, HermiteOrder order, const PriorSpec& prior, int n,
                               std::uint64_t seed, int burn, const RunOptions& options = {});

struct OrderScore {
  int order = 0;
  std::uint64_t seed = 0;
  double cum_log_marglik = 0.0;
  std::vector<double> per_t;
};

struct SelectionReport {
  std::vector<OrderScore> per_order;
  int best_order = 0;
  int burn = 0;
  bool tie_break_applied = false;

  const OrderScore& score(int order) const;
};

/// Seed used for order k inside select_order.
std::uint64_t order_seed(std::uint64_t seed, int order);

struct BestOrder {
  int order;
  bool tie;
};
/// argmax of cum_log_marglik; exact ties go to the smaller order.
BestOrder best_order(std::span<const OrderScore> scores);

SelectionReport select_order(const ReturnSeries& series, int k_max, const PriorSettings& prior, int n,
                             std::uint64_t seed, int burn, const RunOptions& options = {});

struct LpdrSeries {
  int order_a = 0;
  int order_b = 0;
  std::vector<double> values;  // cumulative sum of log p_b - log p_a
};

/// LPDR of the best order in class_b against the best order in class_a.
/// Both classes must be nonempty subsets of the report's orders.
LpdrSeries lpdr(const SelectionReport& report, std::span<const int> class_a, std::span<const int> class_b);

LpdrSeries lpdr(const ReturnSeries& series, std::span<const int> class_a, std::span<const int> class_b,
                const PriorSettings& prior, int n, std::uint64_t seed, int burn, const RunOptions& options = {});

}  // namespace svnl
