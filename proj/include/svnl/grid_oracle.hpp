#pragma once

#include <vector>

#include "svnl/model.hpp"

namespace svnl {

struct GridSpec {
  double lo;
  double hi;
  int points;
};

struct GridFilterResult {
  std::vector<double> grid;
  std::vector<std::vector<double>> mass;  // filtered cell probabilities per t
  std::vector<double> means;              // E[x_t | y_1:t]
  std::vector<double> log_pred;           // log p(y_t | y_1:t-1)
};

/// Deterministic filtering recursion for known theta on a uniform grid.
/// Wide transition kernels are evaluated pointwise; kernels narrower than two
/// cells are integrated per cell, so omega -> 0 is handled.
/// Throws DegeneracyError if more than 1e-6 filtered mass sits in a boundary cell.
GridFilterResult grid_filter_oracle(const ReturnSeries& series, const SvParams& theta, GridSpec grid,
                                    StateInit x0 = StateInit::stationary());

}  // namespace svnl
