#pragma once

#include <span>

namespace svnl {

/// Linear-interpolation sample quantile (Hyndman-Fan type 7). Reorders `values`.
double quantile_inplace(std::span<double> values, double p);

}  // namespace svnl
