#include "svnl/selection.hpp"

#include <algorithm>

#include "svnl/errors.hpp"

namespace svnl {

MarginalLikelihood log_marglik(const ReturnSeries& series, HermiteOrder order, const PriorSpec& prior, int n,
                               std::uint64_t seed, int burn, const RunOptions& options) {
  const FilterResult fit = run_filter(series, order, prior, n, seed, Algorithm::kPlav, burn, options);
  return {fit.cum_log_marglik, fit.scored_log_pred()};
}

const OrderScore& SelectionReport::score(int order) const {
  for (const auto& s : per_order) {
    if (s.order == order) return s;
  }
  throw ConfigError("order " + std::to_string(order) + " is not part of the selection report");
}

std::uint64_t order_seed(std::uint64_t seed, int order) { return derive_seed(seed, static_cast<std::uint64_t>(order)); }

BestOrder best_order(std::span<const OrderScore> scores) {
  if (scores.empty()) throw ConfigError("no orders to select from");
  const OrderScore* best = nullptr;
  bool tie = false;
  for (const auto& s : scores) {
    if (best == nullptr || s.cum_log_marglik > best->cum_log_marglik) {
      best = &s;
      tie = false;
    } else if (s.cum_log_marglik == best->cum_log_marglik) {
      tie = true;
      if (s.order < best->order) best = &s;
    }
  }
  return {best->order, tie};
}

SelectionReport select_order(const ReturnSeries& series, int k_max, const PriorSettings& prior, int n,
                             std::uint64_t seed, int burn, const RunOptions& options) {
  const HermiteOrder top(k_max);
  SelectionReport report;
  report.burn = burn;
  for (int k = 0; k <= top.value(); ++k) {
    const HermiteOrder order(k);
    const std::uint64_t s = order_seed(seed, k);
    MarginalLikelihood ml = log_marglik(series, order, prior.for_order(order), n, s, burn, options);
    report.per_order.push_back({k, s, ml.cumulative, std::move(ml.per_t)});
  }
  const BestOrder best = best_order(report.per_order);
  report.best_order = best.order;
  report.tie_break_applied = best.tie;
  return report;
}

namespace {

int best_in_class(const SelectionReport& report, std::span<const int> orders) {
  if (orders.empty()) throw ConfigError("LPDR model classes must be nonempty");
  std::vector<OrderScore> subset;
  for (const int k : orders) subset.push_back(report.score(k));
  return best_order(subset).order;
}

}  // namespace

LpdrSeries lpdr(const SelectionReport& report, std::span<const int> class_a, std::span<const int> class_b) {
  LpdrSeries out;
  out.order_a = best_in_class(report, class_a);
  out.order_b = best_in_class(report, class_b);
  const auto& a = report.score(out.order_a).per_t;
  const auto& b = report.score(out.order_b).per_t;
  out.values.reserve(a.size());
  double cum = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    cum += b[t] - a[t];
    out.values.push_back(cum);
  }
  return out;
}

LpdrSeries lpdr(const ReturnSeries& series, std::span<const int> class_a, std::span<const int> class_b,
                const PriorSettings& prior, int n, std::uint64_t seed, int burn, const RunOptions& options) {
  if (class_a.empty() || class_b.empty()) throw ConfigError("LPDR model classes must be nonempty");
  std::vector<int> orders(class_a.begin(), class_a.end());
  orders.insert(orders.end(), class_b.begin(), class_b.end());
  std::sort(orders.begin(), orders.end());
  orders.erase(std::unique(orders.begin(), orders.end()), orders.end());

  SelectionReport report;
  report.burn = burn;
  for (const int k : orders) {
    const HermiteOrder order(k);
    const std::uint64_t s = order_seed(seed, k);
    MarginalLikelihood ml = log_marglik(series, order, prior.for_order(order), n, s, burn, options);
    report.per_order.push_back({k, s, ml.cumulative, std::move(ml.per_t)});
  }
  return lpdr(report, class_a, class_b);
}

}  // namespace svnl
