// Monte Carlo recovery experiments for order selection on simulated data.
// These take about a minute; the larger experiments live in the acceptance suite.
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "svnl/selection.hpp"

using namespace svnl;

namespace {

constexpr int kSeeds = 20;

SvParams truth(LeverageSpec lev, double omega) {
  SvParams th;
  th.mu = -0.026;
  th.beta = 0.970;
  th.leverage = lev;
  th.omega = omega;
  return th;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double stddev(const std::vector<double>& v) {
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double s = 0.0;
  for (const double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (v.size() - 1));
}

}  // namespace

TEST_CASE("linear-leverage data: order 1 beats order 0 in the median") {
  std::vector<double> diff;
  for (int s = 1; s <= kSeeds; ++s) {
    const auto sim = simulate(truth(LeverageSpec{-0.045}, 0.143), 1000, StateInit::stationary(), 1000 + s);
    const auto r = select_order(sim.returns, 1, PriorSettings{}, 2000, s, 200);
    diff.push_back(r.score(1).cum_log_marglik - r.score(0).cum_log_marglik);
  }
  INFO("median difference " << median(diff));
  CHECK(median(diff) > 0.0);
}

TEST_CASE("no-leverage data: parsimonious orders win and the LPDR centres on zero") {
  int parsimonious = 0;
  std::vector<double> final_lpdr;
  const std::vector<int> zero{0};
  const std::vector<int> one{1};
  for (int s = 1; s <= kSeeds; ++s) {
    const auto sim = simulate(truth(LeverageSpec::zeros(HermiteOrder(0)), 0.150), 2000, StateInit::stationary(),
                              2000 + s);
    const auto r = select_order(sim.returns, 3, PriorSettings{}, 1000, s, 400);
    parsimonious += r.best_order <= 1 ? 1 : 0;
    final_lpdr.push_back(lpdr(r, zero, one).values.back());
  }
  std::vector<double> abs_lpdr;
  for (const double v : final_lpdr) abs_lpdr.push_back(std::abs(v));
  MESSAGE("best order in {0,1}: " << parsimonious << "/" << kSeeds << "; median |LPDR| " << median(abs_lpdr)
                                  << ", cross-seed sd " << stddev(final_lpdr));
  CHECK(parsimonious * 2 > kSeeds);
  CHECK(median(abs_lpdr) <= stddev(final_lpdr));
}
