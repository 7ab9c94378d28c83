#pragma once

#include <array>
#include <span>
#include <vector>

#ifndef SVNL_MAX_ORDER
#define SVNL_MAX_ORDER 6
#endif

namespace svnl {

inline constexpr int kMaxHermiteOrder = SVNL_MAX_ORDER;

/// Order k of a Hermite leverage expansion; k = 0 means no leverage.
class HermiteOrder {
 public:
  constexpr HermiteOrder() = default;
  /// Throws ConfigError unless 0 <= k <= kMaxHermiteOrder.
  explicit HermiteOrder(int k);

  constexpr int value() const { return k_; }
  /// Number of regression coefficients (mu, beta, phi_1..phi_k).
  constexpr int regressors() const { return k_ + 2; }

  friend constexpr bool operator==(HermiteOrder, HermiteOrder) = default;
  friend constexpr auto operator<=>(HermiteOrder, HermiteOrder) = default;

 private:
  int k_ = 0;
};

/// Coefficients (phi_1, ..., phi_k) of the leverage function
///   l(z) = phi_1 H_1(z) + ... + phi_k H_k(z).
/// Storage is fixed-capacity so the type stays trivially copyable inside particles.
class LeverageSpec {
 public:
  LeverageSpec() = default;
  explicit LeverageSpec(std::span<const double> coeffs);
  LeverageSpec(std::initializer_list<double> coeffs);
  /// All-zero coefficients of the given order.
  static LeverageSpec zeros(HermiteOrder order);

  HermiteOrder order() const { return HermiteOrder(order_); }
  std::span<const double> coeffs() const { return {coeffs_.data(), static_cast<std::size_t>(order_)}; }
  std::span<double> coeffs() { return {coeffs_.data(), static_cast<std::size_t>(order_)}; }
  /// 1-based: phi(1) is the linear coefficient.
  double phi(int j) const { return coeffs_[j - 1]; }

 private:
  int order_ = 0;
  std::array<double, kMaxHermiteOrder> coeffs_{};
};

/// Probabilists' Hermite polynomial H_k(z) via
/// H_{k+1} = z H_k - k H_{k-1}, H_0 = 1, H_1 = z.
double hermite_eval(int k, double z);

/// Writes (H_1(z), ..., H_k(z)) into out[0..k) in one recurrence pass.
void hermite_basis(int k, double z, std::span<double> out);
std::vector<double> hermite_basis(int k, double z);

double leverage_eval(const LeverageSpec& spec, double z);

struct CurvePoint {
  double z;
  double mean;
  double lo;  // 2.5% quantile
  double hi;  // 97.5% quantile
};

/// Posterior news-impact curve: pointwise mean and central 95% band of l(z)
/// over a sample of coefficient vectors sharing one order.
std::vector<CurvePoint> leverage_curve(std::span<const LeverageSpec> samples, std::span<const double> grid);

}  // namespace svnl
