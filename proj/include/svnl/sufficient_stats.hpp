#pragma once

#include <array>
#include <optional>
#include <span>

#include <Eigen/Core>

#include "svnl/hermite.hpp"
#include "svnl/model.hpp"
#include "svnl/rng.hpp"

namespace svnl {

inline constexpr int kMaxRegressors = kMaxHermiteOrder + 2;
inline constexpr int kMaxPacked = kMaxRegressors * (kMaxRegressors + 1) / 2;

/// How the prior scale matrix A0 is read.
enum class PriorScale {
  kCovariance,  // gamma | omega^2 ~ N(b0, omega^2 A0)
  kPrecision,   // gamma | omega^2 ~ N(b0, omega^2 A0^{-1})
};

/// How (c0, d0) parameterize the inverse-gamma prior on omega^2.
enum class InvGammaForm {
  kShapeScale,      // IG(c0, d0)
  kHalfShapeScale,  // IG(c0 / 2, d0 / 2)
};

/// Conjugate Normal-Inverse-Gamma prior on gamma = (mu, beta, phi_1..phi_k)
/// and omega^2, plus the law of the initial state.
struct PriorSpec {
  Eigen::MatrixXd A0;
  Eigen::VectorXd b0;
  double c0 = 5.0;
  double d0 = 0.4;
  PriorScale a0_scale = PriorScale::kCovariance;
  InvGammaForm ig_form = InvGammaForm::kShapeScale;
  StateInit x0 = StateInit::stationary();

  int dim() const { return static_cast<int>(b0.size()); }
  HermiteOrder order() const { return HermiteOrder(dim() - 2); }
  /// Throws ConfigError unless A0 is symmetric positive definite and c0, d0 > 0.
  void validate() const;
  /// Prior precision of gamma (divided by omega^2).
  Eigen::MatrixXd precision() const;
  double shape() const { return ig_form == InvGammaForm::kShapeScale ? c0 : 0.5 * c0; }
  double scale() const { return ig_form == InvGammaForm::kShapeScale ? d0 : 0.5 * d0; }
};

/// Diagonal prior family; builds a PriorSpec for any order.
/// Defaults: A0 = diag(1, 0.01, 1, ..., 1), b0 = (0, 0.95, 0, ..., 0), c0 = 5, d0 = 0.4.
struct PriorSettings {
  double mu_mean = 0.0;
  double beta_mean = 0.95;
  double phi_mean = 0.0;
  double mu_scale = 1.0;
  double beta_scale = 0.01;
  double phi_scale = 1.0;
  double c0 = 5.0;
  double d0 = 0.4;
  PriorScale a0_scale = PriorScale::kCovariance;
  InvGammaForm ig_form = InvGammaForm::kShapeScale;
  StateInit x0 = StateInit::stationary();

  PriorSpec for_order(HermiteOrder order) const;
};

/// Regressor of the state equation: (1, x_prev, H_1(eps_prev), ..., H_k(eps_prev)).
/// Without eps_prev the Hermite entries are zero.
int fill_regressor(HermiteOrder order, double x_prev, std::optional<double> eps_prev,
                   std::span<double, kMaxRegressors> out);

/// Normal-Inverse-Gamma posterior accumulators for the state regression.
///
/// Mathematically this is (A, Ab, c, d, n) with A the precision of gamma (in
/// units of omega^{-2}). The stored form is the Cholesky factor of A, the
/// posterior mean A^{-1} Ab, and the inverse-gamma (shape, scale), which lets a
/// fold run in O(dim^2) via a rank-1 factor update.
class SufficientStats {
 public:
  SufficientStats() = default;
  static SufficientStats from_prior(const PriorSpec& prior);

  int dim() const { return dim_; }
  /// A
  Eigen::MatrixXd precision() const;
  /// A b, with b the posterior mean.
  Eigen::VectorXd precision_mean() const;
  Eigen::VectorXd mean() const;
  Eigen::MatrixXd cholesky() const;
  double shape() const { return c_; }
  double scale() const { return d_; }
  long count() const { return n_; }

  /// A += w w', Ab += w x, c += 1/2, d += e^2 / (2 (1 + w' A^{-1} w)) with e
  /// the prior predictive residual x - w' b, n += 1.
  void fold(std::span<const double> w, double x);

  /// Smallest diagonal entry of the Cholesky factor of A.
  double smallest_pivot() const;

  /// Raw storage for hot loops: packed row-major lower Cholesky factor and mean.
  std::span<const double> packed_cholesky() const { return {chol_.data(), static_cast<std::size_t>(dim_ * (dim_ + 1) / 2)}; }
  std::span<const double> raw_mean() const { return {mean_.data(), static_cast<std::size_t>(dim_)}; }

 private:
  int dim_ = 0;
  std::array<double, kMaxPacked> chol_{};  // row-major packed lower triangle
  std::array<double, kMaxRegressors> mean_{};
  double c_ = 0.0;
  double d_ = 0.0;
  long n_ = 0;
};

/// S(s, x_new; x_prev, eps_prev): one conjugate update with the state-equation regressor.
SufficientStats update_stats(const SufficientStats& s, double x_new, double x_prev,
                             std::optional<double> eps_prev);

inline constexpr double kBetaBound = 0.999;
inline constexpr int kBetaMaxAttempts = 100;

struct ThetaDraw {
  SvParams theta;
  int retries = 0;       // redraws caused by |beta| >= kBetaBound
  bool clamped = false;  // retries exhausted; beta clamped to the bound
};

/// omega^2 ~ IG(c, d), gamma | omega^2 ~ N(b, omega^2 A^{-1}); the joint draw
/// is repeated (fresh stream per attempt) until |beta| < kBetaBound.
/// Throws DegeneracyError when A is numerically singular.
ThetaDraw sample_theta(const SufficientStats& s, HermiteOrder order, const StreamKey& key);

}  // namespace svnl
