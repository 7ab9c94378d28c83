#include "svnl/sufficient_stats.hpp"

#include <cmath>
#include <random>

#include <Eigen/Cholesky>

#include "svnl/errors.hpp"

namespace svnl {
namespace {

constexpr int tri(int i) { return i * (i + 1) / 2; }

// Solves L v = w in place (packed row-major lower L).
inline void forward_solve(const double* L, int n, double* v) {
  for (int i = 0; i < n; ++i) {
    const double* row = L + tri(i);
    double s = v[i];
    for (int j = 0; j < i; ++j) s -= row[j] * v[j];
    v[i] = s / row[i];
  }
}

// Solves L' v = w in place.
inline void backward_solve(const double* L, int n, double* v) {
  for (int i = n - 1; i >= 0; --i) {
    double s = v[i];
    for (int j = i + 1; j < n; ++j) s -= L[tri(j) + i] * v[j];
    v[i] = s / L[tri(i) + i];
  }
}

// L L' + w w' = L~ L~' (w is destroyed).
inline void rank1_update(double* L, int n, double* w) {
  for (int k = 0; k < n; ++k) {
    double& lkk = L[tri(k) + k];
    const double r = std::sqrt(lkk * lkk + w[k] * w[k]);
    const double c = r / lkk;
    const double s = w[k] / lkk;
    lkk = r;
    for (int i = k + 1; i < n; ++i) {
      double& lik = L[tri(i) + k];
      lik = (lik + s * w[i]) / c;
      w[i] = c * w[i] - s * lik;
    }
  }
}

}  // namespace

void PriorSpec::validate() const {
  const int n = dim();
  if (n < 2 || n > kMaxRegressors) throw ConfigError("prior dimension must be k + 2 with 0 <= k <= max order");
  if (A0.rows() != n || A0.cols() != n) throw ConfigError("A0 dimension does not match b0");
  if (!A0.allFinite() || !b0.allFinite()) throw ConfigError("prior contains non-finite values");
  if ((A0 - A0.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + A0.cwiseAbs().maxCoeff())) {
    throw ConfigError("A0 must be symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(A0);
  if (llt.info() != Eigen::Success) throw ConfigError("A0 must be positive definite");
  if (!(c0 > 0.0) || !(d0 > 0.0)) throw ConfigError("c0 and d0 must be positive");
  if (x0.kind == StateInit::Kind::kGaussian && !(x0.variance >= 0.0)) {
    throw ConfigError("initial-state variance must be non-negative");
  }
}

Eigen::MatrixXd PriorSpec::precision() const {
  if (a0_scale == PriorScale::kPrecision) return A0;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(dim(), dim());
  Eigen::MatrixXd P = A0.llt().solve(I);
  return 0.5 * (P + P.transpose());
}

PriorSpec PriorSettings::for_order(HermiteOrder order) const {
  const int n = order.regressors();
  PriorSpec p;
  p.A0 = Eigen::MatrixXd::Zero(n, n);
  p.b0 = Eigen::VectorXd::Constant(n, phi_mean);
  p.A0(0, 0) = mu_scale;
  p.A0(1, 1) = beta_scale;
  for (int j = 2; j < n; ++j) p.A0(j, j) = phi_scale;
  p.b0(0) = mu_mean;
  p.b0(1) = beta_mean;
  p.c0 = c0;
  p.d0 = d0;
  p.a0_scale = a0_scale;
  p.ig_form = ig_form;
  p.x0 = x0;
  return p;
}

int fill_regressor(HermiteOrder order, double x_prev, std::optional<double> eps_prev,
                   std::span<double, kMaxRegressors> out) {
  const int k = order.value();
  out[0] = 1.0;
  out[1] = x_prev;
  if (eps_prev) {
    hermite_basis(k, *eps_prev, out.subspan(2, static_cast<std::size_t>(k)));
  } else {
    for (int j = 0; j < k; ++j) out[2 + j] = 0.0;
  }
  return k + 2;
}

SufficientStats SufficientStats::from_prior(const PriorSpec& prior) {
  prior.validate();
  const int n = prior.dim();
  const Eigen::MatrixXd P = prior.precision();
  Eigen::LLT<Eigen::MatrixXd> llt(P);
  if (llt.info() != Eigen::Success) throw ConfigError("prior precision is not positive definite");
  const Eigen::MatrixXd L = llt.matrixL();

  SufficientStats s;
  s.dim_ = n;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) s.chol_[tri(i) + j] = L(i, j);
    s.mean_[i] = prior.b0(i);
  }
  s.c_ = prior.shape();
  s.d_ = prior.scale();
  s.n_ = 0;
  return s;
}

Eigen::MatrixXd SufficientStats::cholesky() const {
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(dim_, dim_);
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j <= i; ++j) L(i, j) = chol_[tri(i) + j];
  }
  return L;
}

Eigen::MatrixXd SufficientStats::precision() const {
  const Eigen::MatrixXd L = cholesky();
  return L * L.transpose();
}

Eigen::VectorXd SufficientStats::mean() const {
  return Eigen::Map<const Eigen::VectorXd>(mean_.data(), dim_);
}

Eigen::VectorXd SufficientStats::precision_mean() const { return precision() * mean(); }

double SufficientStats::smallest_pivot() const {
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i < dim_; ++i) m = std::min(m, chol_[tri(i) + i]);
  return m;
}

void SufficientStats::fold(std::span<const double> w, double x) {
  const int n = dim_;
  std::array<double, kMaxRegressors> v{};
  std::array<double, kMaxRegressors> work{};
  double pred = 0.0;
  for (int i = 0; i < n; ++i) {
    v[i] = w[i];
    work[i] = w[i];
    pred += w[i] * mean_[i];
  }
  forward_solve(chol_.data(), n, v.data());
  double q = 0.0;
  for (int i = 0; i < n; ++i) q += v[i] * v[i];
  backward_solve(chol_.data(), n, v.data());  // v = A^{-1} w

  const double e = x - pred;
  const double denom = 1.0 + q;
  const double step = e / denom;
  for (int i = 0; i < n; ++i) mean_[i] += v[i] * step;
  d_ += 0.5 * e * step;
  c_ += 0.5;
  ++n_;
  rank1_update(chol_.data(), n, work.data());
}

SufficientStats update_stats(const SufficientStats& s, double x_new, double x_prev,
                             std::optional<double> eps_prev) {
  std::array<double, kMaxRegressors> w{};
  const int n = fill_regressor(HermiteOrder(s.dim() - 2), x_prev, eps_prev, w);
  SufficientStats out = s;
  out.fold(std::span<const double>(w.data(), static_cast<std::size_t>(n)), x_new);
  return out;
}

ThetaDraw sample_theta(const SufficientStats& s, HermiteOrder order, const StreamKey& key) {
  const int n = s.dim();
  if (n != order.regressors()) throw ConfigError("sufficient statistics do not match the leverage order");
  const auto L = s.packed_cholesky();
  const auto mean = s.raw_mean();
  if (!(s.smallest_pivot() > 1e-150)) throw DegeneracyError("posterior precision matrix is numerically singular");

  ThetaDraw draw;
  draw.theta.leverage = LeverageSpec::zeros(order);
  std::array<double, kMaxRegressors> z{};
  for (int attempt = 0; attempt < kBetaMaxAttempts; ++attempt) {
    auto rng = key.generator(static_cast<std::uint64_t>(attempt));
    std::gamma_distribution<double> gamma(s.shape(), 1.0);
    std::normal_distribution<double> normal;
    const double omega2 = s.scale() / gamma(rng);
    const double omega = std::sqrt(omega2);
    for (int i = 0; i < n; ++i) z[i] = normal(rng);
    backward_solve(L.data(), n, z.data());  // z ~ N(0, A^{-1})

    draw.theta.mu = mean[0] + omega * z[0];
    draw.theta.beta = mean[1] + omega * z[1];
    auto phi = draw.theta.leverage.coeffs();
    for (int j = 0; j < order.value(); ++j) phi[j] = mean[2 + j] + omega * z[2 + j];
    draw.theta.omega = omega;
    if (std::abs(draw.theta.beta) < kBetaBound) return draw;
    ++draw.retries;
  }
  draw.clamped = true;
  draw.theta.beta = std::copysign(std::nextafter(kBetaBound, 0.0), draw.theta.beta);
  return draw;
}

}  // namespace svnl
