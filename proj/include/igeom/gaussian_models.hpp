#pragma once

#include <cmath>
#include <numbers>
#include <utility>

#include "igeom/manifold.hpp"

namespace igeom {

template <typename Scalar>
struct UnivariateGaussian {
  Scalar mean;
  Scalar variance;

  Scalar pdf(Scalar x) const {
    using std::exp;
    using std::sqrt;
    const Scalar d = x - mean;
    return exp(-d * d / (2 * variance)) / sqrt(2 * std::numbers::pi_v<Scalar> * variance);
  }
  Scalar stddev() const {
    using std::sqrt;
    return sqrt(variance);
  }
};

/// The correlated bivariate model on (x, y) with μ_y = 0 and the macroscopic
/// constraint Σ_c² = σ_x σ_y; macrospace is (μ_x, σ), r is external.
template <typename Scalar>
struct Correlated2D {
  Scalar mu_x = 0;
  Scalar sigma = 1;
  Scalar r = 0;
  Scalar sigma_c = 1;

  /// |r| = 1 is accepted only when `allow_boundary`; the density is singular there.
  void validate(bool allow_boundary = false) const {
    using std::abs;
    if (!(sigma > 0)) throw DomainError("sigma must be positive");
    if (!(sigma_c > 0)) throw DomainError("sigma_c must be positive");
    if (!(abs(r) <= 1)) throw DomainError("correlation r must lie in [-1, 1]");
    if (!allow_boundary && abs(r) == 1)
      throw DomainError("|r| = 1 is a degenerate (non-normalizable) boundary");
  }

  Scalar sigma_y() const { return sigma_c * sigma_c / sigma; }

  Eigen::Matrix<Scalar, 2, 1> mean() const { return {mu_x, Scalar(0)}; }

  Eigen::Matrix<Scalar, 2, 2> covariance() const {
    const Scalar c2 = sigma_c * sigma_c;
    Eigen::Matrix<Scalar, 2, 2> cov;
    cov << sigma * sigma, r * c2, r * c2, c2 * c2 / (sigma * sigma);
    return cov;
  }

  ParameterPoint theta() const {
    return ParameterPoint{{static_cast<double>(mu_x), static_cast<double>(sigma)}};
  }
};

using Correlated2DParams = Correlated2D<double>;

/// Generic binormal density p(x, y; μ_x, μ_y, σ_x, σ_y, r).
template <typename Scalar>
Scalar bivariate_pdf(Scalar x, Scalar y, Scalar mu_x, Scalar mu_y, Scalar sigma_x, Scalar sigma_y,
                     Scalar r) {
  using std::exp;
  using std::sqrt;
  const Scalar one_m = 1 - r * r;
  const Scalar dx = (x - mu_x) / sigma_x;
  const Scalar dy = (y - mu_y) / sigma_y;
  const Scalar q = dx * dx + dy * dy - 2 * r * dx * dy;
  return exp(-q / (2 * one_m)) / (2 * std::numbers::pi_v<Scalar> * sigma_x * sigma_y * sqrt(one_m));
}

/// Density of the constrained model; throws DomainError at |r| = 1.
template <typename Scalar>
Scalar pdf_2d(Scalar x, Scalar y, const Correlated2D<Scalar>& p) {
  using std::exp;
  using std::sqrt;
  p.validate();
  const Scalar one_m = 1 - p.r * p.r;
  const Scalar c2 = p.sigma_c * p.sigma_c;
  const Scalar dx = x - p.mu_x;
  const Scalar q = dx * dx / (p.sigma * p.sigma) + y * y * p.sigma * p.sigma / (c2 * c2) -
                   2 * p.r * dx * y / c2;
  return exp(-q / (2 * one_m)) / (2 * std::numbers::pi_v<Scalar> * c2 * sqrt(one_m));
}

/// p_1 = N(μ_x, σ²), p_2 = N(0, Σ_c⁴/σ²).
template <typename Scalar>
std::pair<UnivariateGaussian<Scalar>, UnivariateGaussian<Scalar>> marginals_2d(
    const Correlated2D<Scalar>& p) {
  p.validate();
  const Scalar c2 = p.sigma_c * p.sigma_c;
  return {{p.mu_x, p.sigma * p.sigma}, {Scalar(0), c2 * c2 / (p.sigma * p.sigma)}};
}

/// g = diag(1, 4) / (σ²(1 − r²)); diverges at |r| = 1.
template <typename Scalar>
MatrixX<Scalar> metric_2d_closed(const Correlated2D<Scalar>& p) {
  p.validate();
  const Scalar a = 1 / (p.sigma * p.sigma * (1 - p.r * p.r));
  MatrixX<Scalar> g = MatrixX<Scalar>::Zero(2, 2);
  g(0, 0) = a;
  g(1, 1) = 4 * a;
  return g;
}

/// R(r) = −(1 − r²)/2 for r in [−1, 1]; independent of μ_x and σ.
template <typename Scalar>
Scalar curvature_2d_closed(Scalar r) {
  using std::abs;
  if (!(abs(r) <= 1)) throw DomainError("correlation r must lie in [-1, 1]");
  return (r * r - 1) / 2;
}

/// Non-zero entries Γ¹₁₂ = Γ¹₂₁ = −1/σ, Γ²₁₁ = 1/(4σ), Γ²₂₂ = −1/σ (any r).
template <typename Scalar>
Tensor3<Scalar> christoffel_2d_closed(Scalar sigma) {
  if (!(sigma > 0)) throw DomainError("sigma must be positive");
  Tensor3<Scalar> gamma(2, 2, 2);
  gamma.setZero();
  gamma(0, 0, 1) = gamma(0, 1, 0) = -1 / sigma;
  gamma(1, 0, 0) = 1 / (4 * sigma);
  gamma(1, 1, 1) = -1 / sigma;
  return gamma;
}

/// R₁₁ = −1/(4σ²), R₂₂ = −1/σ² (any r).
template <typename Scalar>
MatrixX<Scalar> ricci_2d_closed(Scalar sigma) {
  if (!(sigma > 0)) throw DomainError("sigma must be positive");
  MatrixX<Scalar> ric = MatrixX<Scalar>::Zero(2, 2);
  ric(0, 0) = -1 / (4 * sigma * sigma);
  ric(1, 1) = -1 / (sigma * sigma);
  return ric;
}

/// Closed-form metric field of the 2D model over θ = (μ_x, σ) at fixed r.
/// With `analytic_derivatives` the exact ∂g and ∂²g replace finite differences.
template <typename Scalar>
MetricField<Scalar> metric_field_2d(Scalar r, Scalar sigma_c = 1, bool analytic_derivatives = true) {
  Correlated2D<Scalar>{0, 1, r, sigma_c}.validate();
  auto domain = [](const VectorX<Scalar>& th) { return th.size() == 2 && th(1) > 0; };
  MetricField<Scalar> field(
      2,
      [r, sigma_c](const VectorX<Scalar>& th) {
        return metric_2d_closed(Correlated2D<Scalar>{th(0), th(1), r, sigma_c});
      },
      domain);
  if (analytic_derivatives) {
    const Scalar c = 1 / (1 - r * r);
    field.with_first_derivatives([c](const VectorX<Scalar>& th) {
      Tensor3<Scalar> d(2, 2, 2);
      d.setZero();
      const Scalar s3 = th(1) * th(1) * th(1);
      d(0, 0, 1) = -2 * c / s3;
      d(1, 1, 1) = -8 * c / s3;
      return d;
    });
    field.with_second_derivatives([c](const VectorX<Scalar>& th) {
      Tensor4<Scalar> d(2, 2, 2, 2);
      d.setZero();
      const Scalar s4 = th(1) * th(1) * th(1) * th(1);
      d(0, 0, 1, 1) = 6 * c / s4;
      d(1, 1, 1, 1) = 24 * c / s4;
      return d;
    });
  }
  return field;
}

/// The 2D model as a quadrature-ready family over θ = (μ_x, σ).
ModelFamily correlated_2d_family(double r, double sigma_c = 1.0);

/// N(μ, σ²) over θ = (μ, σ).
ModelFamily univariate_gaussian_family();

/// Multivariate normal N(μ, 𝚺) with a cached Cholesky factor.
template <typename Scalar>
class MultivariateGaussian {
 public:
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;

  MultivariateGaussian(Vector mean, Matrix covariance)
      : mean_(std::move(mean)), cov_(std::move(covariance)) {
    if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size())
      throw DomainError("covariance shape does not match mean");
    if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() >
        Scalar(1e-12) * std::max(Scalar(1), cov_.cwiseAbs().maxCoeff()))
      throw DomainError("covariance is not symmetric");
    llt_.compute(cov_);
    if (llt_.info() != Eigen::Success || !(llt_.matrixL().toDenseMatrix().diagonal().minCoeff() > 0))
      throw NotPositiveDefiniteError("covariance is not positive definite");
    using std::log;
    log_det_ = 2 * llt_.matrixL().toDenseMatrix().diagonal().array().log().sum();
  }

  int dim() const { return static_cast<int>(mean_.size()); }
  const Vector& mean() const { return mean_; }
  const Matrix& covariance() const { return cov_; }
  Scalar log_determinant() const { return log_det_; }
  Scalar determinant() const {
    using std::exp;
    return exp(log_det_);
  }

  Scalar log_pdf(const Vector& x) const {
    using std::log;
    const Vector z = llt_.matrixL().solve(x - mean_);
    return -(dim() * log(2 * std::numbers::pi_v<Scalar>) + log_det_ + z.squaredNorm()) / 2;
  }
  Scalar pdf(const Vector& x) const {
    using std::exp;
    return exp(log_pdf(x));
  }

  UnivariateGaussian<Scalar> marginal(int i) const {
    if (i < 0 || i >= dim()) throw DomainError("marginal index out of range");
    return {mean_(i), cov_(i, i)};
  }

  GaussianReference reference() const {
    return {mean_.template cast<double>(), cov_.template cast<double>()};
  }

 private:
  Vector mean_;
  Matrix cov_;
  Eigen::LLT<Matrix> llt_;
  Scalar log_det_;
};

template <typename Scalar>
Scalar mvn_pdf(const VectorX<Scalar>& x, const MultivariateGaussian<Scalar>& g) {
  return g.pdf(x);
}

template <typename Scalar>
UnivariateGaussian<Scalar> mvn_marginal(const MultivariateGaussian<Scalar>& g, int i) {
  return g.marginal(i);
}

/// The 2D model's density as a MultivariateGaussian.
MultivariateGaussian<double> as_multivariate(const Correlated2DParams& p);

}  // namespace igeom
