#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>

#include "igeom/quadrature.hpp"
#include "igeom/types.hpp"

namespace igeom {

/// A parametric family p(x; θ) over an N-dimensional microspace.
///
/// `marginal` is optional; when present it returns the i-th one-dimensional
/// marginal density p_i(x_i; θ), which the correlation routines need.
struct ModelFamily {
  using Density = std::function<double(const Eigen::VectorXd& x, const ParameterPoint& theta)>;
  using ScoreFn =
      std::function<Eigen::VectorXd(const Eigen::VectorXd& x, const ParameterPoint& theta)>;
  using Domain = std::function<bool(const ParameterPoint& theta)>;
  using Reference = std::function<GaussianReference(const ParameterPoint& theta)>;
  using Marginal = std::function<double(int i, double xi, const ParameterPoint& theta)>;

  std::string name;
  int micro_dim = 0;
  int macro_dim = 0;
  Density density;
  /// ∂/∂θ_i log p(x; θ). Left empty, a central difference of log p is used.
  ScoreFn log_density_grad;
  Domain domain;
  Reference integration_reference;
  Marginal marginal;

  /// Throws DomainError unless θ has the macrospace dimension and lies in the domain.
  void check(const ParameterPoint& theta) const;
  Eigen::VectorXd score(const Eigen::VectorXd& x, const ParameterPoint& theta) const;
};

/// ∫ p(x; θ) dx over the microspace.
QuadratureResult<double> normalization(const ModelFamily& model, const ParameterPoint& theta,
                                       const QuadratureSpec& spec = {});

/// Fisher–Rao metric g_ij(θ) = ∫ p ∂_i log p ∂_j log p dx, symmetrized.
///
/// Throws DomainError outside the model domain, ConvergenceError when the
/// quadrature error estimate exceeds tolerance and NotPositiveDefiniteError
/// when the result is not positive definite.
QuadratureResult<Eigen::MatrixXd> fisher_metric(const ModelFamily& model,
                                                const ParameterPoint& theta,
                                                const QuadratureSpec& spec = {});

/// Finite-difference step rule: h_i = max(1e-5, 1e-5 |θ_i|).
template <typename Scalar>
Scalar default_step(Scalar coord) {
  using std::abs;
  using std::max;
  return max(Scalar(1e-5), Scalar(1e-5) * abs(coord));
}

enum class MetricSource { Closed, Quadrature };

/// θ ↦ g(θ), with optional analytic derivative overrides.
///
/// First derivatives are laid out dg(i, j, l) = ∂_l g_ij; second derivatives
/// d2g(i, j, k, l) = ∂_k ∂_l g_ij.
template <typename Scalar>
class MetricField {
 public:
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;
  using Eval = std::function<Matrix(const Vector&)>;
  using Domain = std::function<bool(const Vector&)>;
  using FirstDerivatives = std::function<Tensor3<Scalar>(const Vector&)>;
  using SecondDerivatives = std::function<Tensor4<Scalar>(const Vector&)>;

  MetricField(int dim, Eval eval, Domain domain = {}, MetricSource source = MetricSource::Closed)
      : dim_(dim), eval_(std::move(eval)), domain_(std::move(domain)), source_(source) {}

  MetricField& with_first_derivatives(FirstDerivatives d) {
    first_ = std::move(d);
    return *this;
  }
  MetricField& with_second_derivatives(SecondDerivatives d) {
    second_ = std::move(d);
    return *this;
  }

  int dim() const { return dim_; }
  MetricSource source() const { return source_; }
  bool contains(const Vector& theta) const {
    return theta.size() == dim_ && (!domain_ || domain_(theta));
  }
  Matrix operator()(const Vector& theta) const { return eval_(theta); }

  const FirstDerivatives& analytic_first() const { return first_; }
  const SecondDerivatives& analytic_second() const { return second_; }

  /// Constant metric, handy for flat-space checks.
  static MetricField constant(const Matrix& g) {
    const int m = static_cast<int>(g.rows());
    return MetricField(m, [g](const Vector&) { return g; });
  }

 private:
  int dim_;
  Eval eval_;
  Domain domain_;
  MetricSource source_;
  FirstDerivatives first_;
  SecondDerivatives second_;
};

/// Quadrature-backed field: every evaluation is a fresh fisher_metric call.
MetricField<double> fisher_field(const ModelFamily& model, const QuadratureSpec& spec = {});

template <typename Scalar>
struct MetricDerivatives {
  Tensor3<Scalar> first;
  std::optional<Tensor4<Scalar>> second;
};

/// Central-difference derivatives of the metric (analytic overrides win).
///
/// order 1 fills `first`; order 2 also fills `second` via nested central
/// differences. Throws DomainError when a stencil point leaves the domain and
/// NumericalDerivativeError on step underflow.
template <typename Scalar>
MetricDerivatives<Scalar> metric_derivatives(const MetricField<Scalar>& field,
                                             const VectorX<Scalar>& theta, int order) {
  if (order != 1 && order != 2) throw DomainError("metric derivative order must be 1 or 2");
  if (!field.contains(theta)) throw DomainError("metric derivative requested outside the domain");
  const int m = field.dim();
  using Vector = VectorX<Scalar>;

  std::vector<Scalar> h(m);
  for (int l = 0; l < m; ++l) {
    h[l] = default_step(theta(l));
    if (theta(l) + h[l] == theta(l)) throw NumericalDerivativeError("finite-difference step underflow");
  }
  auto eval_at = [&](const Vector& p) {
    if (!field.contains(p)) throw DomainError("finite-difference stencil leaves the domain");
    return field(p);
  };
  auto shifted = [&](std::initializer_list<std::pair<int, Scalar>> moves) {
    Vector p = theta;
    for (auto [axis, amount] : moves) p(axis) += amount;
    return p;
  };

  MetricDerivatives<Scalar> out;
  if (field.analytic_first()) {
    out.first = field.analytic_first()(theta);
  } else {
    out.first = Tensor3<Scalar>(m, m, m);
    for (int l = 0; l < m; ++l) {
      const auto plus = eval_at(shifted({{l, h[l]}}));
      const auto minus = eval_at(shifted({{l, -h[l]}}));
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) out.first(i, j, l) = (plus(i, j) - minus(i, j)) / (2 * h[l]);
    }
  }
  if (order == 1) return out;

  if (field.analytic_second()) {
    out.second = field.analytic_second()(theta);
    return out;
  }
  Tensor4<Scalar> second(m, m, m, m);
  for (int k = 0; k < m; ++k) {
    for (int l = k; l < m; ++l) {
      const auto pp = eval_at(shifted({{k, h[k]}, {l, h[l]}}));
      const auto pm = eval_at(shifted({{k, h[k]}, {l, -h[l]}}));
      const auto mp = eval_at(shifted({{k, -h[k]}, {l, h[l]}}));
      const auto mm = eval_at(shifted({{k, -h[k]}, {l, -h[l]}}));
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
          const Scalar v = (pp(i, j) - pm(i, j) - mp(i, j) + mm(i, j)) / (4 * h[k] * h[l]);
          second(i, j, k, l) = v;
          second(i, j, l, k) = v;
        }
      }
    }
  }
  out.second = std::move(second);
  return out;
}

/// Inverse metric; rejects non-positive-definite or ill-conditioned (> 1e12) metrics.
template <typename Scalar>
MatrixX<Scalar> inverse_metric(const MatrixX<Scalar>& g) {
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> eig(g, Eigen::EigenvaluesOnly);
  const Scalar lo = eig.eigenvalues().minCoeff();
  const Scalar hi = eig.eigenvalues().maxCoeff();
  if (!(lo > Scalar(0))) throw NotPositiveDefiniteError("metric is not positive definite");
  if (hi / lo > Scalar(1e12)) throw SingularMetricError("metric condition number exceeds 1e12");
  Eigen::LDLT<MatrixX<Scalar>> ldlt(g);
  return ldlt.solve(MatrixX<Scalar>::Identity(g.rows(), g.cols()));
}

/// Levi-Civita connection from a metric and its first derivatives:
/// Γ^k_ij = ½ g^{km} (∂_j g_mi + ∂_i g_mj − ∂_m g_ij).
template <typename Scalar>
Tensor3<Scalar> christoffel_from(const MatrixX<Scalar>& g_inv, const Tensor3<Scalar>& dg) {
  const int m = static_cast<int>(g_inv.rows());
  Tensor3<Scalar> gamma(m, m, m);
  for (int k = 0; k < m; ++k) {
    for (int i = 0; i < m; ++i) {
      for (int j = i; j < m; ++j) {
        Scalar acc(0);
        for (int a = 0; a < m; ++a) {
          acc += g_inv(k, a) * (dg(a, i, j) + dg(a, j, i) - dg(i, j, a));
        }
        gamma(k, i, j) = gamma(k, j, i) = acc / 2;
      }
    }
  }
  return gamma;
}

template <typename Scalar>
Tensor3<Scalar> christoffel(const MetricField<Scalar>& field, const VectorX<Scalar>& theta) {
  const auto d = metric_derivatives(field, theta, 1);
  return christoffel_from(inverse_metric<Scalar>(field(theta)), d.first);
}

/// R_iklm = ½(g_im,kl + g_kl,im − g_il,km − g_km,il) + g_np(Γ^n_kl Γ^p_im − Γ^n_km Γ^p_il).
template <typename Scalar>
Tensor4<Scalar> riemann_from(const MatrixX<Scalar>& g, const Tensor3<Scalar>& gamma,
                             const Tensor4<Scalar>& d2g) {
  const int m = static_cast<int>(g.rows());
  Tensor4<Scalar> R(m, m, m, m);
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < m; ++k)
      for (int l = 0; l < m; ++l)
        for (int q = 0; q < m; ++q) {
          Scalar second = (d2g(i, q, k, l) + d2g(k, l, i, q) - d2g(i, l, k, q) - d2g(k, q, i, l)) / 2;
          Scalar quad(0);
          for (int n = 0; n < m; ++n)
            for (int p = 0; p < m; ++p)
              quad += g(n, p) * (gamma(n, k, l) * gamma(p, i, q) - gamma(n, k, q) * gamma(p, i, l));
          R(i, k, l, q) = second + quad;
        }
  return R;
}

/// R_ik = g^{lm} R_limk.
template <typename Scalar>
MatrixX<Scalar> ricci_from(const MatrixX<Scalar>& g_inv, const Tensor4<Scalar>& R) {
  const int m = static_cast<int>(g_inv.rows());
  MatrixX<Scalar> ric = MatrixX<Scalar>::Zero(m, m);
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < m; ++k)
      for (int l = 0; l < m; ++l)
        for (int q = 0; q < m; ++q) ric(i, k) += g_inv(l, q) * R(l, i, q, k);
  return ric;
}

template <typename Scalar>
Scalar scalar_from(const MatrixX<Scalar>& g_inv, const MatrixX<Scalar>& ric) {
  return (g_inv.array() * ric.array()).sum();
}

template <typename Scalar>
struct GeometryReport {
  VectorX<Scalar> at;
  MatrixX<Scalar> metric;
  Tensor3<Scalar> christoffel;
  Tensor4<Scalar> riemann;
  MatrixX<Scalar> ricci;
  Scalar scalar;
};

/// Everything curvature-related at θ, from one derivative pass.
template <typename Scalar>
GeometryReport<Scalar> geometry(const MetricField<Scalar>& field, const VectorX<Scalar>& theta) {
  const auto d = metric_derivatives(field, theta, 2);
  GeometryReport<Scalar> rep;
  rep.at = theta;
  rep.metric = field(theta);
  const MatrixX<Scalar> g_inv = inverse_metric<Scalar>(rep.metric);
  rep.christoffel = christoffel_from(g_inv, d.first);
  rep.riemann = riemann_from(rep.metric, rep.christoffel, *d.second);
  rep.ricci = ricci_from(g_inv, rep.riemann);
  rep.scalar = scalar_from(g_inv, rep.ricci);
  return rep;
}

template <typename Scalar>
Tensor4<Scalar> riemann(const MetricField<Scalar>& field, const VectorX<Scalar>& theta) {
  return geometry(field, theta).riemann;
}

template <typename Scalar>
MatrixX<Scalar> ricci(const MetricField<Scalar>& field, const VectorX<Scalar>& theta) {
  return geometry(field, theta).ricci;
}

template <typename Scalar>
Scalar scalar_curvature(const MetricField<Scalar>& field, const VectorX<Scalar>& theta) {
  return geometry(field, theta).scalar;
}

}  // namespace igeom
