#pragma once

#include <algorithm>
#include <cmath>
#include <type_traits>
#include <vector>

#include "igeom/types.hpp"

namespace igeom {

/// One-dimensional Gauss–Hermite rule for the weight e^{-t^2}.
///
/// `scaled_weights` hold w_i e^{t_i^2}; integrating an arbitrary g over the
/// real line is then sum_i scaled_weights[i] * g(t_i), which stays accurate at
/// high order where the raw weights underflow.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> scaled_weights;
};

/// Rule of the given order. Cached per order; safe to call concurrently.
const GaussHermiteRule& gauss_hermite(int order);

/// Affine frame the integrand is expressed in: x = mean + L u with L L^T =
/// covariance. Gaussian-dominated integrands should pass their own mean and
/// covariance so the rule lands on the mass.
struct GaussianReference {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;

  int dim() const { return static_cast<int>(mean.size()); }
  static GaussianReference standard(int dim);
  static GaussianReference diagonal(const Eigen::VectorXd& mean, const Eigen::VectorXd& variances);
};

enum class QuadratureKind { GaussHermite, Rectangle };

struct QuadratureSpec {
  QuadratureKind kind = QuadratureKind::GaussHermite;
  int order = 64;
  /// Half-width of the rectangle-rule box, in reference standard deviations.
  double box_sigmas = 8.0;
  /// Relative tolerance on the order-halving error estimate; <= 0 disables the check.
  double tolerance = 1e-8;
  bool estimate_error = true;
};

template <typename Value>
struct QuadratureResult {
  Value value;
  double error_estimate = 0.0;
};

namespace detail {

struct Frame {
  Eigen::VectorXd mean;
  Eigen::MatrixXd factor;
  double jacobian;
};

Frame whitening_frame(const GaussianReference& ref);

inline double magnitude(double v) { return std::abs(v); }
template <typename Derived>
double magnitude(const Eigen::MatrixBase<Derived>& v) {
  return v.cwiseAbs().maxCoeff();
}

template <typename Value>
Value zero_like(const Value& sample) {
  if constexpr (std::is_arithmetic_v<Value>) {
    return Value(0);
  } else {
    return Value::Zero(sample.rows(), sample.cols());
  }
}

template <typename Value, typename F>
Value tensor_rule(F& f, const Frame& frame, const std::vector<double>& nodes,
                  const std::vector<double>& weights) {
  const int dim = static_cast<int>(frame.mean.size());
  const int n = static_cast<int>(nodes.size());
  std::vector<int> idx(dim, 0);
  Eigen::VectorXd u(dim);
  Eigen::VectorXd x(dim);
  bool first = true;
  Value acc{};
  while (true) {
    double w = 1.0;
    for (int d = 0; d < dim; ++d) {
      u(d) = nodes[idx[d]];
      w *= weights[idx[d]];
    }
    x.noalias() = frame.mean + frame.factor * u;
    if (w != 0.0) {
      Value term = f(static_cast<const Eigen::VectorXd&>(x));
      if (first) {
        acc = zero_like(term);
        first = false;
      }
      acc += w * term;
    }
    int d = 0;
    while (d < dim && ++idx[d] == n) {
      idx[d] = 0;
      ++d;
    }
    if (d == dim) break;
  }
  return acc * frame.jacobian;
}

template <typename Value, typename F>
Value apply_rule(F& f, const Frame& frame, const QuadratureSpec& spec, int order) {
  if (spec.kind == QuadratureKind::GaussHermite) {
    const auto& rule = gauss_hermite(order);
    std::vector<double> nodes(rule.nodes.size());
    std::vector<double> weights(rule.nodes.size());
    // x = mean + L * sqrt(2) t
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      nodes[i] = std::sqrt(2.0) * rule.nodes[i];
      weights[i] = std::sqrt(2.0) * rule.scaled_weights[i];
    }
    return tensor_rule<Value>(f, frame, nodes, weights);
  }
  std::vector<double> nodes(order);
  std::vector<double> weights(order, 2.0 * spec.box_sigmas / order);
  for (int i = 0; i < order; ++i) {
    nodes[i] = -spec.box_sigmas + (i + 0.5) * 2.0 * spec.box_sigmas / order;
  }
  return tensor_rule<Value>(f, frame, nodes, weights);
}

}  // namespace detail

/// Integrates f over R^d in the frame of `ref`.
///
/// `f` maps an Eigen::VectorXd to a double or a fixed-shape Eigen matrix.
/// Throws ConvergenceError when the order-halving estimate exceeds
/// spec.tolerance * max(1, |value|).
template <typename F>
auto integrate(F&& f, const GaussianReference& ref, const QuadratureSpec& spec = {}) {
  using Value = std::decay_t<decltype(f(std::declval<const Eigen::VectorXd&>()))>;
  if (spec.order < 2) throw DomainError("quadrature order must be at least 2");
  const detail::Frame frame = detail::whitening_frame(ref);
  QuadratureResult<Value> out{detail::apply_rule<Value>(f, frame, spec, spec.order), 0.0};
  if (spec.estimate_error) {
    const Value coarse = detail::apply_rule<Value>(f, frame, spec, std::max(1, spec.order / 2));
    out.error_estimate = detail::magnitude(out.value - coarse);
    const double scale = std::max(1.0, detail::magnitude(out.value));
    if (spec.tolerance > 0.0 && !(out.error_estimate <= spec.tolerance * scale)) {
      throw ConvergenceError("quadrature did not converge: error estimate " +
                             std::to_string(out.error_estimate));
    }
  }
  return out;
}

/// One-dimensional convenience wrapper over `integrate`.
template <typename F>
QuadratureResult<double> integrate_1d(F&& f, double center, double scale,
                                      const QuadratureSpec& spec = {}) {
  GaussianReference ref{Eigen::VectorXd::Constant(1, center),
                        Eigen::MatrixXd::Constant(1, 1, scale * scale)};
  return integrate([&](const Eigen::VectorXd& x) { return static_cast<double>(f(x(0))); }, ref,
                   spec);
}

}  // namespace igeom
