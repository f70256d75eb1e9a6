#include "igeom/manifold.hpp"

namespace igeom {

void ModelFamily::check(const ParameterPoint& theta) const {
  if (theta.size() != macro_dim) {
    throw DomainError(name + ": parameter point has dimension " + std::to_string(theta.size()) +
                      ", expected " + std::to_string(macro_dim));
  }
  if (!theta.allFinite() || (domain && !domain(theta))) {
    throw DomainError(name + ": parameter point outside the model domain");
  }
}

Eigen::VectorXd ModelFamily::score(const Eigen::VectorXd& x, const ParameterPoint& theta) const {
  if (log_density_grad) return log_density_grad(x, theta);
  Eigen::VectorXd grad(macro_dim);
  for (int i = 0; i < macro_dim; ++i) {
    const double h = default_step(theta(i));
    ParameterPoint up = theta, down = theta;
    up(i) += h;
    down(i) -= h;
    grad(i) = (std::log(density(x, up)) - std::log(density(x, down))) / (2 * h);
  }
  return grad;
}

QuadratureResult<double> normalization(const ModelFamily& model, const ParameterPoint& theta,
                                       const QuadratureSpec& spec) {
  model.check(theta);
  return integrate([&](const Eigen::VectorXd& x) { return model.density(x, theta); },
                   model.integration_reference(theta), spec);
}

QuadratureResult<Eigen::MatrixXd> fisher_metric(const ModelFamily& model,
                                                const ParameterPoint& theta,
                                                const QuadratureSpec& spec) {
  model.check(theta);
  const int m = model.macro_dim;
  auto integrand = [&](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
    const double p = model.density(x, theta);
    if (p == 0.0) return Eigen::MatrixXd::Zero(m, m);
    const Eigen::VectorXd s = model.score(x, theta);
    return p * (s * s.transpose());
  };
  auto result = integrate(integrand, model.integration_reference(theta), spec);
  result.value = (0.5 * (result.value + result.value.transpose())).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(result.value, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) {
    throw NotPositiveDefiniteError(model.name + ": Fisher metric is not positive definite");
  }
  return result;
}

MetricField<double> fisher_field(const ModelFamily& model, const QuadratureSpec& spec) {
  return MetricField<double>(
      model.macro_dim,
      [model, spec](const Eigen::VectorXd& theta) { return fisher_metric(model, theta, spec).value; },
      [model](const Eigen::VectorXd& theta) {
        return theta.size() == model.macro_dim && (!model.domain || model.domain(theta));
      },
      MetricSource::Quadrature);
}

}  // namespace igeom
