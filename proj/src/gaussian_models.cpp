#include "igeom/gaussian_models.hpp"

namespace igeom {

ModelFamily correlated_2d_family(double r, double sigma_c) {
  Correlated2DParams{0.0, 1.0, r, sigma_c}.validate();
  auto params = [r, sigma_c](const ParameterPoint& th) {
    return Correlated2DParams{th(0), th(1), r, sigma_c};
  };

  ModelFamily model;
  model.name = "correlated-2d";
  model.micro_dim = 2;
  model.macro_dim = 2;
  model.density = [params](const Eigen::VectorXd& x, const ParameterPoint& th) {
    return pdf_2d(x(0), x(1), params(th));
  };
  model.log_density_grad = [r, sigma_c](const Eigen::VectorXd& x, const ParameterPoint& th) {
    const double one_m = 1.0 - r * r;
    const double c2 = sigma_c * sigma_c;
    const double dx = x(0) - th(0);
    const double s = th(1);
    Eigen::VectorXd g(2);
    g(0) = (dx / (s * s) - r * x(1) / c2) / one_m;
    g(1) = (dx * dx / (s * s * s) - x(1) * x(1) * s / (c2 * c2)) / one_m;
    return g;
  };
  model.domain = [](const ParameterPoint& th) { return th(1) > 0.0; };
  model.integration_reference = [params](const ParameterPoint& th) {
    const auto p = params(th);
    return GaussianReference{p.mean(), p.covariance()};
  };
  model.marginal = [params](int i, double xi, const ParameterPoint& th) {
    const auto [p1, p2] = marginals_2d(params(th));
    return i == 0 ? p1.pdf(xi) : p2.pdf(xi);
  };
  return model;
}

ModelFamily univariate_gaussian_family() {
  ModelFamily model;
  model.name = "univariate-gaussian";
  model.micro_dim = 1;
  model.macro_dim = 2;
  model.density = [](const Eigen::VectorXd& x, const ParameterPoint& th) {
    return UnivariateGaussian<double>{th(0), th(1) * th(1)}.pdf(x(0));
  };
  model.log_density_grad = [](const Eigen::VectorXd& x, const ParameterPoint& th) {
    const double d = x(0) - th(0);
    const double s = th(1);
    Eigen::VectorXd g(2);
    g(0) = d / (s * s);
    g(1) = d * d / (s * s * s) - 1.0 / s;
    return g;
  };
  model.domain = [](const ParameterPoint& th) { return th(1) > 0.0; };
  model.integration_reference = [](const ParameterPoint& th) {
    return GaussianReference{Eigen::VectorXd::Constant(1, th(0)),
                             Eigen::MatrixXd::Constant(1, 1, th(1) * th(1))};
  };
  model.marginal = [](int, double xi, const ParameterPoint& th) {
    return UnivariateGaussian<double>{th(0), th(1) * th(1)}.pdf(xi);
  };
  return model;
}

MultivariateGaussian<double> as_multivariate(const Correlated2DParams& p) {
  p.validate();
  return {p.mean(), p.covariance()};
}

}  // namespace igeom
