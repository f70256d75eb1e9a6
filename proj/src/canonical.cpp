#include "igeom/canonical.hpp"

#include <map>
#include <memory>
#include <mutex>

#include "igeom/parallel.hpp"

namespace igeom {

void QuadraticHamiltonian::validate() const {
  const int d = phase_dim();
  if (n < 1) throw DomainError("Hamiltonian needs at least one degree of freedom");
  if (equilibrium.size() != d || hessian.rows() != d || hessian.cols() != d)
    throw DomainError("Hamiltonian shapes do not match phase dimension 2n");
  if (!equilibrium.allFinite() || !hessian.allFinite()) throw DomainError("Hamiltonian has non-finite entries");
  const double scale = std::max(1.0, hessian.cwiseAbs().maxCoeff());
  if ((hessian - hessian.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw DomainError("Hessian is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(hessian);
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefiniteError("Hessian is not positive definite; no canonical Gaussian exists");
}

double QuadraticHamiltonian::energy(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd d = x - equilibrium;
  return 0.5 * d.dot(hessian * d);
}

void HeatBath::validate() const {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) throw DomainError("temperature must be positive");
  if (!(kB > 0.0) || !std::isfinite(kB)) throw DomainError("kB must be positive");
}

void OscillatorPair::validate() const {
  if (!(m1 > 0.0 && m2 > 0.0)) throw DomainError("masses must be positive");
  if (!(omega1 > 0.0 && omega2 > 0.0)) throw DomainError("frequencies must be positive");
  if (!(T0 > 0.0)) throw DomainError("reference temperature must be positive");
  if (!(kB > 0.0)) throw DomainError("kB must be positive");
  if (!std::isfinite(q10)) throw DomainError("q10 must be finite");
  if (!(std::abs(r) < 1.0)) throw DomainError("coupling |r| must be below 1 for a confining potential");
}

double OscillatorPair::sigma_c() const {
  return std::sqrt(kB * T0 / (std::sqrt(m1 * m2) * omega1 * omega2));
}

double OscillatorPair::sigma() const { return std::sqrt(kB * T0 / (m1 * omega1 * omega1)); }

double OscillatorPair::coupling() const { return r * std::sqrt(m1 * m2) * omega1 * omega2; }

double OscillatorPair::potential(double q1, double q2) const {
  const double d1 = q1 - q10;
  return 0.5 * m1 * omega1 * omega1 * d1 * d1 + 0.5 * m2 * omega2 * omega2 * q2 * q2 -
         coupling() * d1 * q2;
}

double OscillatorPair::energy(const Eigen::VectorXd& phase) const {
  if (phase.size() != 4) throw DomainError("pair phase point is (q1, q2, p1, p2)");
  return potential(phase(0), phase(1)) + phase(2) * phase(2) / (2 * m1) + phase(3) * phase(3) / (2 * m2);
}

QuadraticHamiltonian OscillatorPair::position_hamiltonian() const {
  validate();
  QuadraticHamiltonian h;
  h.n = 1;
  h.equilibrium = Eigen::Vector2d(q10, 0.0);
  h.hessian.resize(2, 2);
  h.hessian << m1 * omega1 * omega1, -coupling(), -coupling(), m2 * omega2 * omega2;
  return h;
}

QuadraticHamiltonian OscillatorPair::hamiltonian() const {
  const QuadraticHamiltonian pos = position_hamiltonian();
  QuadraticHamiltonian h;
  h.n = 2;
  h.equilibrium = Eigen::Vector4d(q10, 0.0, 0.0, 0.0);
  h.hessian = Eigen::MatrixXd::Zero(4, 4);
  h.hessian.topLeftCorner(2, 2) = pos.hessian;
  h.hessian(2, 2) = 1.0 / m1;
  h.hessian(3, 3) = 1.0 / m2;
  return h;
}

Eigen::MatrixXd hessian_of_energy(const std::function<double(const Eigen::VectorXd&)>& E,
                                  const Eigen::VectorXd& point, double asymmetry_tol) {
  const int d = static_cast<int>(point.size());
  if (d == 0) throw DomainError("empty phase point");
  Eigen::VectorXd h(d);
  for (int i = 0; i < d; ++i) h(i) = 1e-4 * std::max(1.0, std::abs(point(i)));

  auto inner = [&](const Eigen::VectorXd& y, int j) {
    Eigen::VectorXd up = y, down = y;
    up(j) += h(j);
    down(j) -= h(j);
    return (E(up) - E(down)) / (2 * h(j));
  };
  // Outer step differs from the inner one, so H_ij and H_ji sample distinct stencils.
  auto mixed = [&](int i, int j) {
    const double ho = 1.5 * h(i);
    Eigen::VectorXd up = point, down = point;
    up(i) += ho;
    down(i) -= ho;
    return (inner(up, j) - inner(down, j)) / (2 * ho);
  };

  Eigen::MatrixXd raw(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) raw(i, j) = mixed(i, j);
  if (!raw.allFinite()) throw NumericalDerivativeError("energy Hessian is not finite");
  const double scale = std::max(1.0, raw.cwiseAbs().maxCoeff());
  if ((raw - raw.transpose()).cwiseAbs().maxCoeff() > asymmetry_tol * scale)
    throw NumericalDerivativeError("energy Hessian is asymmetric; E is not smooth at the point");
  return 0.5 * (raw + raw.transpose());
}

MultivariateGaussian<double> canonical_to_gaussian(const QuadraticHamiltonian& h, const HeatBath& bath) {
  h.validate();
  bath.validate();
  Eigen::MatrixXd cov = (bath.beta() * h.hessian).llt().solve(Eigen::MatrixXd::Identity(h.phase_dim(), h.phase_dim()));
  cov = 0.5 * (cov + cov.transpose());
  return {h.equilibrium, cov};
}

LawCheck covariance_hessian_law(const QuadraticHamiltonian& h, const HeatBath& bath) {
  const auto g = canonical_to_gaussian(h, bath);
  return {g.covariance().determinant() * h.hessian.determinant(), std::pow(bath.kT(), h.phase_dim())};
}

Eigen::VectorXd CanonicalSystem::dE_dtheta(const Eigen::VectorXd& x, const ParameterPoint& theta) const {
  if (energy_grad_theta) return energy_grad_theta(x, theta);
  Eigen::VectorXd grad(param_dim);
  for (int i = 0; i < param_dim; ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(theta(i)));
    ParameterPoint up = theta, down = theta;
    up(i) += h;
    down(i) -= h;
    grad(i) = (energy(x, up) - energy(x, down)) / (2 * h);
  }
  return grad;
}

CanonicalSystem quadratic_system(const QuadraticHamiltonian& h) {
  h.validate();
  CanonicalSystem sys;
  sys.phase_dim = h.phase_dim();
  sys.param_dim = 0;
  sys.energy = [h](const Eigen::VectorXd& x, const ParameterPoint&) { return h.energy(x); };
  sys.reference = [h](const ParameterPoint&, const HeatBath& bath) {
    return GaussianReference::diagonal(h.equilibrium, bath.kT() * h.hessian.diagonal().cwiseInverse());
  };
  return sys;
}

CanonicalSystem oscillator_1d_system(double m, double omega) {
  if (!(m > 0.0 && omega > 0.0)) throw DomainError("mass and frequency must be positive");
  const double k = m * omega * omega;
  CanonicalSystem sys;
  sys.phase_dim = 2;
  sys.param_dim = 1;
  sys.energy = [m, k](const Eigen::VectorXd& x, const ParameterPoint& th) {
    const double d = x(0) - th(0);
    return 0.5 * k * d * d + x(1) * x(1) / (2 * m);
  };
  sys.energy_grad_theta = [k](const Eigen::VectorXd& x, const ParameterPoint& th) {
    return Eigen::VectorXd::Constant(1, -k * (x(0) - th(0)));
  };
  sys.reference = [m, k](const ParameterPoint& th, const HeatBath& bath) {
    return GaussianReference::diagonal(Eigen::Vector2d(th(0), 0.0),
                                       Eigen::Vector2d(bath.kT() / k, m * bath.kT()));
  };
  return sys;
}

CanonicalSystem stiffness_system() {
  CanonicalSystem sys;
  sys.phase_dim = 1;
  sys.param_dim = 1;
  sys.energy = [](const Eigen::VectorXd& x, const ParameterPoint& th) { return 0.5 * th(0) * x(0) * x(0); };
  sys.energy_grad_theta = [](const Eigen::VectorXd& x, const ParameterPoint&) {
    return Eigen::VectorXd::Constant(1, 0.5 * x(0) * x(0));
  };
  sys.reference = [](const ParameterPoint& th, const HeatBath& bath) {
    if (!(th(0) > 0.0)) throw DomainError("stiffness must be positive");
    return GaussianReference::diagonal(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, bath.kT() / th(0)));
  };
  return sys;
}

CanonicalSystem oscillator_position_system(const OscillatorPair& o) {
  o.validate();
  const double kT0 = o.kB * o.T0;
  const double c2 = o.sigma_c() * o.sigma_c();
  const double r = o.r;
  CanonicalSystem sys;
  sys.phase_dim = 2;
  sys.param_dim = 2;
  sys.energy = [=](const Eigen::VectorXd& x, const ParameterPoint& th) {
    const double d = x(0) - th(0);
    const double s = th(1);
    return 0.5 * kT0 * (d * d / (s * s) + x(1) * x(1) * s * s / (c2 * c2) - 2 * r * d * x(1) / c2);
  };
  sys.energy_grad_theta = [=](const Eigen::VectorXd& x, const ParameterPoint& th) {
    const double d = x(0) - th(0);
    const double s = th(1);
    Eigen::VectorXd g(2);
    g(0) = kT0 * (-d / (s * s) + r * x(1) / c2);
    g(1) = kT0 * (-d * d / (s * s * s) + x(1) * x(1) * s / (c2 * c2));
    return g;
  };
  sys.reference = [=](const ParameterPoint& th, const HeatBath& bath) {
    if (!(th(1) > 0.0)) throw DomainError("sigma must be positive");
    const double s = th(1);
    Eigen::Matrix2d precision;
    precision << 1.0 / (s * s), -r / c2, -r / c2, s * s / (c2 * c2);
    precision *= bath.beta() * kT0;
    return GaussianReference{Eigen::Vector2d(th(0), 0.0), precision.inverse()};
  };
  return sys;
}

namespace {

void check_system(const CanonicalSystem& sys, const ParameterPoint& theta) {
  if (!sys.energy || !sys.reference) throw DomainError("canonical system needs an energy and a reference");
  if (theta.size() != sys.param_dim) throw DomainError("parameter point has the wrong dimension");
}

double boltzmann(const CanonicalSystem& sys, const Eigen::VectorXd& x, const ParameterPoint& theta, double beta) {
  return std::exp(-beta * sys.energy(x, theta));
}

}  // namespace

double partition_function(const CanonicalSystem& sys, const ParameterPoint& theta, const HeatBath& bath,
                          const QuadratureSpec& spec) {
  check_system(sys, theta);
  bath.validate();
  const double beta = bath.beta();
  const double Z =
      integrate([&](const Eigen::VectorXd& x) { return boltzmann(sys, x, theta, beta); },
                sys.reference(theta, bath), spec)
          .value;
  if (!(Z > 0.0) || !std::isfinite(Z)) throw ConvergenceError("partition function is not finite and positive");
  return Z;
}

ModelFamily canonical_family(const CanonicalSystem& sys, const HeatBath& bath, const QuadratureSpec& spec) {
  bath.validate();
  struct ZCache {
    std::mutex mutex;
    std::map<std::vector<double>, double> values;
  };
  auto cache = std::make_shared<ZCache>();
  auto Z = [sys, bath, spec, cache](const ParameterPoint& th) {
    std::vector<double> key(th.data(), th.data() + th.size());
    {
      std::lock_guard lock(cache->mutex);
      if (auto it = cache->values.find(key); it != cache->values.end()) return it->second;
    }
    const double z = partition_function(sys, th, bath, spec);
    std::lock_guard lock(cache->mutex);
    cache->values.emplace(std::move(key), z);
    return z;
  };

  ModelFamily model;
  model.name = "canonical";
  model.micro_dim = sys.phase_dim;
  model.macro_dim = sys.param_dim;
  const double beta = bath.beta();
  model.density = [sys, beta, Z](const Eigen::VectorXd& x, const ParameterPoint& th) {
    return boltzmann(sys, x, th, beta) / Z(th);
  };
  model.integration_reference = [sys, bath](const ParameterPoint& th) { return sys.reference(th, bath); };
  return model;
}

CanonicalMoments canonical_moments(const CanonicalSystem& sys, const ParameterPoint& theta, const HeatBath& bath,
                                   const QuadratureSpec& spec) {
  check_system(sys, theta);
  bath.validate();
  const int d = sys.phase_dim;
  const double beta = bath.beta();
  const auto res = integrate(
      [&](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
        Eigen::VectorXd a(d + 1);
        a(0) = 1.0;
        a.tail(d) = x;
        return boltzmann(sys, x, theta, beta) * (a * a.transpose());
      },
      sys.reference(theta, bath), spec);
  const double Z = res.value(0, 0);
  if (!(Z > 0.0) || !std::isfinite(Z)) throw ConvergenceError("partition function is not finite and positive");
  CanonicalMoments m;
  m.mean = res.value.col(0).tail(d) / Z;
  m.covariance = res.value.bottomRightCorner(d, d) / Z - m.mean * m.mean.transpose();
  return m;
}

CanonicalFisher ce_fisher_metric(const CanonicalSystem& sys, const ParameterPoint& theta, const HeatBath& bath,
                                 const QuadratureSpec& spec) {
  check_system(sys, theta);
  bath.validate();
  const int m = sys.param_dim;
  const double beta = bath.beta();
  const auto res = integrate(
      [&](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
        Eigen::VectorXd a(m + 1);
        a(0) = 1.0;
        a.tail(m) = sys.dE_dtheta(x, theta);
        return boltzmann(sys, x, theta, beta) * (a * a.transpose());
      },
      sys.reference(theta, bath), spec);
  const double Z = res.value(0, 0);
  if (!(Z > 0.0) || !std::isfinite(Z)) throw ConvergenceError("partition function is not finite and positive");

  const Eigen::VectorXd mean = res.value.col(0).tail(m) / Z;
  const Eigen::MatrixXd second = res.value.bottomRightCorner(m, m) / Z;
  CanonicalFisher out;
  out.uncentered_form = beta * beta * second;
  out.general_form = beta * beta * (second - mean * mean.transpose());
  out.discrepancy = m == 0 ? 0.0 : (out.uncentered_form - out.general_form).cwiseAbs().maxCoeff();
  return out;
}

BoundResult ce_upper_bound(const QuadraticHamiltonian& h, const HeatBath& bath, const TestFunctionSet& fs,
                           const SupSearchOptions& options) {
  if (h.n != 1) throw DomainError("the canonical bound maximization is implemented for n = 1");
  return mvn_upper_bound(canonical_to_gaussian(h, bath), fs, options);
}

Correlated2DParams oscillator_reduce(const OscillatorPair& o, double T) {
  o.validate();
  if (!(T >= 0.0) || !std::isfinite(T)) throw DomainError("temperature must be non-negative");
  if (T > o.T0) throw DomainError("T > T0 maps outside |r| <= 1; extrapolation is not supported");
  const double magnitude = std::sqrt(1.0 - T / o.T0);
  return {o.q10, o.sigma(), o.r < 0.0 ? -magnitude : magnitude, o.sigma_c()};
}

Correlated2DParams oscillator_reduce(const OscillatorPair& o, const HeatBath& bath) {
  bath.validate();
  if (bath.kB != o.kB) throw DomainError("bath and oscillator pair use different kB");
  return oscillator_reduce(o, bath.temperature);
}

double temperature_to_tau(double T, double T0) {
  if (!(T0 > 0.0)) throw DomainError("reference temperature must be positive");
  if (!(T >= 0.0)) throw DomainError("temperature must be non-negative");
  if (!(T < T0)) throw DomainError("tau diverges at T = T0 and is undefined above");
  return 1.0 / (1.0 - T / T0);
}

double oscillator_curvature(double T, double T0) {
  if (!(T0 > 0.0)) throw DomainError("reference temperature must be positive");
  if (!(T >= 0.0 && T <= T0)) throw DomainError("curvature formula needs 0 <= T <= T0");
  return (0.0 - T) / (2.0 * T0);
}

TestFunctionSet oscillator_test_functions(const OscillatorPair& o) {
  const Correlated2DParams p = oscillator_reduce(o, o.T0);
  return TestFunctionSet({unit_l1_bump(p.mu_x, p.sigma), unit_l1_bump(0.0, p.sigma_y())});
}

OscillatorTrace oscillator_mixing_trace(const OscillatorPair& o, const std::vector<double>& T_schedule,
                                        const TestFunctionSet& fs, const TraceOptions& options) {
  o.validate();
  if (T_schedule.empty()) throw DomainError("temperature schedule is empty");
  if (fs.size() != 2) throw DomainError("the pair needs two test functions");
  bool use_tau = true;
  for (std::size_t k = 0; k < T_schedule.size(); ++k) {
    const double T = T_schedule[k];
    if (!(T > 0.0) || T > o.T0) throw DomainError("schedule temperatures must lie in (0, T0]");
    if (T >= o.T0 || (k > 0 && !(T > T_schedule[k - 1]))) use_tau = false;
  }

  struct Sample {
    double r = 0.0, c = 0.0, closed = 0.0, numeric = 0.0;
  };
  const double l1 = fs.product_l1();
  const auto samples = parallel_map(T_schedule.size(), options.jobs, [&](std::size_t k) {
    const Correlated2DParams p = oscillator_reduce(o, T_schedule[k]);
    Sample s;
    s.r = p.r;
    s.c = ig_correlation(joint_of(p), fs, options.spec);
    s.closed = distinguishability_F_closed(p.r) * l1;
    if (options.numeric_bound) s.numeric = distinguishability_F_numeric(p, options.sup).value * l1;
    return s;
  });

  // Quadrature noise floor for the r = 0 samples, where the bound is exactly 0.
  constexpr double floor = 1e-14;
  OscillatorTrace out;
  out.trace.meta = use_tau ? "tau = 1/(1 - T/T0)" : "tau = sample index";
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto& s = samples[k];
    out.trace.push(use_tau ? temperature_to_tau(T_schedule[k], o.T0) : static_cast<double>(k), s.c);
    out.temperature.push_back(T_schedule[k]);
    out.r_eff.push_back(s.r);
    out.envelope.push_back(std::abs(s.r) * l1);
    out.bound_closed.push_back(s.closed);
    if (options.numeric_bound) out.bound_numeric.push_back(s.numeric);
    const double ac = std::abs(s.c);
    if (ac > out.envelope.back() + floor) out.envelope_holds = false;
    if (ac > s.closed + floor || (options.numeric_bound && ac > s.numeric + floor)) out.bound_holds = false;
  }
  out.classification = classify(out.trace, options.tol, options.tail_fraction);
  return out;
}

GoeModel goe_model(double mu, double sigma, double r, double sigma_c) {
  GoeModel g;
  g.reduced = Correlated2DParams{mu, sigma, r, sigma_c};
  g.reduced.validate();
  g.off_diagonal_variance = sigma * sigma;

  const Correlated2DParams p = g.reduced;
  const UnivariateGaussian<double> off{0.0, sigma * sigma};
  const auto [m11, m22] = marginals_2d(p);
  g.joint.joint = [p, off](const Eigen::VectorXd& h) {
    return pdf_2d(h(0), h(1), p) * off.pdf(h(2)) * off.pdf(h(3));
  };
  g.joint.marginals = {[m11](double x) { return m11.pdf(x); }, [m22](double x) { return m22.pdf(x); },
                       [off](double x) { return off.pdf(x); }, [off](double x) { return off.pdf(x); }};
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(4, 4);
  cov.topLeftCorner(2, 2) = p.covariance();
  cov(2, 2) = cov(3, 3) = sigma * sigma;
  g.joint.reference = {Eigen::Vector4d(mu, 0.0, 0.0, 0.0), cov};
  return g;
}

std::vector<Eigen::VectorXd> goe_grid(const GoeModel& g, int per_axis, double half_width) {
  if (per_axis < 2) throw DomainError("grid needs at least two points per axis");
  const auto& ref = g.joint.reference;
  std::vector<Eigen::VectorXd> pts;
  Eigen::Vector4i idx = Eigen::Vector4i::Zero();
  const int total = per_axis * per_axis * per_axis * per_axis;
  pts.reserve(total);
  for (int flat = 0; flat < total; ++flat) {
    int rem = flat;
    Eigen::VectorXd x(4);
    for (int a = 0; a < 4; ++a) {
      idx(a) = rem % per_axis;
      rem /= per_axis;
      const double sd = std::sqrt(ref.covariance(a, a));
      x(a) = ref.mean(a) + sd * half_width * (2.0 * idx(a) / (per_axis - 1) - 1.0);
    }
    pts.push_back(std::move(x));
  }
  return pts;
}

double factorization_error(const JointDensity& d, const std::vector<Eigen::VectorXd>& points) {
  double worst = 0.0;
  for (const auto& x : points) worst = std::max(worst, std::abs(d.joint(x) - d.product_of_marginals(x)));
  return worst;
}

double goe_reduction_error(const GoeModel& g, int per_axis, const QuadratureSpec& spec) {
  if (per_axis < 2) throw DomainError("grid needs at least two points per axis");
  const Correlated2DParams& p = g.reduced;
  const GaussianReference off = GaussianReference::diagonal(
      Eigen::Vector2d::Zero(), Eigen::Vector2d::Constant(g.off_diagonal_variance));
  const double sx = p.sigma, sy = p.sigma_y();
  double worst = 0.0;
  for (int i = 0; i < per_axis; ++i) {
    for (int j = 0; j < per_axis; ++j) {
      const double h11 = p.mu_x + 3.0 * sx * (2.0 * i / (per_axis - 1) - 1.0);
      const double h22 = 3.0 * sy * (2.0 * j / (per_axis - 1) - 1.0);
      const double marg = integrate(
                              [&](const Eigen::VectorXd& o) {
                                return g.joint.joint(Eigen::Vector4d(h11, h22, o(0), o(1)));
                              },
                              off, spec)
                              .value;
      worst = std::max(worst, std::abs(marg - pdf_2d(h11, h22, p)));
    }
  }
  return worst;
}

GoeReport goe_report(double mu, double sigma, const std::vector<double>& r_grid, double tol, int jobs) {
  if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
  GoeReport rep;
  rep.rows = parallel_map(r_grid.size(), jobs, [&](std::size_t k) {
    GoeRow row;
    row.r = r_grid[k];
    row.R_closed = curvature_2d_closed(row.r);
    if (std::abs(row.r) < 1.0) {
      const auto field = metric_field_2d(row.r, sigma, false);
      row.R_numeric = scalar_curvature(field, Eigen::VectorXd(Eigen::Vector2d(mu, sigma)));
    } else {
      row.R_numeric = std::numeric_limits<double>::quiet_NaN();
    }
    row.r_min = std::abs(row.R_closed + 0.5) <= 1e-12;
    return row;
  });

  const GoeModel g = goe_model(mu, sigma, 0.0, sigma);
  rep.factorization_error = factorization_error(g.joint, goe_grid(g));
  QuadratureSpec spec;
  spec.order = 16;
  rep.correlation = ig_correlation(g.joint, default_test_functions(g.joint.reference), spec);
  // The ensemble is static in τ, so its trace is constant.
  CorrelationTrace trace;
  trace.meta = "static ensemble";
  for (int k = 0; k < 16; ++k) trace.push(k, rep.correlation);
  rep.classification = classify(trace, tol);
  return rep;
}

}  // namespace igeom
