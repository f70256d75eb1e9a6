#include "igeom/igeh.hpp"

#include <algorithm>
#include <numbers>

namespace igeom {

TestFunction gaussian_bump(double center, double width, double height) {
  if (!(width > 0.0)) throw DomainError("bump width must be positive");
  if (!(height != 0.0) || !std::isfinite(height)) throw DomainError("bump height must be finite and non-zero");
  TestFunction t;
  t.f = [=](double x) {
    const double d = (x - center) / width;
    return height * std::exp(-0.5 * d * d);
  };
  t.l1_norm = std::abs(height) * width * std::sqrt(2.0 * std::numbers::pi);
  t.label = "bump(" + std::to_string(center) + "," + std::to_string(width) + ")";
  t.center = center;
  t.width = width;
  return t;
}

TestFunction unit_l1_bump(double center, double width) {
  if (!(width > 0.0)) throw DomainError("bump width must be positive");
  TestFunction t = gaussian_bump(center, width, 1.0 / (width * std::sqrt(2.0 * std::numbers::pi)));
  t.l1_norm = 1.0;
  return t;
}

double l1_norm_numeric(const std::function<double(double)>& f, double center, double scale,
                       double box, int points) {
  if (!(scale > 0.0) || points < 2) throw DomainError("invalid L1 quadrature box");
  const double lo = center - box * scale;
  const double h = 2.0 * box * scale / points;
  double acc = 0.0;
  for (int i = 0; i < points; ++i) acc += std::abs(f(lo + (i + 0.5) * h));
  return acc * h;
}

TestFunctionSet::TestFunctionSet(std::vector<TestFunction> fs) : fs_(std::move(fs)) {
  for (const auto& t : fs_) {
    if (!t.f) throw DomainError("test function is empty");
    if (!(t.l1_norm > 0.0) || !std::isfinite(t.l1_norm))
      throw DomainError("test function L1 norm must be finite and positive");
  }
}

std::vector<double> TestFunctionSet::l1_norms() const {
  std::vector<double> out;
  out.reserve(fs_.size());
  for (const auto& t : fs_) out.push_back(t.l1_norm);
  return out;
}

double TestFunctionSet::product_l1() const {
  double p = 1.0;
  for (const auto& t : fs_) p *= t.l1_norm;
  return p;
}

TestFunctionSet default_test_functions(const GaussianReference& ref) {
  std::vector<TestFunction> fs;
  for (int i = 0; i < ref.dim(); ++i) {
    fs.push_back(unit_l1_bump(ref.mean(i), std::sqrt(ref.covariance(i, i))));
  }
  return TestFunctionSet(std::move(fs));
}

double JointDensity::product_of_marginals(const Eigen::VectorXd& x) const {
  double p = 1.0;
  for (int i = 0; i < dim(); ++i) p *= marginals[i](x(i));
  return p;
}

GaussianReference envelope_frame(const GaussianReference& ref, const TestFunctionSet& fs) {
  const int n = ref.dim();
  if (fs.size() != static_cast<std::size_t>(n)) throw DomainError("one test function per coordinate is required");
  const Eigen::MatrixXd ref_precision = ref.covariance.inverse();
  Eigen::MatrixXd precision = ref_precision;
  Eigen::VectorXd shift = ref_precision * ref.mean;
  for (int i = 0; i < n; ++i) {
    if (!fs[i].has_envelope()) continue;
    const double p = 1.0 / (fs[i].width * fs[i].width);
    precision(i, i) += p;
    shift(i) += p * fs[i].center;
  }
  Eigen::MatrixXd cov = precision.inverse();
  cov = (0.5 * (cov + cov.transpose())).eval();
  return {cov * shift, cov};
}

JointDensity joint_at(const ModelFamily& model, const ParameterPoint& theta) {
  model.check(theta);
  if (!model.marginal) throw DomainError(model.name + ": model has no marginal densities");
  JointDensity d;
  d.joint = [model, theta](const Eigen::VectorXd& x) { return model.density(x, theta); };
  for (int i = 0; i < model.micro_dim; ++i) {
    d.marginals.push_back([model, theta, i](double xi) { return model.marginal(i, xi, theta); });
  }
  d.reference = model.integration_reference(theta);
  return d;
}

JointDensity joint_of(const MultivariateGaussian<double>& g) {
  JointDensity d;
  d.joint = [g](const Eigen::VectorXd& x) { return g.pdf(x); };
  for (int i = 0; i < g.dim(); ++i) {
    const auto m = g.marginal(i);
    d.marginals.push_back([m](double xi) { return m.pdf(xi); });
  }
  d.reference = g.reference();
  return d;
}

JointDensity joint_of(const Correlated2DParams& p) {
  p.validate();
  JointDensity d;
  d.joint = [p](const Eigen::VectorXd& x) { return pdf_2d(x(0), x(1), p); };
  const auto [m1, m2] = marginals_2d(p);
  d.marginals = {[m1](double x) { return m1.pdf(x); }, [m2](double y) { return m2.pdf(y); }};
  d.reference = {p.mean(), p.covariance()};
  return d;
}

double ig_correlation(const JointDensity& density, const TestFunctionSet& fs,
                      const QuadratureSpec& spec) {
  const int n = density.dim();
  if (n < 2) throw DomainError("IG correlation needs at least two microvariables");
  if (fs.size() != static_cast<std::size_t>(n) || density.marginals.size() != fs.size())
    throw DomainError("one test function and one marginal per microvariable are required");

  const auto joint = integrate(
      [&](const Eigen::VectorXd& x) {
        double v = density.joint(x);
        for (int i = 0; i < n && v != 0.0; ++i) v *= fs[i](x(i));
        return v;
      },
      envelope_frame(density.reference, fs), spec);

  double product = 1.0;
  for (int i = 0; i < n; ++i) {
    const GaussianReference marginal_ref{density.reference.mean.segment(i, 1),
                                         density.reference.covariance.block(i, i, 1, 1)};
    const auto frame = envelope_frame(marginal_ref, TestFunctionSet({fs[i]}));
    const double mean = frame.mean(0);
    const double sd = std::sqrt(frame.covariance(0, 0));
    product *= integrate_1d([&](double xi) { return density.marginals[i](xi) * fs[i](xi); }, mean,
                            sd, spec)
                   .value;
  }
  return joint.value - product;
}

double ig_correlation(const ModelFamily& model, const TestFunctionSet& fs,
                      const ParameterPoint& theta, const QuadratureSpec& spec) {
  return ig_correlation(joint_at(model, theta), fs, spec);
}

double marginal_consistency_error(const JointDensity& density, int i, std::span<const double> points,
                                  const QuadratureSpec& spec) {
  const int n = density.dim();
  if (i < 0 || i >= n) throw DomainError("marginal index out of range");
  if (n < 2) throw DomainError("marginal check needs at least two microvariables");
  const auto& c = density.reference.covariance;
  const auto& mu = density.reference.mean;

  std::vector<int> rest;
  for (int j = 0; j < n; ++j)
    if (j != i) rest.push_back(j);
  const int k = n - 1;
  Eigen::VectorXd c_ri(k);
  Eigen::MatrixXd c_rr(k, k);
  for (int a = 0; a < k; ++a) {
    c_ri(a) = c(rest[a], i);
    for (int b = 0; b < k; ++b) c_rr(a, b) = c(rest[a], rest[b]);
  }
  const Eigen::MatrixXd cond_cov = c_rr - c_ri * c_ri.transpose() / c(i, i);

  double worst = 0.0;
  for (double xi : points) {
    Eigen::VectorXd cond_mean(k);
    for (int a = 0; a < k; ++a) cond_mean(a) = mu(rest[a]) + c_ri(a) / c(i, i) * (xi - mu(i));
    const auto res = integrate(
        [&](const Eigen::VectorXd& y) {
          Eigen::VectorXd x(n);
          x(i) = xi;
          for (int a = 0; a < k; ++a) x(rest[a]) = y(a);
          return density.joint(x);
        },
        GaussianReference{cond_mean, cond_cov}, spec);
    worst = std::max(worst, std::abs(res.value - density.marginals[i](xi)));
  }
  return worst;
}

SupResult distinguishability_F_numeric(const Correlated2DParams& p, const SupSearchOptions& options) {
  const JointDensity d = joint_of(p);
  // Search in the frame of the product of marginals, which contains the joint's support.
  Eigen::Vector2d var(p.sigma * p.sigma, p.sigma_y() * p.sigma_y());
  const GaussianReference frame = GaussianReference::diagonal(p.mean(), var);
  return sup_abs([&](const Eigen::VectorXd& x) { return d.joint(x) - d.product_of_marginals(x); },
                 frame, options);
}

double correlation_upper_bound(double F_value, const TestFunctionSet& fs) {
  if (!(F_value >= 0.0)) throw DomainError("distinguishability must be non-negative");
  return F_value * fs.product_l1();
}

double mvn_ig_correlation(const MultivariateGaussian<double>& g, const TestFunctionSet& fs,
                          const QuadratureSpec& spec) {
  return ig_correlation(joint_of(g), fs, spec);
}

BoundResult mvn_upper_bound(const MultivariateGaussian<double>& g, const TestFunctionSet& fs,
                            const SupSearchOptions& options) {
  if (fs.size() != static_cast<std::size_t>(g.dim()))
    throw DomainError("one test function per microvariable is required");
  const JointDensity d = joint_of(g);
  const GaussianReference frame =
      GaussianReference::diagonal(g.mean(), g.covariance().diagonal());
  const SupResult sup = sup_abs(
      [&](const Eigen::VectorXd& x) { return d.joint(x) - d.product_of_marginals(x); }, frame,
      options);
  return {sup.value, sup.value * fs.product_l1(), sup.argmax, sup.converged};
}

void CorrelationTrace::push(double t, double value) {
  if (!tau.empty() && !(t > tau.back())) throw DomainError("trace tau must be strictly increasing");
  tau.push_back(t);
  c.push_back(value);
}

std::string to_string(IgehLevel level) {
  switch (level) {
    case IgehLevel::Bernoulli: return "Bernoulli";
    case IgehLevel::Mixing: return "Mixing";
    case IgehLevel::Ergodic: return "Ergodic";
    case IgehLevel::Unclassified: break;
  }
  return "Unclassified";
}

IgehClass classify(const CorrelationTrace& trace, double tol, double tail_fraction) {
  const std::size_t n = trace.size();
  if (trace.c.size() != n) throw DomainError("trace tau and c lengths differ");
  if (n < 16) throw DomainError("classification needs at least 16 samples");
  if (!(tail_fraction > 0.0 && tail_fraction < 1.0)) throw DomainError("tail_fraction must lie in (0, 1)");
  if (!(tol >= 0.0)) throw DomainError("tolerance must be non-negative");
  for (std::size_t k = 1; k < n; ++k)
    if (!(trace.tau[k] > trace.tau[k - 1])) throw DomainError("trace tau must be strictly increasing");

  IgehEvidence ev;
  const auto tail_count = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(n))));
  ev.tail_start = n - std::min(tail_count, n - 1);

  for (std::size_t k = 0; k < n; ++k) ev.max_abs = std::max(ev.max_abs, std::abs(trace.c[k]));
  double tail_sum = 0.0;
  for (std::size_t k = ev.tail_start; k < n; ++k) {
    tail_sum += std::abs(trace.c[k]);
    ev.tail_max_abs = std::max(ev.tail_max_abs, std::abs(trace.c[k]));
  }
  ev.tail_mean_abs = tail_sum / static_cast<double>(n - ev.tail_start);

  double integral = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    integral += 0.5 * (trace.c[k] + trace.c[k - 1]) * (trace.tau[k] - trace.tau[k - 1]);
    if (k >= ev.tail_start) {
      const double avg = integral / (trace.tau[k] - trace.tau[0]);
      ev.cesaro_tail_max = std::max(ev.cesaro_tail_max, std::abs(avg));
    }
  }

  ev.bernoulli_test = ev.max_abs <= tol;
  ev.mixing_test = ev.tail_mean_abs <= tol && ev.tail_max_abs <= 3.0 * tol;
  ev.ergodic_test = ev.cesaro_tail_max <= tol;

  IgehClass out;
  out.evidence = ev;
  if (ev.bernoulli_test) out.level = IgehLevel::Bernoulli;
  else if (ev.mixing_test) out.level = IgehLevel::Mixing;
  else if (ev.ergodic_test) out.level = IgehLevel::Ergodic;
  return out;
}

}  // namespace igeom
