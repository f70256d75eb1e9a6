#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "igeom/canonical.hpp"

using namespace igeom;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

QuadraticHamiltonian diagonal_hamiltonian(std::initializer_list<double> diag) {
  QuadraticHamiltonian h;
  h.n = static_cast<int>(diag.size()) / 2;
  h.equilibrium = Eigen::VectorXd::Zero(diag.size());
  h.hessian = Eigen::VectorXd::Map(std::data(diag), diag.size()).asDiagonal();
  return h;
}

QuadraticHamiltonian random_hamiltonian(std::mt19937& rng, int n) {
  std::normal_distribution<double> n01;
  const int d = 2 * n;
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d * d; ++i) a(i) = n01(rng);
  QuadraticHamiltonian h;
  h.n = n;
  h.equilibrium = Eigen::VectorXd::NullaryExpr(d, [&] { return n01(rng); });
  h.hessian = a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(d, d);
  h.hessian = 0.5 * (h.hessian + h.hessian.transpose()).eval();
  return h;
}

std::vector<double> geometric_schedule(double T0, int k_max = 20) {
  std::vector<double> s;
  for (int k = 1; k <= k_max; ++k) s.push_back(T0 * (1.0 - std::ldexp(1.0, -k)));
  return s;
}

}  // namespace

TEST_CASE("energy Hessian by finite differences") {
  auto harmonic = [](const Eigen::VectorXd& x) { return 0.5 * x.squaredNorm(); };
  CHECK((hessian_of_energy(harmonic, Eigen::Vector2d::Zero()) - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-8);

  const OscillatorPair pair{2.0, 0.5, 1.5, 3.0, 0.7, 0.4, 1.0, 1.0};
  const Eigen::MatrixXd H = hessian_of_energy([&](const Eigen::VectorXd& x) { return pair.energy(x); },
                                              Eigen::Vector4d(0.7, 0.0, 0.0, 0.0));
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(4, 4);
  expected(0, 0) = 2.0 * 1.5 * 1.5;
  expected(1, 1) = 0.5 * 3.0 * 3.0;
  expected(0, 1) = expected(1, 0) = -0.4 * std::sqrt(2.0 * 0.5) * 1.5 * 3.0;
  expected(2, 2) = 0.5;
  expected(3, 3) = 2.0;
  CHECK((H - expected).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((pair.hamiltonian().hessian - expected).cwiseAbs().maxCoeff() < 1e-14);

  auto linear = [](const Eigen::VectorXd& x) { return 3.0 * x(0) - x(1); };
  const Eigen::MatrixXd zero = hessian_of_energy(linear, Eigen::Vector2d(1.0, 2.0));
  CHECK(zero.cwiseAbs().maxCoeff() < 1e-6);
  QuadraticHamiltonian flat{1, Eigen::Vector2d::Zero(), Eigen::Matrix2d::Zero()};
  CHECK_THROWS_AS(flat.validate(), NotPositiveDefiniteError);

  // Mixed partials of this function differ at the origin.
  auto kinked = [](const Eigen::VectorXd& x) {
    const double r2 = x(0) * x(0) + x(1) * x(1);
    return r2 == 0.0 ? 0.0 : x(0) * x(1) * (x(0) * x(0) - x(1) * x(1)) / r2;
  };
  CHECK_THROWS_AS(hessian_of_energy(kinked, Eigen::Vector2d::Zero()), NumericalDerivativeError);
}

TEST_CASE("quadratic Hamiltonian to Gaussian: covariance (beta H)^-1") {
  const auto id = canonical_to_gaussian(diagonal_hamiltonian({1.0, 1.0}), HeatBath{1.0});
  CHECK((id.covariance() - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-15);

  const auto h = diagonal_hamiltonian({2.0, 8.0});
  const auto g = canonical_to_gaussian(h, HeatBath{3.0});
  CHECK(g.covariance()(0, 0) == doctest::Approx(1.5));
  CHECK(g.covariance()(1, 1) == doctest::Approx(0.375));
  CHECK(g.determinant() == doctest::Approx(9.0 / 16.0));
  CHECK((h.G() - 0.5 * h.hessian).norm() == 0.0);

  const auto law = covariance_hessian_law(h, HeatBath{3.0});
  CHECK(law.lhs == doctest::Approx(9.0));
  CHECK(law.rhs == doctest::Approx(9.0));
  const auto unit = covariance_hessian_law(diagonal_hamiltonian({1.0, 1.0}), HeatBath{1.0});
  CHECK(unit.lhs == doctest::Approx(1.0));

  CHECK_THROWS_AS(canonical_to_gaussian(h, HeatBath{0.0}), DomainError);
  auto bad = h;
  bad.hessian(1, 1) = -1.0;
  CHECK_THROWS_AS(canonical_to_gaussian(bad, HeatBath{1.0}), NotPositiveDefiniteError);
}

TEST_CASE("covariance-Hessian law holds on random Hamiltonians") {
  std::mt19937 rng(31337);
  std::uniform_real_distribution<double> temp(0.1, 10.0);
  for (int n = 1; n <= 3; ++n)
    for (int trial = 0; trial < 100; ++trial) {
      const auto law = covariance_hessian_law(random_hamiltonian(rng, n), HeatBath{temp(rng), 1.380649e-2});
      CHECK(law.relative_error() <= 1e-10);
    }
}

TEST_CASE("quadrature-normalized canonical density equals the Gaussian pointwise") {
  QuadraticHamiltonian h;
  h.n = 1;
  h.equilibrium = Eigen::Vector2d(0.4, -0.2);
  h.hessian.resize(2, 2);
  h.hessian << 3.0, -1.2, -1.2, 2.0;
  const HeatBath bath{1.7};
  const auto gauss = canonical_to_gaussian(h, bath);
  const auto family = canonical_family(quadratic_system(h), bath);
  const ParameterPoint none(0);
  double worst = 0.0;
  for (double x = -2.0; x <= 2.0; x += 0.25)
    for (double y = -2.0; y <= 2.0; y += 0.25) {
      const Eigen::Vector2d p(x, y);
      worst = std::max(worst, std::abs(family.density(p, none) - gauss.pdf(p)));
    }
  CHECK(worst <= 1e-8);

  const auto moments = canonical_moments(quadratic_system(h), none, bath);
  CHECK((moments.covariance - gauss.covariance()).cwiseAbs().maxCoeff() <= 1e-4);
  CHECK((moments.mean - h.equilibrium).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("canonical Fisher metric: uncentered and centered forms") {
  CanonicalSystem frozen = oscillator_1d_system(1.0, 1.0);
  frozen.energy = [](const Eigen::VectorXd& x, const ParameterPoint&) { return 0.5 * x.squaredNorm(); };
  frozen.energy_grad_theta = nullptr;
  const auto zero = ce_fisher_metric(frozen, Eigen::VectorXd::Constant(1, 0.3), HeatBath{1.0});
  CHECK(zero.uncentered_form.cwiseAbs().maxCoeff() < 1e-12);

  const double m = 2.0, w = 1.5;
  const HeatBath bath{0.8};
  const auto osc = ce_fisher_metric(oscillator_1d_system(m, w), Eigen::VectorXd::Constant(1, 0.4), bath);
  CHECK(osc.uncentered_form(0, 0) == doctest::Approx(bath.beta() * m * w * w).epsilon(1e-12));
  CHECK(osc.general_form(0, 0) == doctest::Approx(bath.beta() * m * w * w).epsilon(1e-12));
  CHECK(osc.discrepancy < 1e-10);

  // θ-dependent partition function: the two forms differ.
  const double th = 2.0;
  const auto stiff = ce_fisher_metric(stiffness_system(), Eigen::VectorXd::Constant(1, th), HeatBath{1.0});
  CHECK(stiff.uncentered_form(0, 0) == doctest::Approx(3.0 / (4.0 * th * th)).epsilon(1e-12));
  CHECK(stiff.general_form(0, 0) == doctest::Approx(1.0 / (2.0 * th * th)).epsilon(1e-12));
  CHECK(stiff.discrepancy == doctest::Approx(1.0 / (4.0 * th * th)).epsilon(1e-12));
  const auto fam = canonical_family(stiffness_system(), HeatBath{1.0});
  CHECK(fisher_metric(fam, Eigen::VectorXd::Constant(1, th)).value(0, 0) ==
        doctest::Approx(stiff.general_form(0, 0)).epsilon(1e-6));
}

TEST_CASE("oscillator position energy at T = T0(1 - r^2) reproduces the 2D-model metric") {
  const OscillatorPair pair{1.3, 0.7, 1.1, 2.0, 0.25, 0.6, 2.0, 1.0};
  const HeatBath bath{pair.T0 * (1.0 - pair.r * pair.r)};
  const Eigen::VectorXd theta = Eigen::Vector2d(pair.q10, pair.sigma());
  const auto ce = ce_fisher_metric(oscillator_position_system(pair), theta, bath);
  const auto expected = metric_2d_closed(Correlated2DParams{pair.q10, pair.sigma(), pair.r, pair.sigma_c()});
  CHECK((ce.general_form - expected).cwiseAbs().maxCoeff() <= 1e-4 * expected.cwiseAbs().maxCoeff());
  CHECK(ce.discrepancy <= 1e-8 * expected.cwiseAbs().maxCoeff());
  const auto numeric = fisher_metric(canonical_family(oscillator_position_system(pair), bath), theta).value;
  CHECK((numeric - expected).cwiseAbs().maxCoeff() <= 1e-4 * expected.cwiseAbs().maxCoeff());
}

TEST_CASE("canonical bound: independence, two-path agreement, dominance") {
  const TestFunctionSet unit({unit_l1_bump(0.0, 1.0), unit_l1_bump(0.0, 1.0)});
  CHECK(ce_upper_bound(diagonal_hamiltonian({2.0, 5.0}), HeatBath{1.0}, unit).max_term < 1e-12);
  CHECK_THROWS_AS(ce_upper_bound(diagonal_hamiltonian({1, 1, 1, 1}), HeatBath{1.0}, unit), DomainError);

  // T = T0/2 with coupling r = 1/√2, where the position Gaussian is the reduced 2D model.
  const OscillatorPair pair{1.0, 1.0, 1.0, 1.0, 0.0, std::sqrt(0.5), 1.0, 1.0};
  const HeatBath bath{0.5};
  const auto fs = oscillator_test_functions(pair);
  const auto canonical = ce_upper_bound(pair.position_hamiltonian(), bath, fs);
  const auto reduced = oscillator_reduce(pair, bath);
  const double via_model = correlation_upper_bound(distinguishability_F_numeric(reduced).value, fs);
  CHECK(canonical.bound == doctest::Approx(via_model).epsilon(1e-9));
  CHECK(canonical.bound ==
        doctest::Approx(distinguishability_F_closed(reduced.r) / (kTwoPi * pair.sigma_c() * pair.sigma_c()) * fs.product_l1())
            .epsilon(1e-9));

  std::mt19937 rng(4242);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 25; ++trial) {
    const auto h = random_hamiltonian(rng, 1);
    const HeatBath b{0.5 + std::abs(n01(rng))};
    const TestFunctionSet tf({gaussian_bump(n01(rng), 0.5 + std::abs(n01(rng)), n01(rng)),
                              gaussian_bump(n01(rng), 0.5 + std::abs(n01(rng)), n01(rng))});
    CHECK(std::abs(mvn_ig_correlation(canonical_to_gaussian(h, b), tf)) <= ce_upper_bound(h, b, tf).bound);
  }
}

TEST_CASE("oscillator reduction and the temperature law") {
  const OscillatorPair pair{2.0, 0.5, 1.5, 3.0, 0.7, 0.4, 300.0, 1.0};
  const auto at_t0 = oscillator_reduce(pair, pair.T0);
  CHECK(at_t0.r == 0.0);
  CHECK(at_t0.mu_x == 0.7);
  CHECK(at_t0.sigma == doctest::Approx(std::sqrt(300.0 / (2.0 * 2.25))));
  CHECK(at_t0.sigma_c * at_t0.sigma_c == doctest::Approx(300.0 / (std::sqrt(1.0) * 4.5)));
  CHECK(oscillator_reduce(pair, pair.T0 / 2).r == doctest::Approx(0.70710678118654752).epsilon(1e-15));
  CHECK(std::abs(oscillator_reduce(pair, 0.0).r) == 1.0);
  CHECK_THROWS_AS(oscillator_reduce(pair, 1.01 * pair.T0), DomainError);
  auto negative = pair;
  negative.r = -0.3;
  CHECK(oscillator_reduce(negative, 150.0).r < 0.0);
  CHECK(oscillator_reduce(pair, HeatBath{150.0}).r == oscillator_reduce(pair, 150.0).r);
  CHECK_THROWS_AS(oscillator_reduce(pair, HeatBath{150.0, 2.0}), DomainError);

  CHECK(temperature_to_tau(0.5, 1.0) == doctest::Approx(2.0));
  CHECK(temperature_to_tau(1.0 - 1e-9, 1.0) > 1e8);
  CHECK_THROWS_AS(temperature_to_tau(1.0, 1.0), DomainError);
  CHECK(oscillator_curvature(1.0, 1.0) == -0.5);
  CHECK(oscillator_curvature(0.0, 1.0) == 0.0);
  CHECK(oscillator_curvature(0.5, 1.0) == -0.25);
  CHECK_THROWS_AS(oscillator_curvature(1.5, 1.0), DomainError);

  for (double ratio : {0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0}) {
    const double T = ratio * pair.T0;
    CHECK(std::abs(curvature_2d_closed(oscillator_reduce(pair, T).r) - oscillator_curvature(T, pair.T0)) <= 1e-12);
  }
  for (double T = 0.0; T < pair.T0; T += 10.0) CHECK(oscillator_curvature(T + 10.0, pair.T0) < oscillator_curvature(T, pair.T0));
}

TEST_CASE("oscillator mixing trace along the geometric schedule") {
  const OscillatorPair pair;
  const auto fs = oscillator_test_functions(pair);
  const auto out = oscillator_mixing_trace(pair, geometric_schedule(pair.T0), fs);
  CHECK(out.classification.level == IgehLevel::Mixing);
  CHECK(out.bound_holds);
  CHECK(out.envelope_holds);
  CHECK(out.trace.tau.front() == doctest::Approx(2.0));
  CHECK(out.trace.tau.back() == doctest::Approx(std::ldexp(1.0, 20)));
  // (1/2π)(1/√(4 − r²) − 1/2) at r² = 2^−k, mpmath
  CHECK(out.trace.c[0] == doctest::Approx(0.0054944239485346831).epsilon(1e-12));
  CHECK(out.trace.c[1] == doctest::Approx(0.0026097876622523062).epsilon(1e-12));
  CHECK(out.trace.c[4] == doctest::Approx(0.00031268282160672754).epsilon(1e-11));
  CHECK(out.trace.c[19] == doctest::Approx(9.4863755435360987e-9).epsilon(1e-6));

  const auto parallel = oscillator_mixing_trace(pair, geometric_schedule(pair.T0), fs, TraceOptions{.jobs = 3});
  CHECK(parallel.trace.c == out.trace.c);

  const auto constant = oscillator_mixing_trace(pair, std::vector<double>(16, pair.T0), fs);
  CHECK(constant.classification.level == IgehLevel::Bernoulli);
  CHECK(constant.trace.meta == "tau = sample index");

  auto reaching = geometric_schedule(pair.T0, 15);
  reaching.push_back(pair.T0);
  const auto ends = oscillator_mixing_trace(pair, reaching, fs);
  CHECK(std::abs(ends.trace.c.back()) < 1e-15);

  CHECK_THROWS_AS(oscillator_mixing_trace(pair, {0.0, 0.5}, fs), DomainError);
  CHECK_THROWS_AS(oscillator_mixing_trace(pair, {}, fs), DomainError);
}

TEST_CASE("GOE joint: factorization, normalization, reduction, curvature") {
  const auto g0 = goe_model(0.3, 1.2, 0.0, 1.2);
  CHECK(factorization_error(g0.joint, goe_grid(g0)) <= 1e-12);
  QuadratureSpec spec;
  spec.order = 16;
  CHECK(integrate(g0.joint.joint, g0.joint.reference, spec).value == doctest::Approx(1.0).epsilon(1e-6));

  const auto g = goe_model(0.3, 1.2, 0.6, 0.9);
  CHECK(factorization_error(g.joint, goe_grid(g)) > 1e-3);
  CHECK(goe_reduction_error(g) <= 1e-6);
  CHECK(marginal_consistency_error(g.joint, 0, std::vector<double>{-1.0, 0.3, 1.5}, spec) < 1e-6);

  const std::vector<double> rs = {-0.99, -0.9, -0.5, 0.0, 0.5, 0.9, 0.99};
  const auto rep = goe_report(0.0, 1.0, rs);
  CHECK(rep.factorization_error <= 1e-12);
  CHECK(rep.classification.level == IgehLevel::Bernoulli);
  CHECK(rep.rows[3].R_closed == -0.5);
  CHECK(rep.rows[3].r_min);
  for (std::size_t k = 0; k < rs.size(); ++k) {
    CHECK(std::abs(rep.rows[k].R_numeric - rep.rows[k].R_closed) < 1e-4);
    if (k != 3) CHECK_FALSE(rep.rows[k].r_min);
  }
  for (std::size_t k = 3; k + 1 < rs.size(); ++k) CHECK(rep.rows[k + 1].R_closed > rep.rows[k].R_closed);
  for (std::size_t k = 0; k < 3; ++k) CHECK(rep.rows[k].R_closed > rep.rows[k + 1].R_closed);

  CHECK_THROWS_AS(goe_model(0.0, -1.0, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(goe_model(0.0, 1.0, 1.0, 1.0), DomainError);
}
