#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "igeom/igeh.hpp"

using namespace igeom;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// sup |p − p1 p2| at the origin, which is the global maximum for |r| above the
// crossover root of (1 + r)³(1 − r) = 1.
double origin_gap(double r, double sigma_c = 1.0) {
  return (1.0 / std::sqrt(1.0 - r * r) - 1.0) / (kTwoPi * sigma_c * sigma_c);
}

CorrelationTrace make_trace(double t0, double t1, int n, const std::function<double(double)>& c) {
  CorrelationTrace t;
  for (int k = 0; k < n; ++k) {
    const double tau = t0 + (t1 - t0) * k / (n - 1);
    t.push(tau, c(tau));
  }
  return t;
}

}  // namespace

TEST_CASE("closed-form F: reference values, parity, limits") {
  // mpmath at 30 digits
  CHECK(distinguishability_F_closed(0.1) == doctest::Approx(0.037041357376294521).epsilon(1e-14));
  CHECK(distinguishability_F_closed(0.5) == doctest::Approx(0.22808899523540771).epsilon(1e-14));
  CHECK(distinguishability_F_closed(0.9) == doctest::Approx(1.3399183311183293).epsilon(1e-14));
  CHECK(distinguishability_F_closed(0.95) == doctest::Approx(2.6302069985111843).epsilon(1e-14));
  CHECK(distinguishability_F_closed(0.0) == 0.0);
  CHECK(std::isinf(distinguishability_F_closed(1.0)));
  CHECK(std::isinf(distinguishability_F_closed(-1.0)));
  CHECK_THROWS_AS(distinguishability_F_closed(1.01), DomainError);
  for (double r = 0.01; r < 1.0; r += 0.01) CHECK(distinguishability_F_closed(-r) == distinguishability_F_closed(r));
  for (double r = 0.0; r < 0.985; r += 0.005)
    CHECK(distinguishability_F_closed(r + 0.005) > distinguishability_F_closed(r));
}

TEST_CASE("sup-norm oracle: closed form over 2 pi below the crossover, origin value above it") {
  CHECK(distinguishability_F_numeric({0.0, 1.0, 0.0, 1.0}).value < 1e-12);
  for (double r : {0.1, 0.3, 0.5, 0.7, -0.5}) {
    const auto s = distinguishability_F_numeric({0.0, 1.0, r, 1.0});
    CHECK(s.converged);
    CHECK(s.value == doctest::Approx(distinguishability_F_closed(r) / kTwoPi).epsilon(1e-10));
  }
  // Nelder–Mead at tight tolerance, independent of this code base.
  CHECK(distinguishability_F_numeric({0.0, 1.0, 0.5, 1.0}).value == doctest::Approx(0.03630149105657891).epsilon(1e-10));
  CHECK(distinguishability_F_numeric({0.0, 1.0, 0.9, 1.0}).value == doctest::Approx(0.2059715375936514).epsilon(1e-10));
  CHECK(distinguishability_F_numeric({0.0, 1.0, 0.95, 1.0}).value == doctest::Approx(0.35054880103328273).epsilon(1e-10));
  for (double r : {0.9, 0.95, -0.9}) {
    const double sup = distinguishability_F_numeric({0.0, 1.0, r, 1.0}).value;
    CHECK(sup == doctest::Approx(origin_gap(r)).epsilon(1e-10));
    CHECK(sup < distinguishability_F_closed(r) / kTwoPi);
  }
  // Crossover: both candidate maxima coincide.
  const double rstar = 0.8392867552;
  CHECK(std::pow(1 + rstar, 3) * (1 - rstar) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(distinguishability_F_closed(rstar) / kTwoPi == doctest::Approx(origin_gap(rstar)).epsilon(1e-8));
}

TEST_CASE("sup-norm oracle is independent of mu_x and sigma and scales as 1/Sigma_c^2") {
  const double ref = distinguishability_F_numeric({0.0, 1.0, 0.5, 1.0}).value;
  for (double mu : {-2.0, 0.0, 3.0})
    for (double s : {0.5, 1.0, 2.0}) CHECK(std::abs(distinguishability_F_numeric({mu, s, 0.5, 1.0}).value - ref) <= 1e-6);
  CHECK(distinguishability_F_numeric({0.0, 1.0, 0.5, 2.0}).value == doctest::Approx(ref / 4.0).epsilon(1e-9));
}

TEST_CASE("test functions carry analytic L1 norms") {
  const auto b = gaussian_bump(0.5, 0.7, 2.0);
  CHECK(b.l1_norm == doctest::Approx(l1_norm_numeric(b.f, 0.5, 0.7)).epsilon(1e-10));
  const auto u = unit_l1_bump(-1.0, 0.3);
  CHECK(l1_norm_numeric(u.f, -1.0, 0.3) == doctest::Approx(1.0).epsilon(1e-10));
  const TestFunctionSet fs({b, u});
  CHECK(fs.product_l1() == doctest::Approx(b.l1_norm));
  CHECK_THROWS_AS(gaussian_bump(0.0, -1.0), DomainError);
  CHECK_THROWS_AS(TestFunctionSet({TestFunction{[](double) { return 1.0; }, 0.0, "bad"}}), DomainError);
}

TEST_CASE("IG correlation: factorizing joint vanishes, r = 0.5 matches the Riemann-sum oracle") {
  const TestFunctionSet fs({gaussian_bump(0.0, 1.0), gaussian_bump(0.0, 1.0)});
  CHECK(std::abs(ig_correlation(joint_of(Correlated2DParams{0.0, 1.0, 0.0, 1.0}), fs)) < 1e-8);
  const TestFunctionSet shifted({gaussian_bump(1.0, 0.5, -2.0), unit_l1_bump(-0.3, 2.0)});
  CHECK(std::abs(ig_correlation(joint_of(Correlated2DParams{0.4, 1.3, 0.0, 0.8}), shifted)) < 1e-8);

  // numpy midpoint sum on a ±8σ grid with 2001² points
  const double riemann = 0.01639777949432264;
  const double c = ig_correlation(joint_of(Correlated2DParams{0.0, 1.0, 0.5, 1.0}), fs);
  CHECK(std::abs(c - riemann) < 1e-6);
  CHECK(c == doctest::Approx(1.0 / std::sqrt(3.75) - 0.5).epsilon(1e-12));

  const auto model = correlated_2d_family(0.5, 1.0);
  CHECK(ig_correlation(model, fs, Eigen::Vector2d(0.0, 1.0)) == doctest::Approx(c).epsilon(1e-14));
}

TEST_CASE("IG correlation preconditions") {
  const TestFunctionSet one({gaussian_bump(0.0, 1.0)});
  CHECK_THROWS_AS(ig_correlation(joint_of(Correlated2DParams{}), one), DomainError);
  CHECK_THROWS_AS(ig_correlation(univariate_gaussian_family(), one, Eigen::Vector2d(0.0, 1.0)), DomainError);
}

TEST_CASE("marginal consistency of the 2D model and detection of a wrong marginal") {
  JointDensity d = joint_of(Correlated2DParams{0.3, 1.2, 0.7, 1.1});
  const std::vector<double> xs = {-2.0, -0.5, 0.3, 1.0, 2.5};
  CHECK(marginal_consistency_error(d, 0, xs) < 1e-12);
  CHECK(marginal_consistency_error(d, 1, xs) < 1e-12);
  d.marginals[1] = [](double y) { return std::exp(-0.5 * y * y) / std::sqrt(kTwoPi); };
  CHECK(marginal_consistency_error(d, 1, xs) > 1e-3);
  CHECK_THROWS_AS(marginal_consistency_error(d, 2, xs), DomainError);
}

TEST_CASE("correlation bound arithmetic") {
  const TestFunctionSet unit({unit_l1_bump(0.0, 1.0), unit_l1_bump(0.0, 1.0)});
  CHECK(correlation_upper_bound(0.0, unit) == 0.0);
  CHECK(correlation_upper_bound(0.228062, unit) == doctest::Approx(0.228062));
  CHECK_THROWS_AS(correlation_upper_bound(-1.0, unit), DomainError);
}

TEST_CASE("|C| stays within the sup-norm bound on random draws") {
  std::mt19937 rng(20240611);
  std::uniform_real_distribution<double> ur(-0.95, 0.95), uc(-2.0, 2.0), uw(0.2, 3.0), uh(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Correlated2DParams p{uc(rng), uw(rng), ur(rng), uw(rng)};
    const TestFunctionSet fs({gaussian_bump(uc(rng), uw(rng), uh(rng)), gaussian_bump(uc(rng), uw(rng), uh(rng))});
    const double c = ig_correlation(joint_of(p), fs);
    const double bound = correlation_upper_bound(distinguishability_F_numeric(p).value, fs);
    CHECK(std::abs(c) <= bound);
  }
}

TEST_CASE("multivariate correlation and bound") {
  const TestFunctionSet fs({unit_l1_bump(0.0, 1.0), unit_l1_bump(0.0, 1.0)});
  const MultivariateGaussian<double> diag(Eigen::Vector2d(0.5, -0.5), Eigen::Vector2d(2.0, 0.5).asDiagonal());
  CHECK(std::abs(mvn_ig_correlation(diag, fs)) < 1e-12);
  CHECK(mvn_upper_bound(diag, fs).max_term < 1e-12);

  Eigen::Matrix2d cov;
  cov << 1.0, 0.5, 0.5, 1.0;
  const MultivariateGaussian<double> corr(Eigen::Vector2d::Zero(), cov);
  const auto b = mvn_upper_bound(corr, fs);
  CHECK(b.max_term == doctest::Approx(distinguishability_F_numeric({0.0, 1.0, 0.5, 1.0}).value).epsilon(1e-10));
  CHECK(b.max_term == doctest::Approx(distinguishability_F_closed(0.5) / kTwoPi).epsilon(1e-10));
  CHECK(b.bound == doctest::Approx(b.max_term));

  std::mt19937 rng(99);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 25; ++trial) {
    Eigen::Matrix2d a;
    for (int i = 0; i < 4; ++i) a(i) = n01(rng);
    const Eigen::Matrix2d c = a * a.transpose() + 0.1 * Eigen::Matrix2d::Identity();
    const MultivariateGaussian<double> g(Eigen::Vector2d(n01(rng), n01(rng)), c);
    const TestFunctionSet tf({gaussian_bump(n01(rng), 1.0 + std::abs(n01(rng)), n01(rng)),
                              gaussian_bump(n01(rng), 1.0 + std::abs(n01(rng)), n01(rng))});
    CHECK(std::abs(mvn_ig_correlation(g, tf)) <= mvn_upper_bound(g, tf).bound);
  }
}

TEST_CASE("classifier: zero trace is Bernoulli") {
  const auto cls = classify(make_trace(0.0, 10.0, 64, [](double) { return 0.0; }));
  CHECK(cls.level == IgehLevel::Bernoulli);
  CHECK(cls.is_bernoulli());
  CHECK(cls.is_mixing());
  CHECK(cls.is_ergodic());
}

TEST_CASE("classifier: exponential decay is Mixing but not Bernoulli") {
  const auto cls = classify(make_trace(0.0, 40.0, 4001, [](double t) { return std::exp(-t); }));
  CHECK(cls.level == IgehLevel::Mixing);
  CHECK_FALSE(cls.is_bernoulli());
  CHECK(cls.is_ergodic());
  CHECK(cls.evidence.mixing_test);
}

TEST_CASE("classifier: sin trace is Ergodic but not Mixing at a finite horizon") {
  const auto trace = make_trace(0.0, 200.0 * std::numbers::pi, 20001, [](double t) { return std::sin(t); });
  const auto cls = classify(trace, 1e-2);
  CHECK(cls.level == IgehLevel::Ergodic);
  CHECK_FALSE(cls.is_mixing());
  // At the default tolerance, the 1/T decay of the Cesàro mean is too slow for this horizon.
  CHECK(classify(trace).level == IgehLevel::Unclassified);
  CHECK(classify(trace).evidence.cesaro_tail_max == doctest::Approx(cls.evidence.cesaro_tail_max));
}

TEST_CASE("classifier ordering and monotonicity in tol") {
  const std::vector<std::function<double(double)>> cs = {
      [](double) { return 0.0; },
      [](double t) { return std::exp(-t); },
      [](double t) { return std::sin(t); },
      [](double t) { return 1e-3 * std::cos(3 * t) / (1 + t); },
      [](double) { return 0.2; },
  };
  for (const auto& c : cs) {
    const auto trace = make_trace(0.0, 100.0, 2001, c);
    IgehLevel prev = IgehLevel::Unclassified;
    for (double tol : {1e-9, 1e-6, 1e-4, 1e-2, 1e-1, 1.0}) {
      const auto cls = classify(trace, tol);
      CHECK(cls.level >= prev);
      prev = cls.level;
      if (cls.is_bernoulli()) CHECK(cls.is_mixing());
      if (cls.is_mixing()) CHECK(cls.is_ergodic());
    }
  }
}

TEST_CASE("classifier preconditions") {
  CHECK_THROWS_AS(classify(make_trace(0.0, 1.0, 15, [](double) { return 0.0; })), DomainError);
  const auto ok = make_trace(0.0, 1.0, 32, [](double) { return 0.0; });
  CHECK_THROWS_AS(classify(ok, 1e-6, 0.0), DomainError);
  CHECK_THROWS_AS(classify(ok, 1e-6, 1.0), DomainError);
  CorrelationTrace t;
  t.push(0.0, 0.0);
  CHECK_THROWS_AS(t.push(0.0, 1.0), DomainError);
  CHECK(to_string(IgehLevel::Mixing) == "Mixing");
}

TEST_CASE("envelope framing agrees with the plain joint frame") {
  const Correlated2DParams p{0.2, 1.1, 0.5, 0.9};
  const TestFunctionSet hinted({gaussian_bump(0.3, 1.5), gaussian_bump(-0.2, 2.0, 0.7)});
  std::vector<TestFunction> bare{hinted[0], hinted[1]};
  for (auto& t : bare) t.center = t.width = std::numeric_limits<double>::quiet_NaN();
  const double a = ig_correlation(joint_of(p), hinted);
  const double b = ig_correlation(joint_of(p), TestFunctionSet(bare));
  CHECK(a == doctest::Approx(b).epsilon(1e-9));

  const auto frame = envelope_frame(joint_of(p).reference, hinted);
  CHECK(frame.covariance.determinant() < joint_of(p).reference.covariance.determinant());
  CHECK_THROWS_AS(envelope_frame(joint_of(p).reference, TestFunctionSet({hinted[0]})), DomainError);
}
