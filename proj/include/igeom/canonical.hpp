#pragma once

#include <functional>
#include <vector>

#include "igeom/gaussian_models.hpp"
#include "igeom/igeh.hpp"

namespace igeom {

/// E(x) = ½ (x − x₀)ᵀ H (x − x₀) on a phase space of dimension 2n.
/// G = H/2 is the tensor appearing in the exponent of the canonical density.
struct QuadraticHamiltonian {
  int n = 1;
  Eigen::VectorXd equilibrium;
  Eigen::MatrixXd hessian;

  int phase_dim() const { return 2 * n; }
  /// Throws unless the Hessian is a symmetric positive definite 2n×2n matrix.
  void validate() const;
  Eigen::MatrixXd G() const { return 0.5 * hessian; }
  double energy(const Eigen::VectorXd& x) const;
};

struct HeatBath {
  double temperature = 1.0;
  double kB = 1.0;

  void validate() const;
  double kT() const { return kB * temperature; }
  double beta() const { return 1.0 / kT(); }
};

/// Two coupled one-dimensional oscillators, q20 = 0, phase point (q1, q2, p1, p2).
struct OscillatorPair {
  double m1 = 1.0, m2 = 1.0;
  double omega1 = 1.0, omega2 = 1.0;
  double q10 = 0.0;
  double r = 0.0;
  double T0 = 1.0;
  double kB = 1.0;

  void validate() const;
  /// Σ_c with Σ_c² = kB T₀ / (√(m₁m₂) ω₁ω₂).
  double sigma_c() const;
  /// σ = √(kB T₀ / (m₁ω₁²)).
  double sigma() const;
  double coupling() const;  // r √(m₁m₂) ω₁ω₂
  double potential(double q1, double q2) const;
  double energy(const Eigen::VectorXd& phase) const;
  /// Full n = 2 Hamiltonian over (q1, q2, p1, p2).
  QuadraticHamiltonian hamiltonian() const;
  /// Position block only, as an n = 1 Hamiltonian over (q1, q2).
  QuadraticHamiltonian position_hamiltonian() const;
};

/// Finite-difference Hessian, symmetrized by averaging. The two orderings of
/// each mixed partial use different stencils; their disagreement beyond
/// `asymmetry_tol` (relative to the largest entry) throws NumericalDerivativeError.
Eigen::MatrixXd hessian_of_energy(const std::function<double(const Eigen::VectorXd&)>& E,
                                  const Eigen::VectorXd& point, double asymmetry_tol = 1e-5);

/// Mean = equilibrium, covariance = (β H)⁻¹.
MultivariateGaussian<double> canonical_to_gaussian(const QuadraticHamiltonian& h, const HeatBath& bath);

struct LawCheck {
  double lhs = 0.0;  // det(covariance) · det(hessian)
  double rhs = 0.0;  // (kB T)^(2n)
  double relative_error() const { return std::abs(lhs - rhs) / std::abs(rhs); }
};

LawCheck covariance_hessian_law(const QuadraticHamiltonian& h, const HeatBath& bath);

/// An energy E(x; θ) over phase space with a per-θ quadrature frame.
struct CanonicalSystem {
  int phase_dim = 0;
  int param_dim = 0;
  std::function<double(const Eigen::VectorXd&, const ParameterPoint&)> energy;
  /// Optional ∂E/∂θ; central differences in θ otherwise.
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const ParameterPoint&)> energy_grad_theta;
  /// Gaussian frame for integrating e^(−βE) at θ.
  std::function<GaussianReference(const ParameterPoint&, const HeatBath&)> reference;

  Eigen::VectorXd dE_dtheta(const Eigen::VectorXd& x, const ParameterPoint& theta) const;
};

/// The θ-independent system E(x) of a quadratic Hamiltonian, framed by the
/// diagonal of (βH)⁻¹ so the quadrature does not start from the exact answer.
CanonicalSystem quadratic_system(const QuadraticHamiltonian& h);

/// E = ½ m ω² (q − θ)² + p²/(2m) over (q, p).
CanonicalSystem oscillator_1d_system(double m, double omega);

/// E = θ x² / 2 over a one-dimensional phase space, θ > 0.
CanonicalSystem stiffness_system();

/// The pair's position energy written over θ = (μ_x, σ) at fixed r and Σ_c:
/// (kB T₀/2)[(q₁ − μ)²/σ² + q₂² σ²/Σ⁴ − 2 r (q₁ − μ) q₂ / Σ²].
CanonicalSystem oscillator_position_system(const OscillatorPair& o);

/// Z(θ) = ∫ e^(−βE) dx.
double partition_function(const CanonicalSystem& sys, const ParameterPoint& theta,
                          const HeatBath& bath, const QuadratureSpec& spec = {});

/// e^(−βE)/Z as a ModelFamily whose score is −β(∂E − ⟨∂E⟩).
ModelFamily canonical_family(const CanonicalSystem& sys, const HeatBath& bath,
                             const QuadratureSpec& spec = {});

struct CanonicalMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// Mean and covariance of e^(−βE)/Z by quadrature.
CanonicalMoments canonical_moments(const CanonicalSystem& sys, const ParameterPoint& theta,
                                   const HeatBath& bath, const QuadratureSpec& spec = {});

struct CanonicalFisher {
  /// β² ⟨∂_iE ∂_jE⟩, which treats Z as θ-independent.
  Eigen::MatrixXd uncentered_form;
  /// β² Cov(∂_iE, ∂_jE), the Fisher metric of the normalized density.
  Eigen::MatrixXd general_form;
  double discrepancy = 0.0;  // max |uncentered − general|
};

CanonicalFisher ce_fisher_metric(const CanonicalSystem& sys, const ParameterPoint& theta,
                                 const HeatBath& bath, const QuadratureSpec& spec = {});

/// max |p − ∏ p_i| of the β-scaled Gaussian times ||f_1 ⋯ f_2n||_1; n = 1 only.
BoundResult ce_upper_bound(const QuadraticHamiltonian& h, const HeatBath& bath,
                           const TestFunctionSet& fs, const SupSearchOptions& options = {});

/// 2D-model parameters of the pair at bath temperature T ∈ [0, T₀]:
/// μ_x = q₁₀, σ = √(kB T₀/(m₁ω₁²)), Σ_c from the constraint, and
/// r_eff = sign(r) √(1 − T/T₀). At T = 0 the result sits on |r| = 1.
Correlated2DParams oscillator_reduce(const OscillatorPair& o, double T);
Correlated2DParams oscillator_reduce(const OscillatorPair& o, const HeatBath& bath);

/// τ = 1/(1 − T/T₀) for 0 ≤ T < T₀.
double temperature_to_tau(double T, double T0);

/// R = −T/(2T₀) for 0 ≤ T ≤ T₀.
double oscillator_curvature(double T, double T0);

struct TraceOptions {
  double tol = 1e-6;
  double tail_fraction = 0.25;
  QuadratureSpec spec{};
  SupSearchOptions sup{};
  bool numeric_bound = true;
  int jobs = 1;
};

struct OscillatorTrace {
  CorrelationTrace trace;
  IgehClass classification;
  std::vector<double> temperature;
  std::vector<double> r_eff;
  std::vector<double> envelope;        // |r_eff| ||f₁f₂||₁
  std::vector<double> bound_closed;    // F_closed(r_eff) ||f₁f₂||₁
  std::vector<double> bound_numeric;   // F_numeric(r_eff) ||f₁f₂||₁, empty if disabled
  bool envelope_holds = true;
  bool bound_holds = true;
};

/// Test functions for the reduced pair: unit-L1 bumps on its (T-independent) marginals.
TestFunctionSet oscillator_test_functions(const OscillatorPair& o);

/// C along the schedule. τ is τ(T) when every T < T₀ and the schedule is
/// strictly increasing, and the sample index otherwise.
OscillatorTrace oscillator_mixing_trace(const OscillatorPair& o, const std::vector<double>& T_schedule,
                                        const TestFunctionSet& fs, const TraceOptions& options = {});

/// The 2×2 GOE-type joint over (H₁₁, H₂₂, H₁₂, H₂₁).
struct GoeModel {
  Correlated2DParams reduced;
  double off_diagonal_variance = 1.0;
  JointDensity joint;
};

GoeModel goe_model(double mu, double sigma, double r, double sigma_c);

/// Grid of `per_axis`^4 points spanning ±`half_width` marginal std on each axis.
std::vector<Eigen::VectorXd> goe_grid(const GoeModel& g, int per_axis = 7, double half_width = 3.0);

/// max |joint − ∏ marginals| over the points.
double factorization_error(const JointDensity& d, const std::vector<Eigen::VectorXd>& points);

/// max |∫ joint dH₁₂ dH₂₁ − pdf_2d(reduced)| over a per_axis² grid in (H₁₁, H₂₂).
double goe_reduction_error(const GoeModel& g, int per_axis = 7, const QuadratureSpec& spec = {});

struct GoeRow {
  double r = 0.0;
  double R_closed = 0.0;
  double R_numeric = 0.0;
  bool r_min = false;
};

struct GoeReport {
  std::vector<GoeRow> rows;
  double factorization_error = 0.0;  // at r = 0 with Σ_c = σ
  double correlation = 0.0;          // C at r = 0 with default test functions
  IgehClass classification;
};

/// Scalar curvature over `r_grid` and the r = 0 factorization and classification.
GoeReport goe_report(double mu, double sigma, const std::vector<double>& r_grid, double tol = 1e-6,
                     int jobs = 1);

}  // namespace igeom
