#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "igeom/gaussian_models.hpp"
#include "igeom/manifold.hpp"
#include "igeom/sup_search.hpp"

namespace igeom {

/// An absolutely integrable test function f_i(x_i) with its L1 norm.
struct TestFunction {
  std::function<double(double)> f;
  double l1_norm = 0.0;
  std::string label;
  /// Optional Gaussian envelope exp(−(x − center)²/(2 width²)) of f. When set,
  /// integrals against f are framed on the product with the density.
  double center = std::numeric_limits<double>::quiet_NaN();
  double width = std::numeric_limits<double>::quiet_NaN();

  double operator()(double x) const { return f(x); }
  bool has_envelope() const { return std::isfinite(center) && width > 0.0; }
};

/// h · exp(−(x − c)² / (2 w²)); L1 norm h w √(2π).
TestFunction gaussian_bump(double center, double width, double height = 1.0);

/// Gaussian bump scaled to unit L1 norm.
TestFunction unit_l1_bump(double center, double width);

/// ∫|f| by the rectangle rule on [center − box·scale, center + box·scale].
double l1_norm_numeric(const std::function<double(double)>& f, double center, double scale,
                       double box = 12.0, int points = 20001);

class TestFunctionSet {
 public:
  explicit TestFunctionSet(std::vector<TestFunction> fs);

  std::size_t size() const { return fs_.size(); }
  const TestFunction& operator[](std::size_t i) const { return fs_[i]; }
  std::vector<double> l1_norms() const;
  /// ∫…∫ |f_1 ⋯ f_N| = ∏ ||f_i||_1.
  double product_l1() const;

 private:
  std::vector<TestFunction> fs_;
};

/// Unit-L1 bumps centred on each coordinate's reference mean with that coordinate's std.
TestFunctionSet default_test_functions(const GaussianReference& ref);

/// A joint density at fixed θ with its one-dimensional marginals.
struct JointDensity {
  std::function<double(const Eigen::VectorXd&)> joint;
  std::vector<std::function<double(double)>> marginals;
  GaussianReference reference;

  int dim() const { return reference.dim(); }
  double product_of_marginals(const Eigen::VectorXd& x) const;
};

/// Reference for ∫ density · ∏ f_i: the product of `ref` with each test function envelope.
GaussianReference envelope_frame(const GaussianReference& ref, const TestFunctionSet& fs);

JointDensity joint_at(const ModelFamily& model, const ParameterPoint& theta);
JointDensity joint_of(const MultivariateGaussian<double>& g);
JointDensity joint_of(const Correlated2DParams& p);

/// C = ∫ p ∏ f_i dx − ∏ ∫ p_i f_i dx_i. Throws DomainError for N < 2 or a
/// size mismatch, ConvergenceError on quadrature failure.
double ig_correlation(const JointDensity& density, const TestFunctionSet& fs,
                      const QuadratureSpec& spec = {});

double ig_correlation(const ModelFamily& model, const TestFunctionSet& fs,
                      const ParameterPoint& theta, const QuadratureSpec& spec = {});

/// Largest |p_i(x) − ∫ p dx_{≠i}| over `points`, integrating the joint by quadrature.
double marginal_consistency_error(const JointDensity& density, int i, std::span<const double> points,
                                  const QuadratureSpec& spec = {});

/// F(r) = |r| (√(1 − r²)(1 + |r|))^(−1 − 1/|r|), F(0) = 0, +∞ at |r| = 1.
template <typename Scalar>
Scalar distinguishability_F_closed(Scalar r) {
  using std::abs;
  using std::pow;
  using std::sqrt;
  const Scalar a = abs(r);
  if (!(a <= 1)) throw DomainError("correlation r must lie in [-1, 1]");
  if (a == 0) return Scalar(0);
  if (a == 1) return std::numeric_limits<Scalar>::infinity();
  return a * pow(sqrt(1 - r * r) * (1 + a), -1 - 1 / a);
}

/// max_{x,y} |p(x, y) − p_1(x) p_2(y)| by grid scan and Nelder–Mead refinement.
SupResult distinguishability_F_numeric(const Correlated2DParams& p,
                                       const SupSearchOptions& options = {});

/// F · ||f_1 ⋯ f_N||_1.
double correlation_upper_bound(double F_value, const TestFunctionSet& fs);

struct BoundResult {
  double max_term = 0.0;
  double bound = 0.0;
  Eigen::VectorXd argmax;
  bool converged = true;
};

double mvn_ig_correlation(const MultivariateGaussian<double>& g, const TestFunctionSet& fs,
                          const QuadratureSpec& spec = {});

/// max_x |p(x) − ∏ p_i(x_i)| · ||f_1 ⋯ f_2n||_1.
BoundResult mvn_upper_bound(const MultivariateGaussian<double>& g, const TestFunctionSet& fs,
                            const SupSearchOptions& options = {});

/// Sampled C(τ) along a parameter path. τ must be strictly increasing.
struct CorrelationTrace {
  std::vector<double> tau;
  std::vector<double> c;
  std::string meta;

  void push(double t, double value);
  std::size_t size() const { return tau.size(); }
};

/// Ordered weakest to strongest.
enum class IgehLevel { Unclassified = 0, Ergodic = 1, Mixing = 2, Bernoulli = 3 };

std::string to_string(IgehLevel level);

struct IgehEvidence {
  double max_abs = 0.0;
  double tail_mean_abs = 0.0;
  double tail_max_abs = 0.0;
  double cesaro_tail_max = 0.0;
  std::size_t tail_start = 0;
  bool bernoulli_test = false;
  bool mixing_test = false;
  bool ergodic_test = false;
};

struct IgehClass {
  IgehLevel level = IgehLevel::Unclassified;
  IgehEvidence evidence;

  bool is_ergodic() const { return level >= IgehLevel::Ergodic; }
  bool is_mixing() const { return level >= IgehLevel::Mixing; }
  bool is_bernoulli() const { return level == IgehLevel::Bernoulli; }
};

/// Finite-horizon IGEH classification; the strongest passing test wins.
///
/// Bernoulli: |c| ≤ tol at every sample. Mixing: trailing-window mean of |c| ≤
/// tol and trailing max ≤ 3 tol. Ergodic: the running Cesàro average
/// (1/(T − τ₀)) ∫ C dτ (trapezoid) stays within tol over the trailing window.
/// Needs at least 16 samples and 0 < tail_fraction < 1.
IgehClass classify(const CorrelationTrace& trace, double tol = 1e-6, double tail_fraction = 0.25);

}  // namespace igeom
