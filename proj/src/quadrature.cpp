#include "igeom/quadrature.hpp"

#include <map>
#include <memory>
#include <mutex>

namespace igeom {
namespace {

// Normalized Hermite functions psi_0..psi_n at t via the stable three-term
// recurrence; returns {psi_n, psi_{n-1}}.
std::pair<double, double> hermite_functions(int n, double t) {
  double prev = 0.0;
  double cur = std::pow(M_PI, -0.25) * std::exp(-0.5 * t * t);
  for (int j = 1; j <= n; ++j) {
    const double next = t * std::sqrt(2.0 / j) * cur - std::sqrt((j - 1.0) / j) * prev;
    prev = cur;
    cur = next;
  }
  return {cur, prev};
}

GaussHermiteRule build_rule(int n) {
  // Golub–Welsch: eigenvalues of the symmetric Jacobi matrix seed the nodes.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(k / 2.0);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi, Eigen::EigenvaluesOnly);

  GaussHermiteRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  rule.scaled_weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double t = eig.eigenvalues()(i);
    for (int it = 0; it < 8; ++it) {
      auto [pn, pn1] = hermite_functions(n, t);
      const double dp = std::sqrt(2.0 * n) * pn1 - t * pn;
      if (dp == 0.0) break;
      const double step = pn / dp;
      t -= step;
      if (std::abs(step) < 1e-16 * std::max(1.0, std::abs(t))) break;
    }
    auto [pn, pn1] = hermite_functions(n, t);
    (void)pn;
    // w_i e^{-t^2}-free form: psi includes e^{-t^2/2}, so 1/(n psi^2) = w e^{t^2}.
    rule.nodes[i] = t;
    rule.scaled_weights[i] = 1.0 / (n * pn1 * pn1);
    rule.weights[i] = rule.scaled_weights[i] * std::exp(-t * t);
  }
  return rule;
}

}  // namespace

const GaussHermiteRule& gauss_hermite(int order) {
  if (order < 1) throw DomainError("Gauss-Hermite order must be positive");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussHermiteRule>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[order];
  if (!slot) slot = std::make_unique<GaussHermiteRule>(build_rule(order));
  return *slot;
}

GaussianReference GaussianReference::standard(int dim) {
  return {Eigen::VectorXd::Zero(dim), Eigen::MatrixXd::Identity(dim, dim)};
}

GaussianReference GaussianReference::diagonal(const Eigen::VectorXd& mean,
                                              const Eigen::VectorXd& variances) {
  return {mean, variances.asDiagonal()};
}

namespace detail {

Frame whitening_frame(const GaussianReference& ref) {
  if (ref.covariance.rows() != ref.dim() || ref.covariance.cols() != ref.dim()) {
    throw DomainError("reference covariance shape does not match its mean");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(ref.covariance);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefiniteError("quadrature reference covariance is not positive definite");
  }
  Eigen::MatrixXd factor = llt.matrixL();
  return {ref.mean, factor, factor.diagonal().prod()};
}

}  // namespace detail
}  // namespace igeom
