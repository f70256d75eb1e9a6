#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <unsupported/Eigen/CXX11/Tensor>

namespace igeom {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Rank-3 array; for connections the layout is (k, i, j) = Γ^k_ij.
template <typename Scalar>
using Tensor3 = Eigen::Tensor<Scalar, 3>;

/// Rank-4 array; curvature uses the all-lower layout R_iklm.
template <typename Scalar>
using Tensor4 = Eigen::Tensor<Scalar, 4>;

/// Parameter-space coordinates θ = (θ_1, ..., θ_m).
using ParameterPoint = Eigen::VectorXd;

// Error hierarchy. Everything derives from std::runtime_error or
// std::domain_error so callers can catch broadly.

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotPositiveDefiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularMetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalDerivativeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace igeom
