#pragma once

#include <vector>

#include "igeom/manifold.hpp"

namespace igeom {

template <typename Scalar>
struct GeodesicState {
  VectorX<Scalar> position;
  VectorX<Scalar> velocity;
  Scalar tau;
};

template <typename Scalar>
struct GeodesicPath {
  std::vector<GeodesicState<Scalar>> states;
  /// True when integration stopped because the next step left the domain.
  bool left_domain = false;
};

/// Metric speed v·g(θ)·v.
template <typename Scalar>
Scalar metric_speed(const MetricField<Scalar>& field, const GeodesicState<Scalar>& s) {
  return s.velocity.dot(field(s.position) * s.velocity);
}

/// Fixed-step RK4 on θ' = v, v'^k = −Γ^k_ij v^i v^j.
///
/// States are recorded every `record_every` steps plus the final one. Leaving
/// the domain ends the run with `left_domain` set; a singular metric on the
/// path propagates as SingularMetricError / NotPositiveDefiniteError.
template <typename Scalar>
GeodesicPath<Scalar> geodesic_integrate(const MetricField<Scalar>& field,
                                        const GeodesicState<Scalar>& init, Scalar tau_end,
                                        Scalar step, int record_every = 1) {
  using Vector = VectorX<Scalar>;
  if (!(step > Scalar(0))) throw DomainError("geodesic step must be positive");
  if (record_every < 1) throw DomainError("record_every must be at least 1");
  if (!field.contains(init.position)) throw DomainError("geodesic start lies outside the domain");
  const int m = field.dim();

  auto accel = [&](const Vector& pos, const Vector& vel) {
    if (!field.contains(pos)) throw DomainError("stage outside domain");
    const Tensor3<Scalar> gamma = christoffel(field, pos);
    Vector a = Vector::Zero(m);
    for (int k = 0; k < m; ++k)
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) a(k) -= gamma(k, i, j) * vel(i) * vel(j);
    return a;
  };

  GeodesicPath<Scalar> path;
  GeodesicState<Scalar> s = init;
  path.states.push_back(s);
  const auto steps = static_cast<long>(std::ceil((tau_end - init.tau) / step - Scalar(1e-9)));
  for (long n = 0; n < steps; ++n) {
    const Scalar h = std::min(step, tau_end - s.tau);
    GeodesicState<Scalar> next;
    try {
      const Vector k1x = s.velocity;
      const Vector k1v = accel(s.position, s.velocity);
      const Vector k2x = s.velocity + h / 2 * k1v;
      const Vector k2v = accel(s.position + h / 2 * k1x, k2x);
      const Vector k3x = s.velocity + h / 2 * k2v;
      const Vector k3v = accel(s.position + h / 2 * k2x, k3x);
      const Vector k4x = s.velocity + h * k3v;
      const Vector k4v = accel(s.position + h * k3x, k4x);
      next.position = s.position + h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x);
      next.velocity = s.velocity + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
      next.tau = s.tau + h;
    } catch (const DomainError&) {
      path.left_domain = true;
      break;
    }
    if (!field.contains(next.position)) {
      path.left_domain = true;
      break;
    }
    s = std::move(next);
    if ((n + 1) % record_every == 0 || n + 1 == steps) path.states.push_back(s);
  }
  if (path.left_domain && (path.states.back().tau != s.tau)) path.states.push_back(s);
  return path;
}

}  // namespace igeom
