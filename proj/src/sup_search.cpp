#include "igeom/sup_search.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace igeom {

MinimizeResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                           const Eigen::VectorXd& x0, double step, double x_tol,
                           int max_iterations) {
  const int n = static_cast<int>(x0.size());
  std::vector<Eigen::VectorXd> pts(n + 1, x0);
  std::vector<double> vals(n + 1);
  for (int i = 0; i < n; ++i) pts[i + 1](i) += step;
  for (int i = 0; i <= n; ++i) vals[i] = f(pts[i]);

  std::vector<int> order(n + 1);
  int it = 0;
  bool converged = false;
  for (; it < max_iterations; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] < vals[b]; });
    const int best = order.front();
    const int worst = order.back();
    const int second_worst = order[n - 1];

    double spread = 0.0;
    for (int i = 0; i <= n; ++i) spread = std::max(spread, (pts[i] - pts[best]).cwiseAbs().maxCoeff());
    if (spread < x_tol) {
      converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i <= n; ++i)
      if (i != worst) centroid += pts[i];
    centroid /= n;

    const Eigen::VectorXd reflected = centroid + (centroid - pts[worst]);
    const double f_r = f(reflected);
    if (f_r < vals[best]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - pts[worst]);
      const double f_e = f(expanded);
      if (f_e < f_r) {
        pts[worst] = expanded;
        vals[worst] = f_e;
      } else {
        pts[worst] = reflected;
        vals[worst] = f_r;
      }
      continue;
    }
    if (f_r < vals[second_worst]) {
      pts[worst] = reflected;
      vals[worst] = f_r;
      continue;
    }
    const bool outside = f_r < vals[worst];
    const Eigen::VectorXd contracted =
        outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                : Eigen::VectorXd(centroid + 0.5 * (pts[worst] - centroid));
    const double f_c = f(contracted);
    if (f_c < (outside ? f_r : vals[worst])) {
      pts[worst] = contracted;
      vals[worst] = f_c;
      continue;
    }
    for (int i = 0; i <= n; ++i) {
      if (i == best) continue;
      pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
      vals[i] = f(pts[i]);
    }
  }
  const auto best = std::min_element(vals.begin(), vals.end()) - vals.begin();
  return {pts[best], vals[best], it, converged};
}

SupResult sup_abs(const std::function<double(const Eigen::VectorXd&)>& f,
                  const GaussianReference& frame, const SupSearchOptions& options) {
  const int dim = frame.dim();
  if (dim < 1) throw DomainError("sup search needs at least one dimension");
  Eigen::LLT<Eigen::MatrixXd> llt(frame.covariance);
  if (llt.info() != Eigen::Success) throw NotPositiveDefiniteError("search frame covariance");
  const Eigen::MatrixXd L = llt.matrixL();
  auto to_x = [&](const Eigen::VectorXd& u) -> Eigen::VectorXd { return frame.mean + L * u; };

  int n = options.grid_points;
  if (n <= 0) n = dim == 1 ? 2001 : dim == 2 ? 241 : dim == 3 ? 61 : 25;
  n = std::max(n, 3);
  const double B = options.box_sigmas;
  const double h = 2.0 * B / (n - 1);

  long total = 1;
  for (int d = 0; d < dim; ++d) total *= n;
  std::vector<double> grid(total);
  std::vector<int> idx(dim, 0);
  Eigen::VectorXd u(dim);
  for (long k = 0; k < total; ++k) {
    long rem = k;
    for (int d = 0; d < dim; ++d) {
      idx[d] = static_cast<int>(rem % n);
      rem /= n;
      u(d) = -B + idx[d] * h;
    }
    grid[k] = std::abs(f(to_x(u)));
  }

  // Local maxima over axis neighbours seed the refinement.
  std::vector<long> candidates;
  std::vector<long> stride(dim, 1);
  for (int d = 1; d < dim; ++d) stride[d] = stride[d - 1] * n;
  for (long k = 0; k < total; ++k) {
    bool is_max = true;
    long rem = k;
    for (int d = 0; d < dim && is_max; ++d) {
      const int i = static_cast<int>(rem % n);
      rem /= n;
      if (i > 0 && grid[k - stride[d]] > grid[k]) is_max = false;
      if (i < n - 1 && grid[k + stride[d]] > grid[k]) is_max = false;
    }
    if (is_max) candidates.push_back(k);
  }
  std::sort(candidates.begin(), candidates.end(), [&](long a, long b) { return grid[a] > grid[b]; });
  if (candidates.size() > static_cast<std::size_t>(options.refine_starts))
    candidates.resize(options.refine_starts);

  SupResult best;
  best.value = -1.0;
  best.converged = true;
  auto neg = [&](const Eigen::VectorXd& v) {
    if (v.cwiseAbs().maxCoeff() > B) return 0.0;
    return -std::abs(f(to_x(v)));
  };
  for (long k : candidates) {
    long rem = k;
    for (int d = 0; d < dim; ++d) {
      u(d) = -B + static_cast<int>(rem % n) * h;
      rem /= n;
    }
    const auto res = nelder_mead(neg, u, h, options.x_tol, options.max_iterations);
    const double v = -res.value;
    if (v > best.value) {
      best.value = v;
      best.argmax = to_x(res.x);
      best.converged = res.converged;
    }
  }
  return best;
}

}  // namespace igeom
