// Derivative-free simplex minimizer, used for the coefficient search.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

namespace mdiqkd {

struct SimplexResult {
  Eigen::VectorXd x;
  double value;
  int evaluations;
};

/// Minimizes f from `start` with an axis-aligned initial simplex of edge
/// `step`. Stops after `max_evaluations` or when the simplex spread in value
/// and position both fall below `tol`, or as soon as a vertex reaches
/// `stop_below`. Ties keep the earlier vertex, so the run is fully
/// deterministic.
template <typename F>
SimplexResult nelder_mead(F&& f, const Eigen::VectorXd& start, double step, int max_evaluations,
                          double tol = 1e-12, double stop_below = -std::numeric_limits<double>::infinity()) {
  const Eigen::Index n = start.size();
  std::vector<Eigen::VectorXd> pts;
  std::vector<double> vals;
  pts.reserve(n + 1);
  pts.push_back(start);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd p = start;
    p(i) += step;
    pts.push_back(p);
  }
  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& p) {
    ++evals;
    return f(p);
  };
  for (const auto& p : pts) vals.push_back(eval(p));

  std::vector<int> order(n + 1);
  while (evals < max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] < vals[b]; });
    const int best = order.front();
    const int worst = order.back();
    const int second = order[n - 1];
    if (vals[best] <= stop_below) break;

    double spread = 0;
    for (const auto& p : pts) spread = std::max(spread, (p - pts[best]).cwiseAbs().maxCoeff());
    if (vals[worst] - vals[best] <= tol && spread <= tol) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i <= n; ++i)
      if (i != worst) centroid += pts[i];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd xr = centroid + (centroid - pts[worst]);
    const double fr = eval(xr);
    if (fr < vals[best]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - pts[worst]);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = xr;
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    const Eigen::VectorXd xc =
        outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid)) : Eigen::VectorXd(centroid + 0.5 * (pts[worst] - centroid));
    const double fc = eval(xc);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = xc;
      vals[worst] = fc;
      continue;
    }
    for (Eigen::Index i = 0; i <= n; ++i) {
      if (i == best) continue;
      pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
      vals[i] = eval(pts[i]);
    }
  }
  const auto it = std::min_element(vals.begin(), vals.end());
  const auto idx = static_cast<std::size_t>(it - vals.begin());
  return {pts[idx], vals[idx], evals};
}

}  // namespace mdiqkd
