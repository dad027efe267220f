// Search for the largest f over feasible source coefficients.
//
// The constraints on each coefficient row involve only that row, and each
// objective pair (x, y) reads one A row and one B row, so the problem splits
// into one 2*dim-variable search per pair. For channel statistics the feasible
// set of a row is a thin shell around 1/sqrt(dim) that a global grid rarely
// hits, so rows are first sampled around feasible anchors, then pairs of row
// samples are ranked and the best are polished with Nelder-Mead.

#include "mdiqkd/nelder_mead.hpp"
#include "mdiqkd/rng.hpp"
#include "mdiqkd/security.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <tuple>
#include <vector>

namespace mdiqkd {

namespace {

using Row = std::array<double, 3>;

constexpr std::size_t kMaxRowSamples = 600;
constexpr int kAnchorEvaluations = 3000;
constexpr int kRefineRestarts = 3;

struct RowProblem {
  const ProbTable* table;
  bool alice;
  int row;
  double tol;
  double a_max;

  int dim() const { return table->dim(); }

  double box_violation(const double* a) const {
    double v = 0;
    for (int i = 0; i < dim(); ++i) v += std::max(0.0, -a[i]) + std::max(0.0, a[i] - a_max);
    return v;
  }
  double violation(const double* a) const {
    const double v = alice ? alice_row_violation(*table, row, a, tol) : bob_row_violation(*table, row, a, tol);
    return v + box_violation(a);
  }
  bool ok(const Row& a) const { return violation(a.data()) == 0; }
};

// f for one pair with the square roots of the table hoisted out.
class PairObjective {
 public:
  PairObjective(const ProbTable& t, ObjectivePair pair, double qs) : dim_(t.dim()), cap_(1 - qs) {
    sqrt_bar_ = std::sqrt(t.bar_bar(pair.x, pair.y));
    total_ = t.matched_ordinary_sum();
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) sqrt_p_[i][j] = std::sqrt(t.ordinary(i, j));
  }

  double cap() const { return cap_; }

  double operator()(const double* a, const double* b) const {
    double g = sqrt_bar_;
    std::array<double, 3> c{};
    for (int i = 0; i < dim_; ++i) {
      c[i] = a[i] * b[i];
      for (int j = 0; j < dim_; ++j)
        if (i != j) g += a[i] * b[j] * sqrt_p_[i][j];
    }
    double best = std::numeric_limits<double>::infinity();
    for (int m = 0; m < dim_; ++m) {
      if (!(c[m] > 0)) continue;
      auto D = [&](int k) {
        const int n = (m + k) % dim_;
        return std::abs(c[m] - c[n]) * sqrt_p_[n][n];
      };
      double s;
      if (dim_ == 2) {
        const double u = g + D(1);
        s = u * u / (2 * c[m] * c[m] * total_);
      } else {
        const double d1 = D(1);
        const double d2 = D(2);
        const double u = std::sqrt(g * g + 2 * d1 * d2) + d1 + d2;
        s = 2 * u * u / (3 * c[m] * c[m] * total_);
      }
      best = std::min(best, s);
    }
    return std::isinf(best) ? cap_ : best;
  }

  double capped(const double* a, const double* b) const { return std::min((*this)(a, b), cap_); }

 private:
  int dim_;
  double cap_;
  double sqrt_bar_ = 0;
  double total_ = 1;
  double sqrt_p_[3][3]{};
};

Row to_row(const Eigen::VectorXd& v, int offset, int dim) {
  Row r{};
  for (int i = 0; i < dim; ++i) r[i] = v(offset + i);
  return r;
}

// Calls fn(point) for every point of a g^dim grid over [lo, hi].
template <typename Fn>
void for_each_grid_point(int dim, int g, const Row& lo, const Row& hi, Fn&& fn) {
  std::array<int, 3> idx{};
  const int total = dim == 3 ? g * g * g : g * g;
  for (int n = 0; n < total; ++n) {
    int rest = n;
    Row p{};
    for (int i = dim - 1; i >= 0; --i) {
      idx[i] = rest % g;
      rest /= g;
      p[i] = lo[i] + (hi[i] - lo[i]) * idx[i] / (g - 1);
    }
    fn(p);
  }
}

// Furthest feasible point from `a` along +/- axis `axis`, by bisection.
Row axis_extent(const RowProblem& prob, Row a, int axis, double sign) {
  const double limit = sign > 0 ? prob.a_max - a[axis] : a[axis];
  if (limit <= 0) return a;
  Row probe = a;
  probe[axis] = a[axis] + sign * limit;
  if (prob.ok(probe)) return probe;
  double lo = 0, hi = limit;
  for (int it = 0; it < 60 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    probe[axis] = a[axis] + sign * mid;
    (prob.ok(probe) ? lo : hi) = mid;
  }
  probe[axis] = a[axis] + sign * lo;
  return probe;
}

struct RowSamples {
  std::vector<Row> points;  // sorted lexicographically
  Row lo{}, hi{};
};

RowSamples sample_row(const RowProblem& prob, const OptimizerConfig& cfg, std::uint64_t stream) {
  const int dim = prob.dim();
  std::vector<Row> found;

  Row zero{}, top{};
  for (int i = 0; i < dim; ++i) top[i] = prob.a_max;
  for_each_grid_point(dim, cfg.grid_points, zero, top, [&](const Row& p) {
    if (prob.ok(p)) found.push_back(p);
  });

  // Anchors: drive the violation to zero from the nominal point and from
  // seeded random starts.
  auto rng = make_rng(cfg.seed, {stream, 0});
  std::uniform_real_distribution<double> unit(0.0, prob.a_max);
  const int random_anchors = std::max(1, cfg.multistarts / 4);
  std::vector<Row> anchors;
  for (int s = 0; s <= random_anchors; ++s) {
    Eigen::VectorXd start(dim);
    for (int i = 0; i < dim; ++i) start(i) = s == 0 ? std::min(1 / std::sqrt(double(dim)), prob.a_max) : unit(rng);
    const auto r = nelder_mead([&](const Eigen::VectorXd& v) { return prob.violation(v.data()); }, start,
                               0.1 * prob.a_max, kAnchorEvaluations, 1e-15, 0.0);
    const Row a = to_row(r.x, 0, dim);
    if (prob.ok(a)) anchors.push_back(a);
  }
  found.insert(found.end(), anchors.begin(), anchors.end());
  if (found.empty()) return {};

  // Bounding box of the feasible set seen from the anchors, then a local grid.
  Row lo = found.front(), hi = found.front();
  auto extend = [&](const Row& p) {
    for (int i = 0; i < dim; ++i) {
      lo[i] = std::min(lo[i], p[i]);
      hi[i] = std::max(hi[i], p[i]);
    }
  };
  for (const auto& p : found) extend(p);
  const std::vector<Row> seeds = anchors.empty() ? std::vector<Row>{found.front()} : anchors;
  for (const auto& a : seeds)
    for (int axis = 0; axis < dim; ++axis)
      for (double sign : {-1.0, 1.0}) {
        const Row e = axis_extent(prob, a, axis, sign);
        found.push_back(e);
        extend(e);
      }
  for_each_grid_point(dim, cfg.grid_points, lo, hi, [&](const Row& p) {
    if (prob.ok(p)) found.push_back(p);
  });

  std::sort(found.begin(), found.end());
  found.erase(std::unique(found.begin(), found.end()), found.end());
  if (found.size() > kMaxRowSamples) {
    std::vector<Row> thin;
    const double stride = double(found.size()) / kMaxRowSamples;
    for (std::size_t k = 0; k < kMaxRowSamples; ++k) thin.push_back(found[static_cast<std::size_t>(k * stride)]);
    found.swap(thin);
  }
  return {std::move(found), lo, hi};
}

struct Candidate {
  double value;
  Row a, b;
};

// Higher value first; among equal values the lexicographically smaller
// coefficient vector wins.
bool better(const Candidate& l, const Candidate& r) {
  if (l.value != r.value) return l.value > r.value;
  return std::tie(l.a, l.b) < std::tie(r.a, r.b);
}

struct PairResult {
  bool feasible = false;
  Candidate best{};
};

PairResult optimize_pair(const ProbTable& t, ObjectivePair pair, double qs, const OptimizerConfig& cfg, int pair_index) {
  const int dim = t.dim();
  const RowProblem pa{&t, true, pair.x, cfg.constraint_tolerance, cfg.a_max};
  const RowProblem pb{&t, false, pair.y, cfg.constraint_tolerance, cfg.a_max};
  const auto sa = sample_row(pa, cfg, 2 * pair_index + 1);
  const auto sb = sample_row(pb, cfg, 2 * pair_index + 2);
  if (sa.points.empty() || sb.points.empty()) return {};

  const PairObjective obj(t, pair, qs);
  const auto k = static_cast<std::size_t>(cfg.multistarts);
  std::vector<Candidate> all;
  all.reserve(sa.points.size() * sb.points.size());
  for (const auto& a : sa.points)
    for (const auto& b : sb.points) all.push_back({obj.capped(a.data(), b.data()), a, b});
  const std::size_t keep = std::min(all.size(), k - k / 4);
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(), better);
  PairResult out{true, all.front()};
  if (out.best.value >= obj.cap()) return out;

  std::vector<Candidate> starts(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep));
  auto rng = make_rng(cfg.seed, {static_cast<std::uint64_t>(2 * pair_index + 1), 1});
  std::uniform_int_distribution<std::size_t> pick(0, all.size() - 1);
  while (starts.size() < k) starts.push_back(all[pick(rng)]);
  all.clear();
  all.shrink_to_fit();

  double width = 0;
  for (int i = 0; i < dim; ++i) width = std::max({width, sa.hi[i] - sa.lo[i], sb.hi[i] - sb.lo[i]});
  const double step0 = std::max(0.5 * width, 1e-9);

  auto h = [&](const Eigen::VectorXd& z) {
    const double v = pa.violation(z.data()) + pb.violation(z.data() + dim);
    if (v > 0) return 1 + v;
    return -obj.capped(z.data(), z.data() + dim);
  };
  for (const auto& s : starts) {
    Eigen::VectorXd z(2 * dim);
    for (int i = 0; i < dim; ++i) {
      z(i) = s.a[i];
      z(dim + i) = s.b[i];
    }
    double step = step0;
    for (int r = 0; r < kRefineRestarts && cfg.refine_iterations > 0; ++r) {
      const auto res = nelder_mead(h, z, step, cfg.refine_iterations, 1e-14);
      if (res.value < h(z)) z = res.x;
      step *= 0.5;
    }
    if (h(z) <= 0) {
      const Candidate c{obj.capped(z.data(), z.data() + dim), to_row(z, 0, dim), to_row(z, dim, dim)};
      if (better(c, out.best)) out.best = c;
    }
  }
  return out;
}

}  // namespace

EpsilonResult epsilon_max(const ProbTable& table, const OptimizerConfig& config) {
  config.validate();
  const double qs = state_error_rate(table);
  const ProbTable t = table.normalized();
  const int dim = t.dim();
  EpsilonResult result;
  result.argmax = SourceCoeffs::nominal(dim);
  const auto pairs = objective_pairs(dim);
  double eps = 0;
  for (int p = 0; p < 2; ++p) {
    const auto r = optimize_pair(t, pairs[p], qs, config, p);
    if (!r.feasible) {
      result.feasible_found = false;
      result.epsilon = 1 - qs;
      result.pair_values = {1 - qs, 1 - qs};
      return result;
    }
    result.pair_values[p] = r.best.value;
    eps = std::max(eps, r.best.value);
    for (int i = 0; i < dim; ++i) {
      result.argmax.alice(pairs[p].x, i) = r.best.a[i];
      result.argmax.bob(pairs[p].y, i) = r.best.b[i];
    }
  }
  result.epsilon = std::clamp(eps, 0.0, 1 - qs);
  return result;
}

}  // namespace mdiqkd
