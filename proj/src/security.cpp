#include "mdiqkd/security.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace mdiqkd {

std::array<ObjectivePair, 2> objective_pairs(int dim) {
  check_dim(dim);
  if (dim == 3) return {{{0, 1}, {2, 0}}};
  return {{{0, 1}, {1, 0}}};
}

SourceCoeffs SourceCoeffs::nominal(int dim) {
  check_dim(dim);
  const double v = 1 / std::sqrt(double(dim));
  return {dim, Eigen::MatrixXd::Constant(dim, dim, v), Eigen::MatrixXd::Constant(dim, dim, v)};
}

void SourceCoeffs::validate(double a_max) const {
  check_dim(dim);
  if (alice.rows() != dim || alice.cols() != dim || bob.rows() != dim || bob.cols() != dim)
    throw std::invalid_argument("SourceCoeffs: coefficient matrices must be dim x dim");
  for (const auto* m : {&alice, &bob})
    if (m->hasNaN() || m->minCoeff() < 0 || m->maxCoeff() > a_max)
      throw std::invalid_argument("SourceCoeffs: coefficient outside [0, a_max]");
}

void OptimizerConfig::validate() const {
  if (grid_points < 2) throw std::invalid_argument("OptimizerConfig: grid_points must be >= 2");
  if (refine_iterations < 0) throw std::invalid_argument("OptimizerConfig: refine_iterations must be >= 0");
  if (multistarts < 1) throw std::invalid_argument("OptimizerConfig: multistarts must be >= 1");
  if (!(constraint_tolerance >= 0)) throw std::invalid_argument("OptimizerConfig: constraint_tolerance must be >= 0");
  if (!(a_max > 0)) throw std::invalid_argument("OptimizerConfig: a_max must be positive");
}

double state_error_rate(const ProbTable& table) {
  const double total = table.matched_ordinary_sum();
  if (!(total > 0)) throw std::domain_error("state_error_rate: no matched-ordinary success events");
  const double diag = table.entries().topLeftCorner(table.dim(), table.dim()).diagonal().sum();
  return std::clamp((total - diag) / total, 0.0, 1.0);
}

namespace {

void check_setting(int dim, int v, const char* what) {
  if (v < 0 || v >= dim) throw std::invalid_argument(std::string(what) + " out of range");
}

void check_coeffs(const SourceCoeffs& c, const ProbTable& t) {
  if (c.dim != t.dim() || c.alice.rows() != c.dim || c.alice.cols() != c.dim || c.bob.rows() != c.dim ||
      c.bob.cols() != c.dim)
    throw std::invalid_argument("coefficients do not match the table dimension");
}

}  // namespace

double s_bound(int x, int y, int m, const SourceCoeffs& coeffs, const ProbTable& table) {
  const int dim = table.dim();
  check_coeffs(coeffs, table);
  check_setting(dim, x, "x");
  check_setting(dim, y, "y");
  check_setting(dim, m, "m");
  auto c = [&](int i) { return coeffs.alice(x, wrap(i, dim)) * coeffs.bob(y, wrap(i, dim)); };
  const double cm = c(m);
  if (!(cm > 0)) throw std::domain_error("s_bound: A(x,m) B(y,m) must be positive");
  const double total = table.matched_ordinary_sum();
  if (!(total > 0)) throw std::domain_error("s_bound: no matched-ordinary success events");

  double g = std::sqrt(table.bar_bar(x, y));
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      if (i != j) g += coeffs.alice(x, i) * coeffs.bob(y, j) * std::sqrt(table.ordinary(i, j));
  auto D = [&](int k) {
    const int n = wrap(m + k, dim);
    return std::abs(cm - c(n)) * std::sqrt(table.ordinary(n, n));
  };
  if (dim == 2) {
    const double s = g + D(1);
    return s * s / (2 * cm * cm * total);
  }
  const double d1 = D(1);
  const double d2 = D(2);
  const double s = std::sqrt(g * g + 2 * d1 * d2) + d1 + d2;
  return 2 * s * s / (3 * cm * cm * total);
}

double f_bound(int x, int y, const SourceCoeffs& coeffs, const ProbTable& table, double qs) {
  check_coeffs(coeffs, table);
  double best = std::numeric_limits<double>::infinity();
  for (int m = 0; m < table.dim(); ++m)
    if (coeffs.alice(x, m) * coeffs.bob(y, m) > 0) best = std::min(best, s_bound(x, y, m, coeffs, table));
  return std::isinf(best) ? 1 - qs : best;
}

namespace {

// Sum of positive parts of |p_target(i) - sum a^2 p(l,i)| - 2 sum a_l a_l+1 sqrt(..) - tol,
// with p(l, i) supplied by `prob(l, i)`.
template <typename Target, typename Prob>
double row_violation(int dim, const double* a, double tol, Target target, Prob prob) {
  const int pairs = dim == 3 ? 3 : 1;
  double v = 0;
  for (int i = 0; i < dim; ++i) {
    double quad = 0;
    for (int l = 0; l < dim; ++l) quad += a[l] * a[l] * prob(l, i);
    double cross = 0;
    for (int l = 0; l < pairs; ++l) {
      const int n = (l + 1) % dim;
      cross += a[l] * a[n] * std::sqrt(prob(l, i) * prob(n, i));
    }
    v += std::max(0.0, std::abs(target(i) - quad) - 2 * cross - tol);
  }
  return v;
}

}  // namespace

double alice_row_violation(const ProbTable& t, int row, const double* a, double tol) {
  return row_violation(
      t.dim(), a, tol, [&](int i) { return t.bar_ordinary(row, i); }, [&](int l, int i) { return t.ordinary(l, i); });
}

double bob_row_violation(const ProbTable& t, int row, const double* b, double tol) {
  return row_violation(
      t.dim(), b, tol, [&](int i) { return t.ordinary_bar(i, row); }, [&](int l, int i) { return t.ordinary(i, l); });
}

bool feasible(const SourceCoeffs& coeffs, const ProbTable& table, double tol) {
  check_coeffs(coeffs, table);
  for (const auto& p : objective_pairs(table.dim())) {
    const Eigen::VectorXd a = coeffs.alice.row(p.x).transpose();
    const Eigen::VectorXd b = coeffs.bob.row(p.y).transpose();
    if (alice_row_violation(table, p.x, a.data(), tol) > 0) return false;
    if (bob_row_violation(table, p.y, b.data(), tol) > 0) return false;
  }
  return true;
}

double phase_error_bound(double epsilon, double qs) { return std::min(epsilon + qs, 1.0); }

double key_rate_sifted(int dim, double qs, double qp) {
  check_dim(dim);
  const double h = shannon_entropy(qs) + shannon_entropy(qp);
  if (dim == 2) return 1 - h;
  return std::log2(3.0) - (qs + qp) - h;
}

double sift_factor(int dim) {
  check_dim(dim);
  return dim == 3 ? 1.0 / 6.0 : 1.0 / 4.0;
}

double key_rate_total(double r_sifted, int dim) { return std::max(r_sifted, 0.0) * sift_factor(dim); }

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::ideal: return "ideal";
    case Mode::uncharacterized: return "uncharacterized";
    case Mode::nominal: return "nominal";
  }
  return "?";
}

Mode parse_mode(const std::string& text) {
  if (text == "ideal") return Mode::ideal;
  if (text == "uncharacterized") return Mode::uncharacterized;
  if (text == "nominal") return Mode::nominal;
  throw std::invalid_argument("unknown mode '" + text + "'");
}

KeyRateReport analyze(const ProbTable& table, int dim, const OptimizerConfig& config, Mode mode) {
  if (dim != table.dim()) throw std::invalid_argument("analyze: dim does not match the table");
  config.validate();
  KeyRateReport report;
  report.dim = dim;
  report.sift_factor = sift_factor(dim);
  auto& e = report.error_report;
  e.qs = state_error_rate(table);

  double qp_rate = e.qs;
  if (mode == Mode::ideal) {
    e.epsilon = 0;
    e.qp_bound = e.qs;
  } else {
    if (mode == Mode::uncharacterized) {
      const auto r = epsilon_max(table, config);
      e.epsilon = r.epsilon;
      e.feasible_found = r.feasible_found;
    } else {
      const auto nominal = SourceCoeffs::nominal(dim);
      const auto t = table.normalized();
      double f = 0;
      for (const auto& p : objective_pairs(dim)) f = std::max(f, f_bound(p.x, p.y, nominal, t, e.qs));
      e.epsilon = std::clamp(f, 0.0, 1 - e.qs);
    }
    e.qp_bound = phase_error_bound(e.epsilon, e.qs);
    // The rate bound falls with Qp only up to 1 - 1/dim; beyond that the
    // worst case consistent with Qp <= qp_bound sits at the turning point.
    qp_rate = std::min(e.qp_bound, 1 - 1.0 / dim);
  }
  report.r_sifted = key_rate_sifted(dim, e.qs, qp_rate);
  report.r_total = key_rate_total(report.r_sifted, dim);
  return report;
}

}  // namespace mdiqkd
