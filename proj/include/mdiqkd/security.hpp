// Phase-error bound for uncharacterized sources and the resulting key rates.
//
// Source coefficients: Alice's conjugate state jbar is expanded over her
// ordinary states with magnitudes A(j, l); Bob likewise with B(k, l).

#pragma once

#include "mdiqkd/statistics.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <string>

namespace mdiqkd {

/// Conjugate-setting pairs (x, y) whose ideal success probability is zero.
/// Each pair reads A row x and B row y.
struct ObjectivePair {
  int x;
  int y;
};

/// (0,1), (2,0) for qutrits; (0,1), (1,0) for qubits.
std::array<ObjectivePair, 2> objective_pairs(int dim);

struct SourceCoeffs {
  int dim = 3;
  Eigen::MatrixXd alice;  // dim x dim, row j = conjugate setting j
  Eigen::MatrixXd bob;

  /// Every entry 1/sqrt(dim): the ideal mutually unbiased sources.
  static SourceCoeffs nominal(int dim);
  /// Throws unless dimensions match and 0 <= entries <= a_max.
  void validate(double a_max = 1.0) const;
};

struct OptimizerConfig {
  int grid_points = 9;
  int refine_iterations = 400;
  int multistarts = 32;
  std::uint64_t seed = 0;
  double constraint_tolerance = 1e-9;
  double a_max = 1.0;

  void validate() const;
};

struct ErrorReport {
  double qs = 0;
  double epsilon = 0;
  double qp_bound = 0;
  bool feasible_found = true;
};

struct KeyRateReport {
  int dim = 3;
  double r_sifted = 0;
  double r_total = 0;
  ErrorReport error_report;
  double sift_factor = 0;
};

/// Off-diagonal share of the matched-ordinary success events.
double state_error_rate(const ProbTable& table);

/// S_xy(m). Requires A(x,m) B(y,m) > 0 (std::domain_error otherwise).
double s_bound(int x, int y, int m, const SourceCoeffs& coeffs, const ProbTable& table);

/// Smallest S_xy(m) over valid m, or 1 - qs when no m is valid.
double f_bound(int x, int y, const SourceCoeffs& coeffs, const ProbTable& table, double qs);

/// Total amount by which A row `row` misses its constraints (0 when satisfied).
/// `row` holds dim magnitudes.
double alice_row_violation(const ProbTable& table, int row, const double* a, double tol);
double bob_row_violation(const ProbTable& table, int row, const double* b, double tol);

/// Constraints on every A and B row that enters an objective pair.
bool feasible(const SourceCoeffs& coeffs, const ProbTable& table, double tol);

struct EpsilonResult {
  double epsilon = 0;
  SourceCoeffs argmax;
  bool feasible_found = true;
  std::array<double, 2> pair_values{};  // best f per objective pair, capped at 1 - qs
};

/// Largest max-over-pairs f on the feasible coefficient set, capped at 1 - qs.
/// The table is rescaled to unit matched-ordinary mass before the tolerance
/// is applied, so results do not depend on the overall detection rate.
EpsilonResult epsilon_max(const ProbTable& table, const OptimizerConfig& config);

/// min(epsilon + qs, 1).
double phase_error_bound(double epsilon, double qs);

/// log2 3 - (qs + qp) - H(qs) - H(qp) for qutrits, 1 - H(qs) - H(qp) for qubits.
double key_rate_sifted(int dim, double qs, double qp);

double sift_factor(int dim);

/// max(r_sifted, 0) * sift_factor(dim).
double key_rate_total(double r_sifted, int dim);

/// ideal: epsilon = 0, qp = qs. uncharacterized: epsilon from epsilon_max.
/// nominal: epsilon = max-over-pairs f at A = B = 1/sqrt(dim), no search.
enum class Mode { ideal, uncharacterized, nominal };

std::string to_string(Mode mode);
Mode parse_mode(const std::string& text);

KeyRateReport analyze(const ProbTable& table, int dim, const OptimizerConfig& config, Mode mode);

}  // namespace mdiqkd
