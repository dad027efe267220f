// Brute-force eavesdropper: explicit isometries acting on the two transmitted
// qudits, the statistics and post-selected state they produce, and numerical
// checks of every step between the observed statistics and the phase-error
// bound. Also a Monte Carlo run of the entanglement-based protocol.

#pragma once

#include "mdiqkd/security.hpp"
#include "mdiqkd/statistics.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace mdiqkd {

/// Isometry from the dim^2 input space |a, b> to flag (x) environment.
/// Rows [0, env_dim) carry the failure flag, rows [env_dim, 2 env_dim) the
/// success flag.
struct AttackModel {
  int dim = 3;
  int env_dim = 9;
  Eigen::MatrixXcd isometry;
  std::uint64_t seed = 0;
  double strength = 0;

  /// Largest deviation of isometry^dagger * isometry from the identity.
  double isometry_defect() const;
};

/// The no-eavesdropper channel: success exactly on Phi_0.
AttackModel honest_attack(int dim, int env_dim = 0);

/// (1 - strength) * honest + strength * complex Gaussian, orthonormalized.
/// env_dim = 0 selects dim^2.
AttackModel random_attack(int dim, std::uint64_t seed, double strength, int env_dim = 0);

/// Prepared states of both parties: 2*dim each, ordinary then conjugate.
struct Sources {
  std::vector<StateVector> alice;
  std::vector<StateVector> bob;
};

/// Computational ordinary states and the Fourier conjugate states.
Sources mub_sources(int dim);

/// Computational ordinary states; conjugate state k has amplitudes
/// a_j omega^(-k j) with seeded random magnitudes a_j around 1/sqrt(dim).
/// `spread` scales the magnitude perturbation.
Sources perturbed_sources(int dim, std::uint64_t seed, double spread);

/// A(k, j) = |<j|alpha-bar_k>| and likewise for Bob. Requires computational
/// ordinary states, the only frame in which the coefficients are unique.
SourceCoeffs true_coefficients(const Sources& sources);

struct AttackOutcome {
  ProbTable table;
  /// Normalized success-branch environment state per (Alice slot, Bob slot),
  /// stored at alice_slot * 2 * dim + bob_slot; zero when p = 0.
  std::vector<Eigen::VectorXcd> gamma;
  /// Post-selected Alice-Bob state built from the matched-ordinary branches.
  Eigen::MatrixXcd rho_ab;

  const Eigen::VectorXcd& gamma_at(SettingLabel a, SettingLabel b) const;
  /// sqrt(p) * gamma.
  Eigen::VectorXcd branch(SettingLabel a, SettingLabel b) const;
};

AttackOutcome attack_outcome(const AttackModel& attack, const Sources& sources);

/// Sum of <Phi~|rho|Phi~> over the Bell states with nonzero phase index.
double direct_phase_error(const AttackOutcome& outcome, const PhaseSet& phases = {});

/// Sum over all dim^2 phased Bell overlaps (1 for any valid state).
double bell_completeness(const AttackOutcome& outcome, const PhaseSet& phases);

/// Off-diagonal weight of rho_ab in the computational basis.
double state_error_from_rho(const AttackOutcome& outcome);

/// Every step from the direct phase error to the certified bound, with the
/// attack's own branches and the sources' true coefficients and phases.
/// Each flag is the conjunction over objective pairs and valid m.
struct ChainReport {
  bool bell_terms = true;            // direct Qp <= overlaps with l in {1,2} (qubits: l = 1) + Qs
  bool phase_max = true;             // |sum c_i e^{i zeta_i} branch_ii|^2 <= G^2
  bool triangle = true;              // per-environment-component squared triangle step
  bool cauchy_schwarz = true;        // expanded sum >= (c_m sqrt(N) - sum D)^2 - 2 D1 D2
  bool before_final = true;          // G^2 >= (c_m sqrt(N) - sum D)^2 - 2 D1 D2
  bool final_bound = true;           // N <= (sqrt(G^2 + 2 D1 D2) + sum D)^2 / c_m^2
  bool theorem = true;               // direct Qp <= max-over-pairs f(true coefficients) + Qs
  double worst_margin = 0;           // most negative RHS - LHS seen (0 if none negative)

  bool all() const {
    return bell_terms && phase_max && triangle && cauchy_schwarz && before_final && final_bound && theorem;
  }
};

ChainReport verify_bound_chain(const AttackOutcome& outcome, const Sources& sources, double slack = 1e-9);

/// True coefficients satisfy the constraints on every row, not only the rows
/// entering the objective pairs.
bool verify_constraints(const AttackOutcome& outcome, const SourceCoeffs& coeffs, double tol = 1e-9);

struct EdpConfig {
  std::int64_t trials = 100000;
  std::uint64_t seed = 0;
  ChannelParams channel;
  int dim = 3;
  /// Herald on every Bell outcome (true) or on Phi_0 only.
  bool full_bsm = true;
};

struct EdpReport {
  std::int64_t trials = 0;
  std::int64_t heralded = 0;
  std::array<std::int64_t, 2> sifted{};                // ordinary, conjugate
  std::array<std::int64_t, 2> errors_corrected{};
  std::array<std::int64_t, 2> errors_uncorrected{};
  std::array<std::int64_t, 9> outcome_counts{};        // per Bell outcome among heralded rounds

  double qber(Basis b, bool corrected = true) const;
};

/// Both parties hold Phi_0 pairs, send one half each to the relay, which
/// performs the Bell measurement; heralded rounds are measured in
/// independently chosen bases and Bob applies the outcome correction.
EdpReport edp_roundtrip(const EdpConfig& config);

/// One certification trial: everything needed for a report row.
struct CertRow {
  int dim = 3;
  std::int64_t trial = 0;
  std::uint64_t seed = 0;
  double strength = 0;
  std::string source_kind;
  double qs = 0;
  double epsilon = 0;
  bool feasible_found = true;
  double qp_direct = 0;
  double qp_bound = 0;
  double f_true = 0;
  bool identity_ok = true;
  bool constraints_ok = true;
  ChainReport chain;
  bool witness_ok = true;  // epsilon >= f(true) - 1e-6 (or capped)
  bool bound_ok = true;    // qp_direct <= qp_bound + 1e-6

  bool passed() const { return identity_ok && constraints_ok && chain.all() && witness_ok && bound_ok; }
};

/// Trial `trial` of a run rooted at `root_seed`. Even trials use ideal
/// sources, odd trials perturbed ones; strength is drawn per trial.
CertRow certify_trial(int dim, std::uint64_t root_seed, std::int64_t trial, const OptimizerConfig& optimizer);

/// Cheaper search settings used for certification runs.
OptimizerConfig certification_optimizer(std::uint64_t seed);

}  // namespace mdiqkd
