#include "mdiqkd/eve_oracle.hpp"

#include "mdiqkd/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace mdiqkd {

double AttackModel::isometry_defect() const {
  const Eigen::MatrixXcd g = isometry.adjoint() * isometry;
  return (g - Eigen::MatrixXcd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

namespace {

int resolve_env(int dim, int env_dim) {
  check_dim(dim);
  const int e = env_dim == 0 ? dim * dim : env_dim;
  if (e < dim * dim) throw std::invalid_argument("environment dimension must be at least dim^2");
  return e;
}

}  // namespace

AttackModel honest_attack(int dim, int env_dim) {
  const int e = resolve_env(dim, env_dim);
  const int n = dim * dim;
  AttackModel m{dim, e, Eigen::MatrixXcd::Zero(2 * e, n), 0, 0.0};
  m.isometry.row(e) = me_state(dim, 0).adjoint();
  for (int k = 1; k < n; ++k) m.isometry.row(k - 1) = me_state(dim, k).adjoint();
  return m;
}

AttackModel random_attack(int dim, std::uint64_t seed, double strength, int env_dim) {
  if (!(strength >= 0 && strength <= 1)) throw std::invalid_argument("random_attack: strength outside [0,1]");
  AttackModel m = honest_attack(dim, env_dim);
  m.seed = seed;
  m.strength = strength;
  const int rows = 2 * m.env_dim;
  const int cols = dim * dim;
  auto rng = make_rng(seed, {0x61747461636bULL});
  std::normal_distribution<double> normal(0.0, std::sqrt(1.0 / (4.0 * m.env_dim)));
  Eigen::MatrixXcd g(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(r, c) = {re, im};
    }
  const Eigen::MatrixXcd mixed = (1 - strength) * m.isometry + strength * g;
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(mixed);
  Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(rows, cols);
  // Fix the column phases so that Q R keeps a positive diagonal; with zero
  // strength this returns the honest isometry itself.
  for (int c = 0; c < cols; ++c) {
    const auto r = qr.matrixQR()(c, c);
    if (std::abs(r) > 0) q.col(c) *= r / std::abs(r);
  }
  m.isometry = q;
  return m;
}

Sources mub_sources(int dim) {
  const auto s = ideal_sources(dim);
  return {s, s};
}

Sources perturbed_sources(int dim, std::uint64_t seed, double spread) {
  check_dim(dim);
  Sources out;
  auto rng = make_rng(seed, {0x736f75726365ULL});
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto* party : {&out.alice, &out.bob}) {
    for (int i = 0; i < dim; ++i) party->push_back(computational_state(dim, i));
    for (int k = 0; k < dim; ++k) {
      Eigen::VectorXd mag(dim);
      for (int j = 0; j < dim; ++j) mag(j) = std::abs(1 / std::sqrt(double(dim)) + spread * normal(rng));
      if (!(mag.norm() > 0)) mag.setConstant(1);
      mag.normalize();
      StateVector s(dim);
      for (int j = 0; j < dim; ++j) s(j) = mag(j) * root_of_unity(dim, -k * j);
      party->push_back(std::move(s));
    }
  }
  return out;
}

namespace {

void check_sources(const Sources& s) {
  if (s.alice.size() != s.bob.size() || (s.alice.size() != 4 && s.alice.size() != 6))
    throw std::invalid_argument("Sources: need 2*dim states per party");
  const int dim = static_cast<int>(s.alice.size() / 2);
  for (const auto* party : {&s.alice, &s.bob})
    for (const auto& v : *party)
      if (v.size() != dim) throw std::invalid_argument("Sources: state dimension mismatch");
}

// Phase of <j|conjugate state k>.
Eigen::MatrixXd true_phases(const std::vector<StateVector>& party, int dim) {
  Eigen::MatrixXd th(dim, dim);
  for (int k = 0; k < dim; ++k)
    for (int j = 0; j < dim; ++j) th(k, j) = std::arg(party[dim + k](j));
  return th;
}

}  // namespace

SourceCoeffs true_coefficients(const Sources& sources) {
  check_sources(sources);
  const int dim = static_cast<int>(sources.alice.size() / 2);
  SourceCoeffs c{dim, Eigen::MatrixXd(dim, dim), Eigen::MatrixXd(dim, dim)};
  for (const auto* party : {&sources.alice, &sources.bob}) {
    for (int i = 0; i < dim; ++i)
      if (((*party)[i] - computational_state(dim, i)).norm() > 1e-12)
        throw std::invalid_argument("true_coefficients: ordinary states must be computational");
    Eigen::MatrixXd& m = party == &sources.alice ? c.alice : c.bob;
    for (int k = 0; k < dim; ++k)
      for (int j = 0; j < dim; ++j) m(k, j) = std::abs((*party)[dim + k](j));
  }
  return c;
}

const Eigen::VectorXcd& AttackOutcome::gamma_at(SettingLabel a, SettingLabel b) const {
  const int d = table.dim();
  return gamma[ProbTable::slot(d, a) * 2 * d + ProbTable::slot(d, b)];
}

Eigen::VectorXcd AttackOutcome::branch(SettingLabel a, SettingLabel b) const {
  return std::sqrt(table(a, b)) * gamma_at(a, b);
}

AttackOutcome attack_outcome(const AttackModel& attack, const Sources& sources) {
  check_sources(sources);
  const int dim = attack.dim;
  if (static_cast<int>(sources.alice.size()) != 2 * dim)
    throw std::invalid_argument("attack_outcome: sources do not match the attack dimension");
  const int n = 2 * dim;
  const int e = attack.env_dim;
  Eigen::MatrixXd p(n, n);
  std::vector<Eigen::VectorXcd> gamma(n * n);
  Eigen::MatrixXcd w(dim * dim, e);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const Eigen::VectorXcd out = attack.isometry * tensor(sources.alice[a], sources.bob[b]);
      const Eigen::VectorXcd succ = out.tail(e);
      const double prob = std::min(succ.squaredNorm(), 1.0);
      p(a, b) = prob;
      gamma[a * n + b] = prob > 0 ? Eigen::VectorXcd(succ / std::sqrt(prob)) : Eigen::VectorXcd::Zero(e);
      if (a < dim && b < dim) w.row(a * dim + b) = succ.transpose();
    }
  Eigen::MatrixXcd rho = w * w.adjoint();
  const double tr = rho.trace().real();
  if (!(tr > 0)) throw std::domain_error("attack_outcome: no matched-ordinary success events");
  rho /= tr;
  return {ProbTable(dim, std::move(p)), std::move(gamma), std::move(rho)};
}

namespace {

double overlap(const AttackOutcome& o, int bell, const PhaseSet& phases) {
  const StateVector phi = me_state(o.table.dim(), bell, phases);
  return (phi.adjoint() * o.rho_ab * phi)(0, 0).real();
}

}  // namespace

double direct_phase_error(const AttackOutcome& outcome, const PhaseSet& phases) {
  const int dim = outcome.table.dim();
  double q = 0;
  for (int t = 0; t < dim * dim; ++t)
    if (t % dim != 0) q += overlap(outcome, t, phases);
  return q;
}

double bell_completeness(const AttackOutcome& outcome, const PhaseSet& phases) {
  const int dim = outcome.table.dim();
  double s = 0;
  for (int t = 0; t < dim * dim; ++t) s += overlap(outcome, t, phases);
  return s;
}

double state_error_from_rho(const AttackOutcome& outcome) {
  const int dim = outcome.table.dim();
  double q = 0;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      if (i != j) q += outcome.rho_ab(i * dim + j, i * dim + j).real();
  return q;
}

ChainReport verify_bound_chain(const AttackOutcome& outcome, const Sources& sources, double slack) {
  const ProbTable& t = outcome.table;
  const int dim = t.dim();
  const SourceCoeffs coeffs = true_coefficients(sources);
  const Eigen::MatrixXd theta = true_phases(sources.alice, dim);
  const Eigen::MatrixXd phi = true_phases(sources.bob, dim);
  const double qs = state_error_rate(t);
  const double direct = direct_phase_error(outcome);

  ChainReport r;
  auto check = [&](bool& flag, double lhs, double rhs) {
    const double margin = rhs - lhs;
    r.worst_margin = std::min(r.worst_margin, margin);
    if (!(margin >= -slack)) flag = false;
  };

  double phase_terms = 0;
  for (int l = 1; l < (dim == 3 ? 3 : 2); ++l) phase_terms += overlap(outcome, l, {});
  check(r.bell_terms, direct, phase_terms + qs);

  auto ord = [](int i) { return SettingLabel{Basis::ordinary, i}; };
  auto bar = [](int i) { return SettingLabel{Basis::bar, i}; };
  double f_max = 0;
  for (const auto& pair : objective_pairs(dim)) {
    const int x = pair.x;
    const int y = pair.y;
    f_max = std::max(f_max, f_bound(x, y, coeffs, t, qs));

    std::vector<Eigen::VectorXcd> u(dim);
    std::vector<double> c(dim);
    Eigen::VectorXcd weighted = Eigen::VectorXcd::Zero(outcome.gamma.front().size());
    Eigen::VectorXcd plain = weighted;
    for (int i = 0; i < dim; ++i) {
      u[i] = std::polar(1.0, theta(x, i) + phi(y, i)) * outcome.branch(ord(i), ord(i));
      c[i] = coeffs.alice(x, i) * coeffs.bob(y, i);
      weighted += c[i] * u[i];
      plain += u[i];
    }
    double g = std::sqrt(t(bar(x), bar(y)));
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        if (i != j) g += coeffs.alice(x, i) * coeffs.bob(y, j) * std::sqrt(t.ordinary(i, j));
    const double l_val = weighted.squaredNorm();
    const double n_val = plain.squaredNorm();
    check(r.phase_max, l_val, g * g);

    for (int m = 0; m < dim; ++m) {
      if (!(c[m] > 0)) continue;
      std::vector<double> d;
      std::vector<const Eigen::VectorXcd*> gk;
      for (int k = 1; k < dim; ++k) {
        const int s = (m + k) % dim;
        d.push_back(std::abs(c[m] - c[s]) * std::sqrt(t.ordinary(s, s)));
        gk.push_back(&outcome.gamma_at(ord(s), ord(s)));
      }
      const double d_sum = std::accumulate(d.begin(), d.end(), 0.0);
      const double d_prod = dim == 3 ? d[0] * d[1] : 0.0;

      double expanded = 0;
      for (Eigen::Index n = 0; n < plain.size(); ++n) {
        double v = c[m] * std::abs(plain(n));
        for (std::size_t k = 0; k < d.size(); ++k) v -= d[k] * std::abs((*gk[k])(n));
        expanded += v * v;
      }
      check(r.triangle, expanded, l_val);
      const double lower = std::pow(c[m] * std::sqrt(n_val) - d_sum, 2) - 2 * d_prod;
      check(r.cauchy_schwarz, lower, expanded);
      check(r.before_final, lower, g * g);
      const double upper = std::pow(std::sqrt(g * g + 2 * d_prod) + d_sum, 2) / (c[m] * c[m]);
      check(r.final_bound, n_val, upper);
    }
  }
  check(r.theorem, direct, f_max + qs);
  return r;
}

bool verify_constraints(const AttackOutcome& outcome, const SourceCoeffs& coeffs, double tol) {
  const ProbTable& t = outcome.table;
  if (coeffs.dim != t.dim()) throw std::invalid_argument("verify_constraints: dimension mismatch");
  for (int j = 0; j < t.dim(); ++j) {
    const Eigen::VectorXd a = coeffs.alice.row(j).transpose();
    const Eigen::VectorXd b = coeffs.bob.row(j).transpose();
    if (alice_row_violation(t, j, a.data(), tol) > 0 || bob_row_violation(t, j, b.data(), tol) > 0) return false;
  }
  return true;
}

double EdpReport::qber(Basis b, bool corrected) const {
  const int i = b == Basis::ordinary ? 0 : 1;
  if (sifted[i] == 0) return 0;
  return double(corrected ? errors_corrected[i] : errors_uncorrected[i]) / double(sifted[i]);
}

EdpReport edp_roundtrip(const EdpConfig& config) {
  if (config.trials < 1) throw std::invalid_argument("edp_roundtrip: trials must be >= 1");
  const int dim = config.dim;
  check_dim(dim);
  const int n = dim * dim;
  const auto w = channel_weights(config.channel, dim);

  // Alice-Bob state after Bell outcome t on the two transmitted halves, and
  // its joint outcome distribution in each basis.
  const StateVector phi0 = me_state(dim, 0);
  std::vector<double> outcome_prob(n);
  std::vector<std::array<std::vector<double>, 2>> joint(n);
  for (int t = 0; t < n; ++t) {
    const StateVector bell = me_state(dim, t);
    StateVector ab = StateVector::Zero(n);
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b)
        for (int c = 0; c < dim; ++c)
          for (int e = 0; e < dim; ++e)
            ab(a * dim + b) += std::conj(bell(c * dim + e)) * phi0(a * dim + c) * phi0(b * dim + e);
    outcome_prob[t] = ab.squaredNorm();
    ab.normalize();
    for (Basis basis : {Basis::ordinary, Basis::bar}) {
      auto& dist = joint[t][basis == Basis::ordinary ? 0 : 1];
      dist.assign(n, 0.0);
      double total = 0;
      for (int x = 0; x < dim; ++x)
        for (int y = 0; y < dim; ++y) {
          // Measuring one half of Phi_0 and finding |s> leaves the other half
          // in conj(|s>), so the symbol of the state each party effectively
          // sent is read off the conjugated basis.
          const StateVector sa = basis_state(dim, {basis, x}).conjugate();
          const StateVector sb = basis_state(dim, {basis, y}).conjugate();
          const StateVector proj = tensor(sa, sb);
          double p = projection_prob(ab, proj);
          if (p < 1e-14) p = 0;
          dist[x * dim + y] = p;
          total += p;
        }
      for (auto& p : dist) p /= total;
    }
  }

  auto rng = make_rng(config.seed, {0x656470ULL});
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> any_outcome(0, n - 1);
  std::uniform_int_distribution<int> symbol(0, dim - 1);
  std::discrete_distribution<int> genuine_outcome(outcome_prob.begin(), outcome_prob.end());
  std::vector<std::discrete_distribution<int>> pick[2];
  for (int t = 0; t < n; ++t)
    for (int bi = 0; bi < 2; ++bi) pick[bi].emplace_back(joint[t][bi].begin(), joint[t][bi].end());

  EdpReport rep;
  rep.trials = config.trials;
  const double dark_herald = n * w.noise;
  for (std::int64_t trial = 0; trial < config.trials; ++trial) {
    const double u = unit(rng);
    bool genuine;
    int t;
    if (u < w.signal) {
      genuine = true;
      t = genuine_outcome(rng);
    } else if (u < w.signal + dark_herald) {
      genuine = false;
      t = any_outcome(rng);
    } else {
      continue;
    }
    if (!config.full_bsm && t != 0) continue;
    ++rep.heralded;
    ++rep.outcome_counts[t];
    const int ba = coin(rng);
    const int bb = coin(rng);
    if (ba != bb) continue;
    int x, y;
    if (genuine) {
      const int xy = pick[ba][t](rng);
      x = xy / dim;
      y = xy % dim;
    } else {
      x = symbol(rng);
      y = symbol(rng);
    }
    const Basis basis = ba == 0 ? Basis::ordinary : Basis::bar;
    ++rep.sifted[ba];
    if (x != sift_correct(dim, t, basis, y)) ++rep.errors_corrected[ba];
    if (x != y) ++rep.errors_uncorrected[ba];
  }
  return rep;
}

OptimizerConfig certification_optimizer(std::uint64_t seed) {
  OptimizerConfig c;
  c.grid_points = 5;
  c.refine_iterations = 200;
  c.multistarts = 8;
  c.seed = seed;
  return c;
}

CertRow certify_trial(int dim, std::uint64_t root_seed, std::int64_t trial, const OptimizerConfig& optimizer) {
  check_dim(dim);
  CertRow row;
  row.dim = dim;
  row.trial = trial;
  row.seed = derive_seed(root_seed, {static_cast<std::uint64_t>(dim), static_cast<std::uint64_t>(trial)});
  auto rng = std::mt19937_64(row.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  row.strength = unit(rng);
  const double spread = 0.3 * unit(rng);
  const Sources sources = trial % 2 == 0 ? mub_sources(dim) : perturbed_sources(dim, derive_seed(row.seed, {2}), spread);
  row.source_kind = trial % 2 == 0 ? "mub" : "perturbed";

  const AttackModel attack = random_attack(dim, derive_seed(row.seed, {1}), row.strength);
  const AttackOutcome outcome = attack_outcome(attack, sources);
  const SourceCoeffs coeffs = true_coefficients(sources);

  row.qs = state_error_rate(outcome.table);
  row.identity_ok = std::abs(row.qs - state_error_from_rho(outcome)) <= 1e-10;
  row.constraints_ok = verify_constraints(outcome, coeffs);
  row.chain = verify_bound_chain(outcome, sources);

  const auto eps = epsilon_max(outcome.table, optimizer);
  row.epsilon = eps.epsilon;
  row.feasible_found = eps.feasible_found;
  row.qp_direct = direct_phase_error(outcome);
  row.qp_bound = phase_error_bound(row.epsilon, row.qs);
  for (const auto& p : objective_pairs(dim)) row.f_true = std::max(row.f_true, f_bound(p.x, p.y, coeffs, outcome.table, row.qs));
  row.witness_ok = row.epsilon >= std::min(row.f_true, 1 - row.qs) - 1e-6;
  row.bound_ok = row.qp_direct <= row.qp_bound + 1e-6;
  return row;
}

}  // namespace mdiqkd
