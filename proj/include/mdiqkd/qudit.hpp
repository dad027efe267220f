// Small-dimension state algebra for qubit/qutrit MDI-QKD: the conjugate
// (Fourier) basis, generalized Bell states with source phases, projection
// probabilities, the binary entropy, and the Bell-outcome sifting table.
//
// Everything here is templated on the real scalar so the same code path can
// be evaluated in double (production) or long double (reference checks).

#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace mdiqkd {

template <typename Scalar>
using StateVectorT = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

/// Pure state: `dim` amplitudes for one qudit, `dim*dim` for a pair
/// (Alice's index is the major one: |a,b> sits at a*dim + b).
using StateVector = StateVectorT<double>;

enum class Basis { ordinary, bar };

struct BasisLabel {
  Basis kind = Basis::ordinary;
  int index = 0;
};

/// Undetermined source phases of the phased Bell states. Gauge fixed so that
/// delta[0] == xi[0] == 0; for qubits only the first two entries are read.
struct PhaseSet {
  std::array<double, 3> delta{};
  std::array<double, 3> xi{};

  void validate() const {
    if (delta[0] != 0.0 || xi[0] != 0.0)
      throw std::invalid_argument("PhaseSet: delta[0] and xi[0] must be exactly 0");
  }
};

inline void check_dim(int dim) {
  if (dim != 2 && dim != 3)
    throw std::invalid_argument("unsupported dimension " + std::to_string(dim) + " (expected 2 or 3)");
}

inline int wrap(int i, int dim) { return ((i % dim) + dim) % dim; }

/// omega^power with omega = exp(2*pi*i/dim).
template <typename Scalar = double>
std::complex<Scalar> root_of_unity(int dim, int power) {
  const int p = wrap(power, dim);
  if (p == 0) return {1, 0};
  if (dim == 2) return {-1, 0};
  const Scalar angle = 2 * std::numbers::pi_v<Scalar> * p / dim;
  return std::polar(Scalar(1), angle);
}

template <typename Scalar = double>
StateVectorT<Scalar> computational_state(int dim, int index) {
  check_dim(dim);
  if (index < 0 || index >= dim) throw std::invalid_argument("computational_state: index out of range");
  StateVectorT<Scalar> s = StateVectorT<Scalar>::Zero(dim);
  s(index) = 1;
  return s;
}

/// The conjugate basis: <j|xbar> = omega^(-x*j) / sqrt(dim).
template <typename Scalar = double>
std::vector<StateVectorT<Scalar>> mub_bar_basis(int dim) {
  check_dim(dim);
  const Scalar norm = 1 / std::sqrt(Scalar(dim));
  std::vector<StateVectorT<Scalar>> basis;
  basis.reserve(dim);
  for (int x = 0; x < dim; ++x) {
    StateVectorT<Scalar> s(dim);
    for (int j = 0; j < dim; ++j) s(j) = norm * root_of_unity<Scalar>(dim, -x * j);
    basis.push_back(std::move(s));
  }
  return basis;
}

template <typename Scalar = double>
StateVectorT<Scalar> basis_state(int dim, BasisLabel label) {
  check_dim(dim);
  if (label.index < 0 || label.index >= dim) throw std::invalid_argument("basis_state: index out of range");
  if (label.kind == Basis::ordinary) return computational_state<Scalar>(dim, label.index);
  return mub_bar_basis<Scalar>(dim)[label.index];
}

template <typename Derived1, typename Derived2>
auto tensor(const Eigen::MatrixBase<Derived1>& a, const Eigen::MatrixBase<Derived2>& b) {
  using Vec = Eigen::Matrix<typename Derived1::Scalar, Eigen::Dynamic, 1>;
  Vec out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

inline int bell_index(int dim, int k, int l) { return dim * k + l; }

/// Phi_{dim*k+l} = (1/sqrt dim) sum_m omega^(m l) e^{i(delta_{m+k} + xi_k)} |m+k, m>.
template <typename Scalar = double>
StateVectorT<Scalar> me_state(int dim, int k, int l, const PhaseSet& phases = {}) {
  check_dim(dim);
  phases.validate();
  if (k < 0 || k >= dim || l < 0 || l >= dim) throw std::invalid_argument("me_state: Bell index out of range");
  const Scalar norm = 1 / std::sqrt(Scalar(dim));
  StateVectorT<Scalar> s = StateVectorT<Scalar>::Zero(dim * dim);
  for (int m = 0; m < dim; ++m) {
    const int a = wrap(m + k, dim);
    const Scalar phase = Scalar(phases.delta[a]) + Scalar(phases.xi[k]);
    s(a * dim + m) = norm * root_of_unity<Scalar>(dim, m * l) * std::polar(Scalar(1), phase);
  }
  return s;
}

template <typename Scalar = double>
StateVectorT<Scalar> me_state(int dim, int bell, const PhaseSet& phases = {}) {
  if (bell < 0 || bell >= dim * dim) throw std::invalid_argument("me_state: Bell index out of range");
  return me_state<Scalar>(dim, bell / dim, bell % dim, phases);
}

/// |<target|joint>|^2.
template <typename Derived1, typename Derived2>
auto projection_prob(const Eigen::MatrixBase<Derived1>& joint, const Eigen::MatrixBase<Derived2>& target) {
  if (joint.size() != target.size() || (joint.size() != 4 && joint.size() != 9))
    throw std::invalid_argument("projection_prob: two-qudit states of equal dimension required");
  return std::norm(target.dot(joint));
}

/// cos(mu) sin(nu)|0> + sin(mu) sin(nu)|1> + cos(nu)|2>.
template <typename Scalar = double>
StateVectorT<Scalar> misaligned_state(Scalar mu, Scalar nu) {
  StateVectorT<Scalar> s(3);
  s << std::cos(mu) * std::sin(nu), std::sin(mu) * std::sin(nu), std::cos(nu);
  return s;
}

/// Binary entropy in bits, with 0 log 0 = 0.
template <typename Scalar>
Scalar shannon_entropy(Scalar x) {
  if (!(x >= 0 && x <= 1)) throw std::invalid_argument("shannon_entropy: argument outside [0,1]");
  Scalar h = 0;
  if (x > 0) h -= x * std::log2(x);
  if (x < 1) h -= (1 - x) * std::log2(1 - x);
  return h;
}

/// Bob's post-processing for Bell outcome `bsm_index`, Alice keeping her
/// symbol. Ordinary basis: b -> b + k. Conjugate basis: b -> -(b + l).
inline int sift_correct(int dim, int bsm_index, Basis basis, int bob_symbol) {
  check_dim(dim);
  if (bsm_index < 0 || bsm_index >= dim * dim) throw std::invalid_argument("sift_correct: BSM index out of range");
  if (bob_symbol < 0 || bob_symbol >= dim) throw std::invalid_argument("sift_correct: symbol out of range");
  const int k = bsm_index / dim;
  const int l = bsm_index % dim;
  if (basis == Basis::ordinary) return wrap(bob_symbol + k, dim);
  return wrap(-(bob_symbol + l), dim);
}

inline int sift_correct(int bsm_index, Basis basis, int bob_symbol) {
  return sift_correct(3, bsm_index, basis, bob_symbol);
}

}  // namespace mdiqkd
