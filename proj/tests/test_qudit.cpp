#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mdiqkd/qudit.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <stdexcept>

using namespace mdiqkd;
using cd = std::complex<double>;

namespace {

// Hand-written correction table: corrected Bob symbol for each (outcome, basis, symbol).
int table_one(int bsm, Basis basis, int b) {
  const int k = bsm / 3, l = bsm % 3;
  if (basis == Basis::ordinary) return (b + k) % 3;
  // bar basis: l = 0 swaps 1<->2, l = 1 swaps 0<->2, l = 2 swaps 0<->1
  static const int swap[3][3] = {{0, 2, 1}, {2, 1, 0}, {1, 0, 2}};
  return swap[l][b];
}

}  // namespace

TEST_CASE("conjugate basis for qutrits") {
  const auto bar = mub_bar_basis(3);
  const double s = 1 / std::sqrt(3.0);
  for (int j = 0; j < 3; ++j) CHECK(std::abs(bar[0](j) - cd(s, 0)) < 1e-15);
  CHECK(std::norm(computational_state(3, 0).dot(bar[0])) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(std::abs(bar[1].dot(bar[2])) < 1e-15);
  for (int i = 0; i < 3; ++i)
    for (int x = 0; x < 3; ++x) CHECK(std::abs(std::norm(bar[x](i)) - 1.0 / 3) < 1e-15);
}

TEST_CASE("conjugate basis for qubits is plus/minus") {
  const auto bar = mub_bar_basis(2);
  const double s = 1 / std::sqrt(2.0);
  CHECK(std::abs(bar[0](0) - cd(s, 0)) < 1e-15);
  CHECK(std::abs(bar[0](1) - cd(s, 0)) < 1e-15);
  CHECK(std::abs(bar[1](0) - cd(s, 0)) < 1e-15);
  CHECK(std::abs(bar[1](1) - cd(-s, 0)) < 1e-15);
}

TEST_CASE("unsupported dimensions and indices") {
  CHECK_THROWS_AS(mub_bar_basis(4), std::invalid_argument);
  CHECK_THROWS_AS(mub_bar_basis(1), std::invalid_argument);
  CHECK_THROWS_AS(computational_state(3, 3), std::invalid_argument);
  CHECK_THROWS_AS(me_state(3, 3, 0), std::invalid_argument);
  CHECK_THROWS_AS(me_state(3, 9), std::invalid_argument);
  CHECK_THROWS_AS(me_state(3, 0, -1), std::invalid_argument);
  PhaseSet bad;
  bad.delta[0] = 0.1;
  CHECK_THROWS_AS(me_state(3, 0, 0, bad), std::invalid_argument);
}

TEST_CASE("Bell states") {
  const double s = 1 / std::sqrt(3.0);
  SUBCASE("Phi0 and Phi3 amplitudes") {
    const auto phi0 = me_state(3, 0, 0);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) CHECK(std::abs(phi0(a * 3 + b) - cd(a == b ? s : 0, 0)) < 1e-15);
    const auto phi3 = me_state(3, 1, 0);
    // |1,0> + |2,1> + |0,2>
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const bool on = (a == 1 && b == 0) || (a == 2 && b == 1) || (a == 0 && b == 2);
        CHECK(std::abs(phi3(a * 3 + b) - cd(on ? s : 0, 0)) < 1e-15);
      }
  }
  SUBCASE("orthonormal for random phases") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0, 2 * std::numbers::pi);
    for (int dim : {2, 3}) {
      PhaseSet ph;
      for (int i = 1; i < 3; ++i) {
        ph.delta[i] = u(rng);
        ph.xi[i] = u(rng);
      }
      for (int p = 0; p < dim * dim; ++p)
        for (int q = 0; q < dim * dim; ++q) {
          const cd ip = me_state(dim, p, ph).dot(me_state(dim, q, ph));
          CHECK(std::abs(ip - cd(p == q ? 1 : 0, 0)) < 1e-14);
        }
    }
  }
}

TEST_CASE("projection probabilities") {
  const auto phi0 = me_state(3, 0, 0);
  CHECK(projection_prob(tensor(computational_state(3, 0), computational_state(3, 0)), phi0) ==
        doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(projection_prob(phi0, phi0) == doctest::Approx(1.0).epsilon(1e-15));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, std::numbers::pi);
  for (int t = 0; t < 20; ++t) {
    const double mu = u(rng), nu = u(rng);
    const double p = projection_prob(tensor(computational_state(3, 2), misaligned_state(mu, nu)), phi0);
    CHECK(std::abs(p - std::cos(nu) * std::cos(nu) / 3) < 1e-15);
  }
  StateVector four = StateVector::Zero(4);
  CHECK_THROWS_AS(projection_prob(four, phi0), std::invalid_argument);
}

TEST_CASE("misaligned state limits") {
  const double h = std::numbers::pi / 2;
  const auto one = misaligned_state(h, h);
  CHECK(std::abs(one(0)) < 1e-15);
  CHECK(std::abs(one(1) - cd(1, 0)) < 1e-15);
  CHECK(std::abs(one(2)) < 1e-15);
  for (double mu : {0.0, 0.7, 2.9}) {
    const auto two = misaligned_state(mu, 0.0);
    CHECK(std::abs(two(2) - cd(1, 0)) < 1e-15);
    CHECK(std::abs(two(0)) + std::abs(two(1)) < 1e-15);
  }
}

TEST_CASE("binary entropy") {
  CHECK(shannon_entropy(0.5) == 1.0);
  CHECK(shannon_entropy(0.0) == 0.0);
  CHECK(shannon_entropy(1.0) == 0.0);
  CHECK(std::abs(shannon_entropy(0.05) - 0.2863969571159561) < 1e-12);
  CHECK_THROWS_AS(shannon_entropy(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(shannon_entropy(1.1), std::invalid_argument);
  CHECK_THROWS_AS(shannon_entropy(std::nan("")), std::invalid_argument);
}

TEST_CASE("sifting table") {
  CHECK(sift_correct(3, Basis::ordinary, 0) == 1);
  CHECK(sift_correct(0, Basis::bar, 1) == 2);
  for (int l = 0; l < 3; ++l) CHECK(sift_correct(0, Basis::ordinary, l) == l);
  for (int bsm = 0; bsm < 9; ++bsm)
    for (int b = 0; b < 3; ++b) {
      CHECK(sift_correct(bsm, Basis::ordinary, b) == table_one(bsm, Basis::ordinary, b));
      CHECK(sift_correct(bsm, Basis::bar, b) == table_one(bsm, Basis::bar, b));
    }
  CHECK_THROWS_AS(sift_correct(9, Basis::bar, 0), std::invalid_argument);
  CHECK_THROWS_AS(sift_correct(0, Basis::bar, 3), std::invalid_argument);
  CHECK_THROWS_AS(sift_correct(2, 4, Basis::bar, 0), std::invalid_argument);
}

// The correction must turn Bob's outcome into Alice's for every Bell outcome:
// a pair in Phi_{k,l} measured in either basis has its support mapped onto
// matching symbols.
TEST_CASE("sifting corrects every Bell outcome") {
  for (int dim : {2, 3}) {
    const auto bar = mub_bar_basis(dim);
    for (int bsm = 0; bsm < dim * dim; ++bsm) {
      const auto phi = me_state(dim, bsm);
      for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b) {
          const double po = projection_prob(tensor(computational_state(dim, a), computational_state(dim, b)), phi);
          if (po > 1e-12) CHECK(sift_correct(dim, bsm, Basis::ordinary, b) == a);
          const double pb = projection_prob(tensor(bar[a], bar[b]), phi);
          if (pb > 1e-12) CHECK(sift_correct(dim, bsm, Basis::bar, b) == a);
        }
    }
  }
}
