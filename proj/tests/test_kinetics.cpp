#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "crn/errors.hpp"
#include "crn/kinetics.hpp"
#include "crn/parser.hpp"

#include "test_util.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <random>

using namespace crn;
using test::load_fixture;

namespace {

MassActionSystem r1_system() { return {load_fixture("r1.crn").net, test::r1_rates()}; }

MassActionSystem r2_system(double eps) {
  const ParsedNetwork p = load_fixture("r2.crn");
  std::vector<double> k;
  for (const auto& spec : p.rates) k.push_back(spec->resolve(eps));
  return {p.net, k};
}

// central finite differences of the rhs, the independent Jacobian oracle
Matrix fd_jacobian(const MassActionSystem& sys, const Vector& x, double h = 1e-6) {
  Matrix j(sys.dim(), sys.dim());
  for (int i = 0; i < sys.dim(); ++i) {
    Vector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    j.col(i) = (sys.rhs(xp) - sys.rhs(xm)) / (2 * h);
  }
  return j;
}

std::vector<double> sorted_moduli(const Eigen::VectorXcd& v) {
  std::vector<double> out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = std::abs(v[i]);
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace

TEST_CASE("rates at the all-ones state equal the rate constants") {
  const MassActionSystem sys = r1_system();
  const Vector v = sys.rates(Vector::Ones(3));
  const std::vector<double> k = test::r1_rates();
  for (int j = 0; j < 8; ++j) CHECK(v[j] == doctest::Approx(k[j]).epsilon(1e-15));
}

TEST_CASE("rate of a bimolecular reaction with squared exponent") {
  // reaction 9 of the enlarged fixture has rate k * z * u^2
  const ParsedNetwork p = load_fixture("r2.crn");
  std::vector<double> k(10, 1.0);
  k[8] = 100.0;
  const MassActionSystem sys(p.net, k);
  Vector x(6);
  x << 1, 1, 2, 3, 1, 1;
  CHECK(sys.rates(x)[8] == doctest::Approx(100.0 * 2.0 * 9.0).epsilon(1e-15));
}

TEST_CASE("rhs at the all-ones state matches the exact oracle") {
  // exact rational product of the stoichiometric matrix with the rate vector
  const Network net = load_fixture("r1.crn").net;
  const RationalMatrix gamma = stoichiometric_matrix(net);
  const std::vector<Rational> kq = {Rational(1, 2), 3, Rational(5, 2), Rational(1, 5),
                                    Rational(3, 5), Rational(12, 5), Rational(9, 5), Rational(2, 5)};
  std::vector<Rational> expected(3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 8; ++j) expected[i] += gamma(i, j) * kq[j];  // monomials are 1 at the all-ones state
  CHECK(expected[0] == Rational(24, 5));
  CHECK(expected[1] == Rational(-43, 10));
  CHECK(expected[2] == Rational(-8, 5));

  const Vector dx = r1_system().rhs(Vector::Ones(3));
  CHECK(dx[0] == doctest::Approx(4.8).epsilon(1e-14));
  CHECK(dx[1] == doctest::Approx(-4.3).epsilon(1e-14));
  CHECK(dx[2] == doctest::Approx(-1.6).epsilon(1e-14));
}

TEST_CASE("rates are positive on the positive orthant") {
  std::mt19937_64 rng(27);
  for (const char* name : {"r1.crn", "r2.crn", "r3.crn", "r4.crn", "erk_reduced.crn", "mapk.crn"}) {
    const ParsedNetwork p = load_fixture(name);
    std::vector<double> k;
    for (const auto& spec : p.rates) k.push_back(spec ? spec->resolve(0.3) : 1.0);
    const MassActionSystem sys(p.net, k);
    for (int trial = 0; trial < 25; ++trial) {
      const Vector v = sys.rates(test::random_positive(sys.dim(), rng, 0.05, 4.0));
      CHECK((v.array() > 0).all());
    }
  }
}

TEST_CASE("conservation rows annihilate the rhs everywhere") {
  const MassActionSystem sys = r2_system(0.1);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector x = test::random_positive(6, rng);
    const Vector dx = sys.rhs(x);
    CHECK(std::abs(-dx[4] + dx[5]) < 1e-12 * (1 + dx.norm()));  // rows for V and W are identical
  }
}

TEST_CASE("rhs lies in the stoichiometric subspace") {
  for (const char* name : {"r1.crn", "r2.crn", "r4.crn"}) {
    const ParsedNetwork p = load_fixture(name);
    std::vector<double> k;
    for (const auto& spec : p.rates) k.push_back(spec->resolve(0.2));
    const MassActionSystem sys(p.net, k);
    const ReducedBasis basis(p.net);
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
      const Vector dx = sys.rhs(test::random_positive(sys.dim(), rng));
      CHECK(basis.off_subspace_norm(dx) < 1e-10 * (1 + dx.norm()));
    }
  }
}

TEST_CASE("analytic Jacobian agrees with central finite differences") {
  std::mt19937_64 rng(17);
  for (const char* name : {"r1.crn", "r2.crn", "r3.crn", "r4.crn", "erk_reduced.crn"}) {
    const ParsedNetwork p = load_fixture(name);
    std::vector<double> k;
    for (const auto& spec : p.rates) k.push_back(spec ? spec->resolve(0.25) : 1.0);
    const MassActionSystem sys(p.net, k);
    for (int trial = 0; trial < 50; ++trial) {
      const Vector x = test::random_positive(sys.dim(), rng, 0.5, 2.0);
      const Matrix analytic = sys.jacobian(x);
      const Matrix fd = fd_jacobian(sys, x);
      const double rel = (analytic - fd).norm() / (1 + analytic.norm());
      CHECK(rel < 1e-5);
    }
  }
}

TEST_CASE("special-case Jacobians") {
  // pure inflow: constant rhs, zero Jacobian
  const MassActionSystem inflow(parse_network("0 -> X\n").net, {2.0});
  CHECK(inflow.jacobian(Vector::Ones(1)).norm() == 0.0);

  // 2X -> 0 at rate 1: d/dx(-2x^2) = -4x = -12 at x = 3
  const MassActionSystem quad(parse_network("2 X -> 0\n").net, {1.0});
  Vector x(1);
  x << 3.0;
  CHECK(quad.jacobian(x)(0, 0) == doctest::Approx(-12.0).epsilon(1e-14));
}

TEST_CASE("boundary states: integer exponents extend continuously") {
  const MassActionSystem sys(parse_network("X + Y -> 2 Y\n0 -> X\n").net, {1.0, 1.0});
  Vector x(2);
  x << 0.0, 2.0;
  const Vector v = sys.rates(x);
  CHECK(v[0] == 0.0);
  CHECK(v[1] == 1.0);

  // fractional exponent at zero is rejected
  const MassActionSystem frac(parse_network("1/2 X -> 0\n").net, {1.0});
  Vector zero(1);
  zero << 0.0;
  CHECK_THROWS_AS(frac.rates(zero), EvaluationError);
}

TEST_CASE("overflow raises an evaluation error") {
  const MassActionSystem sys(parse_network("5 X -> 0\n").net, {1.0});
  Vector huge(1);
  huge << 1e100;
  CHECK_THROWS_AS(sys.rates(huge), EvaluationError);
}

TEST_CASE("reduced Jacobian of a full-rank network is similar to the full one") {
  const MassActionSystem sys = r1_system();
  const ReducedBasis basis(sys.network());
  REQUIRE(basis.dimension() == 3);
  std::mt19937_64 rng(5);
  const Vector x = test::random_positive(3, rng);
  const Matrix full = sys.jacobian(x);
  const Matrix reduced = reduced_jacobian(sys, x, basis);
  const auto sf = sorted_moduli(Eigen::EigenSolver<Matrix>(full, false).eigenvalues());
  const auto sr = sorted_moduli(Eigen::EigenSolver<Matrix>(reduced, false).eigenvalues());
  for (std::size_t i = 0; i < sf.size(); ++i) CHECK(sf[i] == doctest::Approx(sr[i]).epsilon(1e-8));
}

TEST_CASE("full spectrum equals reduced spectrum plus conservation zeros") {
  const MassActionSystem sys = r2_system(0.1);
  const ReducedBasis basis(sys.network());
  REQUIRE(basis.dimension() == 5);
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    const Vector x = test::random_positive(6, rng);
    auto full = sorted_moduli(Eigen::EigenSolver<Matrix>(sys.jacobian(x), false).eigenvalues());
    auto reduced = sorted_moduli(Eigen::EigenSolver<Matrix>(reduced_jacobian(sys, x, basis), false).eigenvalues());
    reduced.push_back(0.0);  // one conservation law
    std::sort(reduced.begin(), reduced.end());
    REQUIRE(full.size() == reduced.size());
    for (std::size_t i = 0; i < full.size(); ++i) CHECK(full[i] == doctest::Approx(reduced[i]).epsilon(1e-6));
  }
}

TEST_CASE("spectra do not depend on the orthonormalization variant") {
  const MassActionSystem sys = r2_system(0.05);
  const ReducedBasis b1(sys.network(), 0);
  const ReducedBasis b2(sys.network(), 42);
  std::mt19937_64 rng(13);
  const Vector x = test::random_positive(6, rng);
  const auto s1 = sorted_moduli(Eigen::EigenSolver<Matrix>(reduced_jacobian(sys, x, b1), false).eigenvalues());
  const auto s2 = sorted_moduli(Eigen::EigenSolver<Matrix>(reduced_jacobian(sys, x, b2), false).eigenvalues());
  for (std::size_t i = 0; i < s1.size(); ++i) CHECK(s1[i] == doctest::Approx(s2[i]).epsilon(1e-8));
}

TEST_CASE("basis columns are orthonormal and span the column space") {
  for (const char* name : {"r1.crn", "r2.crn", "mapk.crn"}) {
    const Network net = load_fixture(name).net;
    const ReducedBasis basis(net);
    const Matrix& b = basis.columns();
    CHECK((b.transpose() * b - Matrix::Identity(b.cols(), b.cols())).norm() < 1e-12);
    const Matrix gamma = stoichiometric_matrix(net).to_double();
    for (int j = 0; j < gamma.cols(); ++j)
      CHECK(basis.off_subspace_norm(gamma.col(j)) < 1e-10 * (1 + gamma.col(j).norm()));
  }
}

TEST_CASE("system construction validates its inputs") {
  const Network net = parse_network("X -> Y\n").net;
  CHECK_THROWS(MassActionSystem(net, {}));
  CHECK_THROWS(MassActionSystem(net, {0.0}));
  CHECK_THROWS(MassActionSystem(net, {-1.0}));
}
