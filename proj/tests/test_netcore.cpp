#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "crn/errors.hpp"
#include "crn/network.hpp"
#include "crn/parser.hpp"

#include "test_util.hpp"

#include <random>

using namespace crn;
using test::load_fixture;

namespace {

RationalMatrix expected_r1_gamma() {
  const int g[3][8] = {{-1, 1, 1, -1, 0, 0, 0, 0}, {1, -1, 0, 0, 1, -1, 0, 0}, {0, -1, 0, 0, 0, 0, 1, -1}};
  RationalMatrix m(3, 8);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 8; ++j) m(i, j) = g[i][j];
  return m;
}

RationalMatrix expected_r2_gamma() {
  const int g[6][10] = {{-1, 1, 1, -1, 0, 0, 0, 0, 0, 0}, {-1, -1, 0, 0, 1, -1, 0, 0, 2, 0},
                        {1, -1, 0, 0, 0, 0, 1, -1, -1, 0}, {2, 0, 0, 0, 0, 0, 0, 0, -2, 0},
                        {0, 0, 0, 1, 0, 0, 0, 0, 0, -1},   {0, 0, 0, 1, 0, 0, 0, 0, 0, -1}};
  RationalMatrix m(6, 10);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 10; ++j) m(i, j) = g[i][j];
  return m;
}

} // namespace

TEST_CASE("parser handles the basic reaction forms") {
  const ParsedNetwork p = parse_network("X + Y -> 2 Y\n0 -> X\nA <-> B\n");
  const Network& net = p.net;
  REQUIRE(net.n_reactions() == 4);
  CHECK(net.species == std::vector<std::string>{"X", "Y", "A", "B"});

  CHECK(net.reactions[0].reactant.get(0) == 1);
  CHECK(net.reactions[0].reactant.get(1) == 1);
  CHECK(net.reactions[0].product.get(1) == 2);
  CHECK(net.reactions[0].product.get(0) == 0);

  CHECK(net.reactions[1].reactant.empty());
  CHECK(net.reactions[1].product.get(0) == 1);

  // reversible expands to forward then reverse
  CHECK(net.reactions[2].reactant.get(2) == 1);
  CHECK(net.reactions[2].product.get(3) == 1);
  CHECK(net.reactions[3].reactant.get(3) == 1);
  CHECK(net.reactions[3].product.get(2) == 1);
}

TEST_CASE("parser accepts fractions, decimals and hyphenated names") {
  Network net;
  net.add_species("X-p");
  net.add_species("Y");
  const Complex cx = parse_complex("1/2 X-p + 0.25 Y", net);
  CHECK(cx.get(0) == Rational(1, 2));
  CHECK(cx.get(1) == Rational(1, 4));

  const ParsedNetwork p = parse_network("E1--X-pp--Z -> E1--Z + X-pp\n");
  CHECK(p.net.species == std::vector<std::string>{"E1--X-pp--Z", "E1--Z", "X-pp"});
}

TEST_CASE("parser reports location and cause of errors") {
  CHECK_THROWS_AS(parse_network("X -> Y\nX ->\n"), ParseError);
  try {
    parse_network("X -> Y\nX -> \n");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_WITH_AS(parse_network("-2 X -> Y\n"), doctest::Contains("negative coefficient"), ParseError);
  CHECK_THROWS_WITH_AS(parse_network("X -> Y @ r1\nY -> X @ r1\n"), doctest::Contains("duplicate reaction label"),
                       ParseError);
}

TEST_CASE("rate annotations parse and resolve") {
  const ParsedNetwork p = parse_network("X -> Y @ r1 k=0.5\nA <-> B @ r2 k=1.5,2.5\nY -> X @ r3 k=eps^-2\n");
  REQUIRE(p.rates.size() == 4);
  CHECK(p.rates[0]->value == doctest::Approx(0.5));
  CHECK(p.rates[1]->value == doctest::Approx(1.5));
  CHECK(p.rates[2]->value == doctest::Approx(2.5));
  CHECK(p.rates[3]->is_eps);
  CHECK(p.rates[3]->resolve(0.1) == doctest::Approx(100.0));
  CHECK_THROWS(parse_rate_value("-1.0"));
  CHECK_THROWS(parse_rate_value("eps^x"));
}

TEST_CASE("stoichiometric matrices match the printed fixtures exactly") {
  CHECK(stoichiometric_matrix(load_fixture("r1.crn").net) == expected_r1_gamma());
  CHECK(stoichiometric_matrix(load_fixture("r2.crn").net) == expected_r2_gamma());

  // a trivial reaction contributes a zero column
  const Network trivial = parse_network("X -> X\n").net;
  const RationalMatrix g = stoichiometric_matrix(trivial);
  CHECK(g(0, 0) == 0);
}

TEST_CASE("exact ranks of the fixture networks") {
  CHECK(network_rank(load_fixture("r1.crn").net) == 3);
  CHECK(network_rank(load_fixture("r2.crn").net) == 5);
  CHECK(network_rank(load_fixture("mapk.crn").net) == 17);
  CHECK(network_rank(load_fixture("mapk_rpp.crn").net) == 8);
  CHECK(network_rank(load_fixture("mapk_rp.crn").net) == 8);
}

TEST_CASE("conservation bases") {
  CHECK(conservation_basis(load_fixture("r1.crn").net).empty());

  const auto basis = conservation_basis(load_fixture("r2.crn").net);
  REQUIRE(basis.size() == 1);
  // spanned by (0,0,0,0,-1,1): check proportionality
  const auto& w = basis[0];
  REQUIRE(w.size() == 6);
  CHECK(w[5] != 0);
  const Rational s = w[5];
  CHECK(w[0] == 0);
  CHECK(w[1] == 0);
  CHECK(w[2] == 0);
  CHECK(w[3] == 0);
  CHECK(w[4] == -s);

  const auto mass = conservation_basis(parse_network("A -> B\n").net);
  REQUIRE(mass.size() == 1);
  CHECK(mass[0][0] == mass[0][1]);
}

TEST_CASE("reactant exponent matrix columns") {
  const Network r1 = load_fixture("r1.crn").net;
  const RationalMatrix e1 = reactant_exponent_matrix(r1);
  CHECK(e1(0, 0) == 1);
  CHECK(e1(1, 0) == 1);
  CHECK(e1(2, 0) == 0);
  CHECK(e1(0, 2) == 0);  // inflow: empty reactant

  const Network r2 = load_fixture("r2.crn").net;
  const RationalMatrix e2 = reactant_exponent_matrix(r2);
  // reaction 9 is Z + 2U -> 2Y
  CHECK(e2(2, 8) == 1);
  CHECK(e2(3, 8) == 2);
  CHECK(e2(0, 8) == 0);
}

TEST_CASE("rank plus conservation dimension equals species count") {
  for (const char* name : {"r1.crn", "r2.crn", "r3.crn", "r4.crn", "erk_reduced.crn", "erk_full.crn", "mapk_rpp.crn",
                           "mapk_rp.crn", "mapk.crn"}) {
    const Network net = load_fixture(name).net;
    CHECK(network_rank(net) + static_cast<int>(conservation_basis(net).size()) == net.n_species());
  }
}

TEST_CASE("conservation vectors annihilate every column exactly") {
  for (const char* name : {"r2.crn", "erk_full.crn", "mapk.crn"}) {
    const Network net = load_fixture(name).net;
    const RationalMatrix gamma = stoichiometric_matrix(net);
    for (const auto& w : conservation_basis(net))
      for (int j = 0; j < gamma.cols(); ++j) {
        Rational dot = 0;
        for (int i = 0; i < gamma.rows(); ++i) dot += w[i] * gamma(i, j);
        CHECK(dot == 0);
      }
  }
}

TEST_CASE("serialize then parse is the identity") {
  for (const char* name : {"r1.crn", "r2.crn", "erk_full.crn", "mapk.crn"}) {
    const Network net = load_fixture(name).net;
    const Network again = parse_network(serialize_network(net)).net;
    CHECK(net == again);
  }

  // species order that first-mention cannot reproduce: the directive covers it
  Network odd;
  odd.add_species("Late");
  odd.add_species("Early");
  Reaction r;
  r.reactant.set(1, 1);
  r.product.set(0, 2);
  odd.reactions.push_back(r);
  const std::string text = serialize_network(odd);
  CHECK(text.find("species: Late Early") != std::string::npos);
  CHECK(parse_network(text).net == odd);
}

TEST_CASE("random networks satisfy the rank-nullity property") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> nd(1, 5), rd(1, 6), coeff(0, 2);
  for (int trial = 0; trial < 100; ++trial) {
    Network net;
    const int n = nd(rng);
    for (int i = 0; i < n; ++i) net.add_species("S" + std::to_string(i));
    const int r = rd(rng);
    for (int j = 0; j < r; ++j) {
      Reaction reaction;
      for (int i = 0; i < n; ++i) {
        reaction.reactant.set(i, coeff(rng));
        reaction.product.set(i, coeff(rng));
      }
      net.reactions.push_back(reaction);
    }
    CHECK(network_rank(net) + static_cast<int>(conservation_basis(net).size()) == n);
    CHECK(parse_network(serialize_network(net)).net == net);
  }
}

TEST_CASE("exact rational matrix operations") {
  RationalMatrix m(2, 2);
  m(0, 0) = Rational(1, 2);
  m(0, 1) = Rational(1, 3);
  m(1, 0) = Rational(1, 4);
  m(1, 1) = Rational(1, 5);
  const RationalMatrix inv = m.inverse();
  CHECK(m * inv == RationalMatrix::identity(2));

  RationalMatrix singular(2, 2);
  singular(0, 0) = 1;
  singular(0, 1) = 2;
  singular(1, 0) = 2;
  singular(1, 1) = 4;
  CHECK(singular.rank() == 1);
  CHECK_THROWS(singular.inverse());
  const auto kernel = singular.nullspace();
  REQUIRE(kernel.size() == 1);
  CHECK(kernel[0][0] * 1 + kernel[0][1] * 2 == 0);
}
