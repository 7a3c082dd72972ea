#ifndef CRN_NETWORK_HPP
#define CRN_NETWORK_HPP

#include "crn/rational.hpp"
#include "crn/rational_matrix.hpp"

#include <map>
#include <string>
#include <vector>

namespace crn {

/// Formal nonnegative combination of species (one side of a reaction).
/// Coefficients are exact rationals; zero coefficients are never stored.
class Complex {
 public:
  Complex() = default;

  void set(int species, const Rational& coefficient);
  void add(int species, const Rational& coefficient);
  Rational get(int species) const;
  bool empty() const { return terms_.empty(); }

  const std::map<int, Rational>& terms() const { return terms_; }

  bool operator==(const Complex& other) const = default;

  /// Coefficients as a dense length-n column.
  std::vector<Rational> dense(int n_species) const;

  /// Same complex with species indices translated through `map` (old -> new).
  Complex remapped(const std::vector<int>& map) const;

 private:
  std::map<int, Rational> terms_;
};

struct Reaction {
  Complex reactant;
  Complex product;
  std::string label;

  bool operator==(const Reaction& other) const = default;

  /// Trivial means zero net stoichiometry (reactant == product). Legal.
  bool trivial() const { return reactant == product; }
};

/// Species plus ordered irreversible reactions. Immutable by convention once
/// built: all operations below are pure queries, and enlargements produce new
/// networks.
class Network {
 public:
  std::vector<std::string> species;
  std::vector<Reaction> reactions;

  int n_species() const { return static_cast<int>(species.size()); }
  int n_reactions() const { return static_cast<int>(reactions.size()); }

  /// Index of a named species, or -1.
  int species_index(const std::string& name) const;

  /// Index of a labelled reaction, or -1. Only non-empty labels are findable.
  int reaction_index(const std::string& label) const;

  /// Appends a species; throws std::invalid_argument on duplicate names.
  int add_species(const std::string& name);

  bool operator==(const Network& other) const = default;
};

/// Net production of species i in reaction j: product - reactant, n x r exact.
RationalMatrix stoichiometric_matrix(const Network& net);

/// Exact rank of the stoichiometric matrix over the rationals.
int network_rank(const Network& net);

/// Basis of { w : w * Gamma = 0 }, exact; empty iff rank == n_species.
std::vector<std::vector<Rational>> conservation_basis(const Network& net);

/// Column j is the reactant complex of reaction j (the mass-action exponents).
RationalMatrix reactant_exponent_matrix(const Network& net);

/// Network with species sorted by name and reactions sorted by canonical
/// (reactant, product, label) text. Used for order-insensitive comparison.
Network canonicalized(const Network& net);

} // namespace crn

#endif
