#include "crn/network.hpp"

#include "crn/parser.hpp"

#include <algorithm>
#include <stdexcept>

namespace crn {

void Complex::set(int species, const Rational& coefficient) {
  if (coefficient < 0) throw std::invalid_argument("Complex: negative stoichiometric coefficient");
  if (coefficient == 0)
    terms_.erase(species);
  else
    terms_[species] = coefficient;
}

void Complex::add(int species, const Rational& coefficient) { set(species, get(species) + coefficient); }

Rational Complex::get(int species) const {
  auto it = terms_.find(species);
  return it == terms_.end() ? Rational(0) : it->second;
}

std::vector<Rational> Complex::dense(int n_species) const {
  std::vector<Rational> v(n_species);
  for (const auto& [idx, coeff] : terms_) v.at(idx) = coeff;
  return v;
}

Complex Complex::remapped(const std::vector<int>& map) const {
  Complex out;
  for (const auto& [idx, coeff] : terms_) out.set(map.at(idx), coeff);
  return out;
}

int Network::species_index(const std::string& name) const {
  for (int i = 0; i < n_species(); ++i)
    if (species[i] == name) return i;
  return -1;
}

int Network::reaction_index(const std::string& label) const {
  if (label.empty()) return -1;
  for (int j = 0; j < n_reactions(); ++j)
    if (reactions[j].label == label) return j;
  return -1;
}

int Network::add_species(const std::string& name) {
  if (species_index(name) >= 0) throw std::invalid_argument("Network: duplicate species name '" + name + "'");
  species.push_back(name);
  return n_species() - 1;
}

RationalMatrix stoichiometric_matrix(const Network& net) {
  RationalMatrix gamma(net.n_species(), net.n_reactions());
  for (int j = 0; j < net.n_reactions(); ++j) {
    for (const auto& [i, c] : net.reactions[j].product.terms()) gamma(i, j) += c;
    for (const auto& [i, c] : net.reactions[j].reactant.terms()) gamma(i, j) -= c;
  }
  return gamma;
}

int network_rank(const Network& net) { return stoichiometric_matrix(net).rank(); }

std::vector<std::vector<Rational>> conservation_basis(const Network& net) {
  return stoichiometric_matrix(net).left_nullspace();
}

RationalMatrix reactant_exponent_matrix(const Network& net) {
  RationalMatrix e(net.n_species(), net.n_reactions());
  for (int j = 0; j < net.n_reactions(); ++j)
    for (const auto& [i, c] : net.reactions[j].reactant.terms()) e(i, j) = c;
  return e;
}

Network canonicalized(const Network& net) {
  std::vector<int> order(net.n_species());
  for (int i = 0; i < net.n_species(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return net.species[a] < net.species[b]; });
  std::vector<int> old_to_new(net.n_species());
  for (int pos = 0; pos < net.n_species(); ++pos) old_to_new[order[pos]] = pos;

  Network out;
  for (int pos = 0; pos < net.n_species(); ++pos) out.species.push_back(net.species[order[pos]]);
  for (const Reaction& r : net.reactions)
    out.reactions.push_back({r.reactant.remapped(old_to_new), r.product.remapped(old_to_new), r.label});
  std::sort(out.reactions.begin(), out.reactions.end(), [&](const Reaction& a, const Reaction& b) {
    auto key = [&](const Reaction& r) {
      return format_complex(out, r.reactant) + "|" + format_complex(out, r.product) + "|" + r.label;
    };
    return key(a) < key(b);
  });
  return out;
}

} // namespace crn
