#include "crn/enlarge.hpp"

#include "crn/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <set>
#include <sstream>

namespace crn {

namespace {

std::string unique_label(const Network& net, std::string want) {
  if (want.empty()) return want;
  std::string label = want;
  int bump = 1;
  while (net.reaction_index(label) >= 0) label = want + "#" + std::to_string(++bump);
  return label;
}

std::string format_vector(const std::vector<Rational>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += rational_to_string(v[i]);
  }
  return s + ")";
}

std::vector<Rational> net_stoichiometry(const Reaction& r, int n) {
  std::vector<Rational> v(n);
  for (const auto& [i, c] : r.product.terms()) v.at(i) += c;
  for (const auto& [i, c] : r.reactant.terms()) v.at(i) -= c;
  return v;
}

std::string beta_dependency_certificate(const RationalMatrix& beta) {
  auto kernel = beta.transpose().left_nullspace();  // { u : beta u = 0 }
  std::string cert = "columns of beta are linearly dependent";
  if (!kernel.empty()) cert += "; kernel vector u = " + format_vector(kernel.front()) + " satisfies beta*u = 0";
  return cert;
}

void identity_maps(EnlargementRecord& rec) {
  rec.species_map.resize(rec.base.n_species());
  for (int i = 0; i < rec.base.n_species(); ++i) rec.species_map[i] = i;
  rec.reaction_map.resize(rec.base.n_reactions());
  for (int j = 0; j < rec.base.n_reactions(); ++j) rec.reaction_map[j] = j;
}

void assign_eps_schedule(EnlargementRecord& rec) {
  const std::vector<Rational> sigma = epsilon_rate_exponents(rec);
  for (std::size_t i = 0; i < rec.new_reaction_indices.size() && i < sigma.size(); ++i) {
    if (denominator(sigma[i]) == 1) {
      const int power = -numerator(sigma[i]).convert_to<int>();
      rec.assigned_rates[rec.new_reaction_indices[i]] = RateSpec::eps_pow(power);
    }
  }
}

} // namespace

std::string kind_code(EnlargeKind kind) {
  switch (kind) {
    case EnlargeKind::DependentReaction: return "E1";
    case EnlargeKind::FullyOpen: return "E2";
    case EnlargeKind::DependentSpecies: return "E3";
    case EnlargeKind::SpeciesInflowOutflow: return "E4";
    case EnlargeKind::NewReversible: return "E5";
    case EnlargeKind::Split: return "E6";
    case EnlargeKind::Enzymatic: return "enzymatic";
    case EnlargeKind::Duplicate: return "duplicate";
  }
  return "?";
}

EnlargementRecord split_reactions(const Network& net, const SplitSpec& spec) {
  const int n = net.n_species();
  const int m = static_cast<int>(spec.splits.size());
  const int total_new = static_cast<int>(spec.new_species.size());
  if (m < 1) throw EnlargeError("split_reactions: at least one split required");
  if (total_new < m) throw EnlargeError("split_reactions: need at least m new species");

  std::set<int> seen;
  for (const SplitPart& part : spec.splits) {
    if (part.reaction < 0 || part.reaction >= net.n_reactions())
      throw EnlargeError("split_reactions: invalid reaction index " + std::to_string(part.reaction));
    if (!seen.insert(part.reaction).second)
      throw EnlargeError("split_reactions: reaction " + std::to_string(part.reaction) +
                         " split twice; duplicate it first (duplicate_reaction)");
  }

  RationalMatrix beta(total_new, m);
  for (int i = 0; i < m; ++i)
    for (const auto& [local, coeff] : spec.splits[i].intermediate_new.terms()) {
      if (local < 0 || local >= total_new) throw EnlargeError("split_reactions: intermediate uses unknown new species");
      beta(local, i) = coeff;
    }
  if (beta.rank() < m) throw EnlargeError("split_reactions: new species enter trivially (rank beta < m)",
                                          beta_dependency_certificate(beta));

  EnlargementRecord rec;
  rec.kind = EnlargeKind::Split;
  rec.base = net;
  rec.result = net;
  rec.beta = beta;
  rec.alpha = RationalMatrix(n, m);
  rec.c_matrix = RationalMatrix(n, m);
  identity_maps(rec);

  for (const std::string& name : spec.new_species) rec.new_species_indices.push_back(rec.result.add_species(name));

  for (int i = 0; i < m; ++i) {
    const SplitPart& part = spec.splits[i];
    const Reaction original = net.reactions[part.reaction];

    Complex intermediate = part.intermediate_old;
    for (const auto& [local, coeff] : part.intermediate_new.terms()) intermediate.add(n + local, coeff);

    rec.split_reactions.push_back(part.reaction);
    for (const auto& [sp, coeff] : part.intermediate_old.terms()) rec.c_matrix(sp, i) = coeff;
    for (const auto& [sp, coeff] : part.intermediate_old.terms()) rec.alpha(sp, i) += coeff;
    for (const auto& [sp, coeff] : original.product.terms()) rec.alpha(sp, i) -= coeff;

    rec.result.reactions[part.reaction].product = intermediate;  // first leg keeps label and rate
    Reaction second{intermediate, original.product,
                    unique_label(rec.result, part.second_label.empty()
                                                 ? (original.label.empty() ? "" : original.label + "'")
                                                 : part.second_label)};
    rec.result.reactions.push_back(second);
    rec.new_reaction_indices.push_back(rec.result.n_reactions() - 1);
  }

  assign_eps_schedule(rec);
  return rec;
}

EnlargementRecord add_dependent_reactions(const Network& net, const std::vector<Reaction>& reactions) {
  EnlargementRecord rec;
  rec.kind = EnlargeKind::DependentReaction;
  rec.base = net;
  rec.result = net;
  identity_maps(rec);
  if (reactions.empty()) throw EnlargeError("E1: no reactions given");

  rec.alpha = RationalMatrix(net.n_species(), static_cast<int>(reactions.size()));
  for (std::size_t idx = 0; idx < reactions.size(); ++idx) {
    const Reaction& r = reactions[idx];
    for (const Complex* cx : {&r.reactant, &r.product})
      for (const auto& [sp, coeff] : cx->terms())
        if (sp >= net.n_species()) throw EnlargeError("E1: reaction uses a species not in the network");

    const std::vector<Rational> v = net_stoichiometry(r, net.n_species());
    std::vector<Rational> witness;
    if (!stoichiometric_matrix(rec.result).in_column_span(v, &witness))
      throw EnlargeError("E1: reaction '" + r.label + "' is not linearly dependent on the existing reactions",
                         "conservation vector w = " + format_vector(witness) +
                             " annihilates every existing reaction but not the new one (net stoichiometry " +
                             format_vector(v) + ")");
    for (int i = 0; i < net.n_species(); ++i) rec.alpha(i, static_cast<int>(idx)) = v[i];
    Reaction added = r;
    added.label = unique_label(rec.result, added.label);
    rec.result.reactions.push_back(added);
    rec.new_reaction_indices.push_back(rec.result.n_reactions() - 1);
  }
  return rec;
}

EnlargementRecord fully_open_extension(const Network& net) {
  EnlargementRecord rec;
  rec.kind = EnlargeKind::FullyOpen;
  rec.base = net;
  rec.result = net;
  identity_maps(rec);

  for (int i = 0; i < net.n_species(); ++i) {
    Complex unit;
    unit.set(i, 1);
    const Complex empty;
    bool has_in = false, has_out = false;
    for (const Reaction& r : net.reactions) {
      if (r.reactant == empty && r.product == unit) has_in = true;
      if (r.reactant == unit && r.product == empty) has_out = true;
    }
    if (!has_in) {
      rec.result.reactions.push_back({empty, unit, unique_label(rec.result, net.species[i] + "_in")});
      rec.new_reaction_indices.push_back(rec.result.n_reactions() - 1);
    }
    if (!has_out) {
      rec.result.reactions.push_back({unit, empty, unique_label(rec.result, net.species[i] + "_out")});
      rec.new_reaction_indices.push_back(rec.result.n_reactions() - 1);
    }
  }
  return rec;
}

namespace {

Network insert_species(const Network& net, const std::string& name, const std::vector<SpeciesInsertion>& insertions,
                       const char* op) {
  Network out = net;
  const int idx = out.add_species(name);
  for (const SpeciesInsertion& ins : insertions) {
    if (ins.reaction < 0 || ins.reaction >= net.n_reactions())
      throw EnlargeError(std::string(op) + ": invalid reaction index " + std::to_string(ins.reaction));
    if (ins.reactant_coeff < 0 || ins.product_coeff < 0)
      throw EnlargeError(std::string(op) + ": negative insertion coefficient");
    out.reactions[ins.reaction].reactant.add(idx, ins.reactant_coeff);
    out.reactions[ins.reaction].product.add(idx, ins.product_coeff);
  }
  return out;
}

} // namespace

EnlargementRecord add_dependent_species(const Network& net, const std::string& name,
                                        const std::vector<SpeciesInsertion>& insertions) {
  EnlargementRecord rec;
  rec.kind = EnlargeKind::DependentSpecies;
  rec.base = net;
  rec.result = insert_species(net, name, insertions, "E3");
  identity_maps(rec);
  rec.new_species_indices.push_back(rec.result.n_species() - 1);

  const int base_rank = network_rank(net);
  if (network_rank(rec.result) != base_rank) {
    // The new species' net row, restricted to the base reactions.
    std::vector<Rational> row(net.n_reactions());
    for (const SpeciesInsertion& ins : insertions) row[ins.reaction] += ins.product_coeff - ins.reactant_coeff;
    std::string cert = "new species row " + format_vector(row) + " is outside the row space";
    for (const auto& u : stoichiometric_matrix(net).nullspace()) {
      Rational dot = 0;
      for (int j = 0; j < net.n_reactions(); ++j) dot += row[j] * u[j];
      if (dot != 0) {
        cert += "; reaction-space kernel vector u = " + format_vector(u) + " has row*u = " + rational_to_string(dot);
        break;
      }
    }
    throw EnlargeError("E3: adding species '" + name + "' changes the rank", cert);
  }
  return rec;
}

EnlargementRecord add_species_with_inflow_outflow(const Network& net, const std::string& name,
                                                  const std::vector<SpeciesInsertion>& insertions) {
  EnlargementRecord rec;
  rec.kind = EnlargeKind::SpeciesInflowOutflow;
  rec.base = net;
  rec.result = insert_species(net, name, insertions, "E4");
  identity_maps(rec);
  const int idx = rec.result.n_species() - 1;
  rec.new_species_indices.push_back(idx);

  Complex unit;
  unit.set(idx, 1);
  rec.result.reactions.push_back({Complex{}, unit, unique_label(rec.result, name + "_in")});
  rec.new_reaction_indices.push_back(rec.result.n_reactions() - 1);
  rec.result.reactions.push_back({unit, Complex{}, unique_label(rec.result, name + "_out")});
  rec.new_reaction_indices.push_back(rec.result.n_reactions() - 1);

  rec.beta = RationalMatrix(1, 1);
  rec.beta(0, 0) = 1;
  rec.alpha = RationalMatrix(net.n_species(), 1);
  return rec;
}

EnlargementRecord add_reversible_reactions(const Network& net, const std::vector<std::string>& new_species,
                                           const std::vector<ReversiblePairSpec>& pairs) {
  const int n = net.n_species();
  const int m = static_cast<int>(pairs.size());
  const int total_new = static_cast<int>(new_species.size());
  if (m < 1) throw EnlargeError("E5: at least one reversible pair required");
  if (total_new < m) throw EnlargeError("E5: need at least m new species");

  EnlargementRecord rec;
  rec.kind = EnlargeKind::NewReversible;
  rec.base = net;
  rec.result = net;
  identity_maps(rec);
  for (const std::string& name : new_species) rec.new_species_indices.push_back(rec.result.add_species(name));

  rec.beta = RationalMatrix(total_new, m);
  rec.alpha = RationalMatrix(n, m);
  for (int i = 0; i < m; ++i) {
    const ReversiblePairSpec& pair = pairs[i];
    for (const Complex* cx : {&pair.reactant, &pair.product})
      for (const auto& [sp, coeff] : cx->terms())
        if (sp >= rec.result.n_species()) throw EnlargeError("E5: pair uses an unknown species index");
    const std::vector<Rational> v = net_stoichiometry({pair.reactant, pair.product, ""}, rec.result.n_species());
    for (int r = 0; r < total_new; ++r) rec.beta(r, i) = v[n + r];
    for (int r = 0; r < n; ++r) rec.alpha(r, i) = v[r];
  }
  if (rec.beta.rank() < m)
    throw EnlargeError("E5: new species enter trivially (rank beta < m)", beta_dependency_certificate(rec.beta));

  for (const ReversiblePairSpec& pair : pairs) {
    Reaction fwd{pair.reactant, pair.product, unique_label(rec.result, pair.label)};
    rec.result.reactions.push_back(fwd);
    rec.new_reaction_indices.push_back(rec.result.n_reactions() - 1);
    Reaction rev{pair.product, pair.reactant,
                 unique_label(rec.result, pair.label.empty() ? "" : pair.label + "_rev")};
    rec.result.reactions.push_back(rev);
    rec.new_reaction_indices.push_back(rec.result.n_reactions() - 1);
  }
  return rec;
}

EnlargementRecord add_trivial_then_split(const Network& net, const Complex& source, const Complex& intermediate_old,
                                         const Complex& intermediate_new, const std::vector<std::string>& new_species,
                                         const std::string& forward_label, const std::string& reverse_label) {
  const int n = net.n_species();
  const int total_new = static_cast<int>(new_species.size());
  if (total_new < 1) throw EnlargeError("trivial_split: need at least one new species");

  RationalMatrix beta(total_new, 1);
  for (const auto& [local, coeff] : intermediate_new.terms()) {
    if (local < 0 || local >= total_new) throw EnlargeError("trivial_split: intermediate uses unknown new species");
    beta(local, 0) = coeff;
  }
  if (beta.rank() < 1)
    throw EnlargeError("trivial_split: new species enter trivially (rank beta < m)", beta_dependency_certificate(beta));

  EnlargementRecord rec;
  rec.kind = EnlargeKind::Split;
  rec.base = net;
  rec.result = net;
  rec.beta = beta;
  identity_maps(rec);
  for (const std::string& name : new_species) rec.new_species_indices.push_back(rec.result.add_species(name));

  Complex intermediate = intermediate_old;
  for (const auto& [local, coeff] : intermediate_new.terms()) intermediate.add(n + local, coeff);

  rec.alpha = RationalMatrix(n, 1);
  rec.c_matrix = RationalMatrix(n, 1);
  for (const auto& [sp, coeff] : intermediate_old.terms()) {
    rec.c_matrix(sp, 0) = coeff;
    rec.alpha(sp, 0) += coeff;
  }
  for (const auto& [sp, coeff] : source.terms()) rec.alpha(sp, 0) -= coeff;  // b = a for a trivial reaction

  rec.result.reactions.push_back({source, intermediate, unique_label(rec.result, forward_label)});
  rec.extra_reaction_indices.push_back(rec.result.n_reactions() - 1);
  rec.result.reactions.push_back({intermediate, source, unique_label(rec.result, reverse_label)});
  rec.new_reaction_indices.push_back(rec.result.n_reactions() - 1);

  assign_eps_schedule(rec);
  return rec;
}

std::vector<EnlargementRecord> apply_enzymatic(const Network& net, const std::string& enzyme_name,
                                               const std::vector<EnzymaticTarget>& targets) {
  if (targets.empty()) throw EnlargeError("enzymatic: no target reactions");
  std::set<int> seen;
  for (const EnzymaticTarget& t : targets) {
    if (t.reaction < 0 || t.reaction >= net.n_reactions())
      throw EnlargeError("enzymatic: invalid reaction index " + std::to_string(t.reaction));
    if (!seen.insert(t.reaction).second) throw EnlargeError("enzymatic: duplicate target reaction");
    if (t.enzyme_stoich < 0) throw EnlargeError("enzymatic: negative enzyme stoichiometry");
  }

  std::vector<EnlargementRecord> records;

  // 1. enzyme into both sides of the targets (rank preserved automatically)
  std::vector<SpeciesInsertion> insertions;
  for (const EnzymaticTarget& t : targets)
    if (t.enzyme_stoich > 0) insertions.push_back({t.reaction, t.enzyme_stoich, t.enzyme_stoich});
  records.push_back(add_dependent_species(net, enzyme_name, insertions));

  // 2. intermediates I_i (beta is the identity, rank m by construction)
  SplitSpec split_spec;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    split_spec.new_species.push_back(targets[i].intermediate_name);
    SplitPart part;
    part.reaction = targets[i].reaction;
    part.intermediate_new.set(static_cast<int>(i), 1);
    split_spec.splits.push_back(part);
  }
  records.push_back(split_reactions(records[0].result, split_spec));

  // 3. reverse first legs (each dependent on the reaction it reverses)
  const Network& after_split = records[1].result;
  std::vector<Reaction> reverses;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const Reaction& first_leg = after_split.reactions[targets[i].reaction];
    std::string label = first_leg.label.empty() ? "" : first_leg.label + "_rev";
    reverses.push_back({first_leg.product, first_leg.reactant, label});
  }
  records.push_back(add_dependent_reactions(after_split, reverses));
  return records;
}

EnlargementRecord duplicate_reaction_record(const Network& net, int reaction, int parts) {
  if (reaction < 0 || reaction >= net.n_reactions()) throw EnlargeError("duplicate: invalid reaction index");
  if (parts < 1) throw EnlargeError("duplicate: parts must be >= 1");

  EnlargementRecord rec;
  rec.kind = EnlargeKind::Duplicate;
  rec.base = net;
  rec.dup_reaction = reaction;
  rec.dup_parts = parts;
  rec.species_map.resize(net.n_species());
  for (int i = 0; i < net.n_species(); ++i) rec.species_map[i] = i;

  rec.result.species = net.species;
  for (int j = 0; j < net.n_reactions(); ++j) {
    if (j == reaction) {
      rec.reaction_map.push_back(rec.result.n_reactions());
      for (int p = 0; p < parts; ++p) {
        Reaction copy = net.reactions[j];
        if (p > 0) {
          copy.label = unique_label(rec.result, copy.label);
          rec.result.reactions.push_back(copy);
          rec.new_reaction_indices.push_back(rec.result.n_reactions() - 1);
        } else {
          rec.result.reactions.push_back(copy);
        }
      }
    } else {
      rec.reaction_map.push_back(rec.result.n_reactions());
      rec.result.reactions.push_back(net.reactions[j]);
    }
  }
  return rec;
}

MassActionSystem duplicate_reaction(const MassActionSystem& sys, int reaction, int parts) {
  const EnlargementRecord rec = duplicate_reaction_record(sys.network(), reaction, parts);
  std::vector<double> k(rec.result.n_reactions());
  for (int j = 0; j < rec.base.n_reactions(); ++j) {
    const double kj = sys.rate_constants()[j];
    k[rec.reaction_map[j]] = (j == reaction) ? kj / parts : kj;
  }
  for (int idx : rec.new_reaction_indices) k[idx] = sys.rate_constants()[reaction] / parts;
  return MassActionSystem(rec.result, k);
}

std::vector<Rational> epsilon_rate_exponents(const EnlargementRecord& record) {
  const int m = record.beta.cols();
  if (m == 0) throw NumericsError("epsilon_rate_exponents: record carries no beta matrix");
  const std::vector<int> rows = independent_row_selection(record.beta, m);
  if (rows.empty()) throw NumericsError("epsilon_rate_exponents: no nonsingular row block (rank beta < m)");
  const RationalMatrix beta_hat = record.beta.select_rows(rows);
  std::vector<Rational> sigma(m);
  for (int i = 0; i < m; ++i)
    for (int r = 0; r < m; ++r) sigma[i] += beta_hat(r, i);
  return sigma;
}

std::vector<double> epsilon_rate_assignment(const EnlargementRecord& record, double eps) {
  if (!(eps > 0)) throw NumericsError("epsilon_rate_assignment: eps must be positive");
  std::vector<double> out;
  for (const Rational& s : epsilon_rate_exponents(record)) out.push_back(std::pow(eps, -to_double(s)));
  return out;
}

// ---------------------------------------------------------------------------
// scripts

namespace {

using nlohmann::json;

int resolve_reaction(const Network& net, const json& ref, const std::string& op) {
  if (ref.is_number_integer()) {
    const int idx = ref.get<int>();
    if (idx < 0 || idx >= net.n_reactions())
      throw EnlargeError(op + ": reaction index " + std::to_string(idx) + " out of range");
    return idx;
  }
  if (ref.is_string()) {
    const int idx = net.reaction_index(ref.get<std::string>());
    if (idx < 0) throw EnlargeError(op + ": unknown reaction label '" + ref.get<std::string>() + "'");
    return idx;
  }
  throw EnlargeError(op + ": reaction reference must be a label or index");
}

Rational json_rational(const json& v, const std::string& op) {
  if (v.is_number_integer()) return Rational(v.get<long long>());
  if (v.is_string()) {
    auto q = parse_rational(v.get<std::string>());
    if (q) return *q;
  }
  if (v.is_number_float()) {
    auto q = parse_rational(std::to_string(v.get<double>()));
    if (q) return *q;
  }
  throw EnlargeError(op + ": expected exact coefficient (integer or \"p/q\" string)");
}

RateSpec json_rate(const json& v, const std::string& op) {
  try {
    if (v.is_number()) return RateSpec::literal(v.get<double>());
    if (v.is_string()) return parse_rate_value(v.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw EnlargeError(op + ": " + e.what());
  }
  throw EnlargeError(op + ": bad rate value");
}

// Parses a complex over base species plus (optionally) declared new species;
// returns the base-species part and the local new-species part.
std::pair<Complex, Complex> split_complex_string(const std::string& text, const Network& net,
                                                 const std::vector<std::string>& new_species, const std::string& op) {
  Network scratch = net;
  for (const std::string& s : new_species)
    if (scratch.species_index(s) < 0) scratch.add_species(s);
  Complex combined;
  try {
    combined = parse_complex(text, scratch, false);
  } catch (const ParseError& e) {
    throw EnlargeError(op + ": bad complex '" + text + "': " + e.what());
  }
  Complex old_part, new_part;
  for (const auto& [idx, coeff] : combined.terms()) {
    if (idx < net.n_species()) {
      old_part.set(idx, coeff);
    } else {
      const std::string& name = scratch.species[idx];
      const auto it = std::find(new_species.begin(), new_species.end(), name);
      new_part.set(static_cast<int>(it - new_species.begin()), coeff);
    }
  }
  return {old_part, new_part};
}

std::vector<EnlargementRecord> apply_step(const Network& net, const json& step) {
  if (!step.is_object() || !step.contains("op")) throw EnlargeError("script step must be an object with an \"op\"");
  const std::string op = step.at("op").get<std::string>();

  if (op == "E6") {
    SplitSpec spec;
    spec.new_species = step.at("new_species").get<std::vector<std::string>>();
    for (const json& js : step.at("splits")) {
      SplitPart part;
      part.reaction = resolve_reaction(net, js.at("reaction"), op);
      if (js.contains("intermediate")) {
        auto [old_part, new_part] = split_complex_string(js.at("intermediate").get<std::string>(), net,
                                                         spec.new_species, op);
        part.intermediate_old = old_part;
        part.intermediate_new = new_part;
      } else {
        auto [old1, new1] = split_complex_string(js.value("intermediate_old", std::string("0")), net,
                                                 spec.new_species, op);
        auto [old2, new2] = split_complex_string(js.value("intermediate_new", std::string("0")), net,
                                                 spec.new_species, op);
        // tolerate species of either kind in either field
        part.intermediate_old = old1;
        for (const auto& [i, c] : old2.terms()) part.intermediate_old.add(i, c);
        part.intermediate_new = new1;
        for (const auto& [i, c] : new2.terms()) part.intermediate_new.add(i, c);
      }
      part.second_label = js.value("label", std::string());
      spec.splits.push_back(part);
    }
    EnlargementRecord rec = split_reactions(net, spec);
    if (step.contains("rates")) {
      const json& rates = step.at("rates");
      for (std::size_t i = 0; i < rec.new_reaction_indices.size() && i < rates.size(); ++i)
        rec.assigned_rates[rec.new_reaction_indices[i]] = json_rate(rates[i], op);
    }
    return {rec};
  }

  if (op == "E1") {
    ParsedNetwork line;
    try {
      std::string preamble = "species:";
      for (const std::string& s : net.species) preamble += " " + s;
      line = parse_network(preamble + "\n" + step.at("reaction").get<std::string>());
    } catch (const ParseError& e) {
      throw EnlargeError(op + std::string(": ") + e.what());
    }
    if (line.net.n_species() != net.n_species()) throw EnlargeError("E1: reaction must not introduce new species");
    std::vector<Reaction> reactions = line.net.reactions;
    if (reactions.empty()) throw EnlargeError("E1: no reaction in step");
    if (step.contains("label") && reactions.size() == 1) reactions[0].label = step.at("label").get<std::string>();
    EnlargementRecord rec = add_dependent_reactions(net, reactions);
    if (step.contains("rate"))
      rec.assigned_rates[rec.new_reaction_indices.at(0)] = json_rate(step.at("rate"), op);
    if (step.contains("rates")) {
      const json& rates = step.at("rates");
      for (std::size_t i = 0; i < rec.new_reaction_indices.size() && i < rates.size(); ++i)
        rec.assigned_rates[rec.new_reaction_indices[i]] = json_rate(rates[i], op);
    }
    for (std::size_t i = 0; i < reactions.size(); ++i)
      if (line.rates[i]) rec.assigned_rates[rec.new_reaction_indices[i]] = *line.rates[i];
    return {rec};
  }

  if (op == "E2") {
    EnlargementRecord rec = fully_open_extension(net);
    if (step.contains("rate"))
      for (int idx : rec.new_reaction_indices) rec.assigned_rates[idx] = json_rate(step.at("rate"), op);
    return {rec};
  }

  if (op == "E3" || op == "E4") {
    std::vector<SpeciesInsertion> insertions;
    for (const json& js : step.value("insert", json::array())) {
      SpeciesInsertion ins;
      ins.reaction = resolve_reaction(net, js.at("reaction"), op);
      ins.reactant_coeff = js.contains("reactant") ? json_rational(js.at("reactant"), op) : Rational(0);
      ins.product_coeff = js.contains("product") ? json_rational(js.at("product"), op) : Rational(0);
      insertions.push_back(ins);
    }
    const std::string name = step.at("species").get<std::string>();
    if (op == "E3") return {add_dependent_species(net, name, insertions)};
    EnlargementRecord rec = add_species_with_inflow_outflow(net, name, insertions);
    if (step.contains("rates")) {
      const json& rates = step.at("rates");
      for (std::size_t i = 0; i < rec.new_reaction_indices.size() && i < rates.size(); ++i)
        rec.assigned_rates[rec.new_reaction_indices[i]] = json_rate(rates[i], op);
    }
    return {rec};
  }

  if (op == "E5") {
    const auto new_species = step.at("new_species").get<std::vector<std::string>>();
    Network scratch = net;
    for (const std::string& s : new_species) scratch.add_species(s);
    std::vector<ReversiblePairSpec> pairs;
    std::vector<std::vector<RateSpec>> pair_rates;
    for (const json& js : step.at("pairs")) {
      ReversiblePairSpec pair;
      try {
        pair.reactant = parse_complex(js.at("reactant").get<std::string>(), scratch, false);
        pair.product = parse_complex(js.at("product").get<std::string>(), scratch, false);
      } catch (const ParseError& e) {
        throw EnlargeError(op + std::string(": ") + e.what());
      }
      pair.label = js.value("label", std::string());
      pairs.push_back(pair);
      std::vector<RateSpec> rates;
      if (js.contains("rates"))
        for (const json& rv : js.at("rates")) rates.push_back(json_rate(rv, op));
      pair_rates.push_back(rates);
    }
    EnlargementRecord rec = add_reversible_reactions(net, new_species, pairs);
    for (std::size_t i = 0; i < pairs.size(); ++i)
      for (std::size_t d = 0; d < pair_rates[i].size() && d < 2; ++d)
        rec.assigned_rates[rec.new_reaction_indices[2 * i + d]] = pair_rates[i][d];
    return {rec};
  }

  if (op == "enzymatic") {
    std::vector<EnzymaticTarget> targets;
    for (const json& js : step.at("targets")) {
      EnzymaticTarget t;
      t.reaction = resolve_reaction(net, js.at("reaction"), op);
      t.enzyme_stoich = js.contains("c") ? json_rational(js.at("c"), op) : Rational(1);
      t.intermediate_name = js.at("intermediate").get<std::string>();
      targets.push_back(t);
    }
    auto records = apply_enzymatic(net, step.at("enzyme").get<std::string>(), targets);
    if (step.contains("reverse_rates")) {
      const json& rates = step.at("reverse_rates");
      EnlargementRecord& rev = records.back();
      for (std::size_t i = 0; i < rev.new_reaction_indices.size() && i < rates.size(); ++i)
        rev.assigned_rates[rev.new_reaction_indices[i]] = json_rate(rates[i], op);
    }
    return records;
  }

  if (op == "duplicate") {
    return {duplicate_reaction_record(net, resolve_reaction(net, step.at("reaction"), op),
                                      step.at("parts").get<int>())};
  }

  if (op == "trivial_split") {
    const auto new_species = step.at("new_species").get<std::vector<std::string>>();
    Network scratch = net;
    Complex source;
    try {
      source = parse_complex(step.at("complex").get<std::string>(), scratch, false);
    } catch (const ParseError& e) {
      throw EnlargeError(op + std::string(": ") + e.what());
    }
    Complex io, in;
    if (step.contains("intermediate")) {
      std::tie(io, in) = split_complex_string(step.at("intermediate").get<std::string>(), net, new_species, op);
    } else {
      auto [o1, n1] = split_complex_string(step.value("intermediate_old", std::string("0")), net, new_species, op);
      auto [o2, n2] = split_complex_string(step.value("intermediate_new", std::string("0")), net, new_species, op);
      io = o1;
      for (const auto& [i, c] : o2.terms()) io.add(i, c);
      in = n1;
      for (const auto& [i, c] : n2.terms()) in.add(i, c);
    }
    EnlargementRecord rec = add_trivial_then_split(net, source, io, in, new_species,
                                                   step.value("forward_label", std::string()),
                                                   step.value("reverse_label", std::string()));
    if (step.contains("forward_rate"))
      rec.assigned_rates[rec.extra_reaction_indices.at(0)] = json_rate(step.at("forward_rate"), op);
    if (step.contains("reverse_rate"))
      rec.assigned_rates[rec.new_reaction_indices.at(0)] = json_rate(step.at("reverse_rate"), op);
    return {rec};
  }

  throw EnlargeError("unknown script op '" + op + "'");
}

} // namespace

std::vector<EnlargementRecord> compose_enlargements(const Network& net, const nlohmann::json& script) {
  const json& steps = script.is_array() ? script : script.at("steps");
  if (!steps.is_array()) throw EnlargeError("enlargement script must be a JSON array of steps");

  std::vector<EnlargementRecord> chain;
  Network current = net;
  int position = 0;
  for (const json& step : steps) {
    ++position;
    try {
      for (EnlargementRecord& rec : apply_step(current, step)) {
        current = rec.result;
        chain.push_back(std::move(rec));
      }
    } catch (const EnlargeError& e) {
      const std::string op = step.is_object() && step.contains("op") ? step.at("op").get<std::string>() : "?";
      throw EnlargeError("script step " + std::to_string(position) + " (" + op + "): " + e.what(), e.certificate());
    }
  }
  return chain;
}

std::vector<double> compose_rates(const std::vector<double>& base_rates, const std::vector<EnlargementRecord>& chain,
                                  double eps) {
  std::vector<double> current = base_rates;
  for (const EnlargementRecord& rec : chain) {
    if (static_cast<int>(current.size()) != rec.base.n_reactions())
      throw NumericsError("compose_rates: rate vector does not match the chain");
    std::vector<double> next(rec.result.n_reactions(), 0.0);
    for (int j = 0; j < rec.base.n_reactions(); ++j) next[rec.reaction_map[j]] = current[j];
    if (rec.kind == EnlargeKind::Duplicate) {
      const double share = current[rec.dup_reaction] / rec.dup_parts;
      next[rec.reaction_map[rec.dup_reaction]] = share;
      for (int idx : rec.new_reaction_indices) next[idx] = share;
    } else {
      for (int idx : rec.new_reaction_indices) {
        const auto it = rec.assigned_rates.find(idx);
        if (it == rec.assigned_rates.end())
          throw NumericsError("compose_rates: no rate assigned to added reaction '" +
                              rec.result.reactions[idx].label + "' (index " + std::to_string(idx) + ")");
        next[idx] = it->second.resolve(eps);
      }
      for (int idx : rec.extra_reaction_indices) {
        const auto it = rec.assigned_rates.find(idx);
        if (it == rec.assigned_rates.end())
          throw NumericsError("compose_rates: no rate assigned to added reaction '" +
                              rec.result.reactions[idx].label + "' (index " + std::to_string(idx) + ")");
        next[idx] = it->second.resolve(eps);
      }
    }
    current = std::move(next);
  }
  return current;
}

void verify_split_record(const EnlargementRecord& record) {
  if (record.kind != EnlargeKind::Split) throw NumericsError("verify_split_record: not a Split record");
  const RationalMatrix base_gamma = stoichiometric_matrix(record.base);
  const RationalMatrix result_gamma = stoichiometric_matrix(record.result);
  const int n = record.base.n_species();
  const int m = record.m();

  for (int i = 0; i < m; ++i) {
    const int second = record.new_reaction_indices.at(i);
    // second-leg column equals -(alpha_i; beta_i)
    for (int s = 0; s < n; ++s)
      if (result_gamma(record.species_map[s], second) != -record.alpha(s, i))
        throw NumericsError("split record inconsistent: alpha mismatch");
    for (std::size_t r = 0; r < record.new_species_indices.size(); ++r)
      if (result_gamma(record.new_species_indices[r], second) != -record.beta(static_cast<int>(r), i))
        throw NumericsError("split record inconsistent: beta mismatch");
    if (i < static_cast<int>(record.split_reactions.size())) {
      // first leg + second leg reproduces the base column
      const int first = record.reaction_map[record.split_reactions[i]];
      for (int s = 0; s < n; ++s)
        if (result_gamma(record.species_map[s], first) + result_gamma(record.species_map[s], second) !=
            base_gamma(s, record.split_reactions[i]))
          throw NumericsError("split record inconsistent: column sum mismatch");
    }
  }
  if (result_gamma.rank() != base_gamma.rank() + m)
    throw NumericsError("split record inconsistent: rank did not increase by m");
}

} // namespace crn
