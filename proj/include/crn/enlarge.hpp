#ifndef CRN_ENLARGE_HPP
#define CRN_ENLARGE_HPP

#include "crn/kinetics.hpp"
#include "crn/network.hpp"
#include "crn/parser.hpp"

#include <nlohmann/json_fwd.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace crn {

enum class EnlargeKind {
  DependentReaction,     // E1
  FullyOpen,             // E2
  DependentSpecies,      // E3
  SpeciesInflowOutflow,  // E4
  NewReversible,         // E5
  Split,                 // E6
  Enzymatic,             // corollary step marker (expands to E3+E6+E1)
  Duplicate,             // rate-splitting copies of one reaction
};

std::string kind_code(EnlargeKind kind);

/// Full provenance of one enlargement application.
///
/// For Split records the matrices carry the exact data of the construction:
/// column i holds alpha_i = c_i - b_i (old species), beta_i (new-species part
/// of the inserted complex) and c_i (old-species part). Other kinds populate
/// them where the analogous data exists and leave them empty otherwise.
struct EnlargementRecord {
  EnlargeKind kind;
  Network base;
  Network result;

  RationalMatrix alpha;     // n_base x m
  RationalMatrix beta;      // (m+k) x m
  RationalMatrix c_matrix;  // n_base x m

  std::vector<int> split_reactions;         // base indices of the split reactions
  std::vector<int> species_map;             // base species index -> result index
  std::vector<int> reaction_map;            // base reaction index -> result index
  std::vector<int> new_species_indices;     // result indices of added species
  std::vector<int> new_reaction_indices;    // result indices; for Split: the m second legs
  std::vector<int> extra_reaction_indices;  // other added reactions (trivial-split forward leg)

  /// Rates for added reactions (result index -> spec). Split second legs are
  /// pre-assigned eps^(-sigma_i) whenever the exponent is integral.
  std::map<int, RateSpec> assigned_rates;

  int dup_reaction = -1;  // Duplicate only
  int dup_parts = 0;

  int m() const { return beta.cols(); }
};

/// -- E6: splitting reactions ------------------------------------------------

struct SplitPart {
  int reaction = -1;         // base reaction index
  Complex intermediate_old;  // over base species
  Complex intermediate_new;  // over local new-species indices 0..m+k-1
  std::string second_label;  // label for the appended second leg ("" = auto)
};

struct SplitSpec {
  std::vector<SplitPart> splits;
  std::vector<std::string> new_species;  // m+k names, appended after base species
};

/// Replaces each split reaction a->b in place by a -> c + beta_new and appends
/// c + beta_new -> b; requires the stacked new-species matrix to have exact
/// rank m (throws EnlargeError with a dependency certificate otherwise).
EnlargementRecord split_reactions(const Network& net, const SplitSpec& spec);

/// -- E1..E5 -----------------------------------------------------------------

/// E1: each reaction must have net stoichiometry in im Gamma (checked exactly,
/// reaction by reaction as they are appended).
EnlargementRecord add_dependent_reactions(const Network& net, const std::vector<Reaction>& reactions);

/// E2: adds 0 -> X and X -> 0 for every species, skipping pairs already
/// present (detected by exact complex equality).
EnlargementRecord fully_open_extension(const Network& net);

struct SpeciesInsertion {
  int reaction = -1;
  Rational reactant_coeff;  // >= 0
  Rational product_coeff;   // >= 0
};

/// E3: inserts one new species into reactions; exact rank must not change.
EnlargementRecord add_dependent_species(const Network& net, const std::string& name,
                                        const std::vector<SpeciesInsertion>& insertions);

/// E4: inserts one new species plus its inflow and outflow.
EnlargementRecord add_species_with_inflow_outflow(const Network& net, const std::string& name,
                                                  const std::vector<SpeciesInsertion>& insertions);

struct ReversiblePairSpec {
  Complex reactant;  // indexed over result species (base then new)
  Complex product;
  std::string label;
};

/// E5: appends m reversible pairs involving the named new species; the
/// stacked forward-direction new-species matrix must have exact rank m.
EnlargementRecord add_reversible_reactions(const Network& net, const std::vector<std::string>& new_species,
                                           const std::vector<ReversiblePairSpec>& pairs);

/// -- derived constructions --------------------------------------------------

/// Adds the trivial reaction a -> a and splits it, so the result contains
/// a <=> c + beta_new. Returned as one Split record with an extra forward leg.
EnlargementRecord add_trivial_then_split(const Network& net, const Complex& source, const Complex& intermediate_old,
                                         const Complex& intermediate_new, const std::vector<std::string>& new_species,
                                         const std::string& forward_label = {}, const std::string& reverse_label = {});

struct EnzymaticTarget {
  int reaction = -1;
  Rational enzyme_stoich;         // c_i >= 0
  std::string intermediate_name;  // I_i
};

/// Corollary construction: enzyme into both sides (E3), intermediates (E6,
/// identity beta), then the m reverse reactions (E1). Three records.
std::vector<EnlargementRecord> apply_enzymatic(const Network& net, const std::string& enzyme_name,
                                               const std::vector<EnzymaticTarget>& targets);

/// Network-level reaction duplication (rates divide at system build time).
EnlargementRecord duplicate_reaction_record(const Network& net, int reaction, int parts);

/// System-level duplication: `parts` identical copies at rate k/parts each;
/// the right-hand side is pointwise unchanged. parts == 1 is the identity.
MassActionSystem duplicate_reaction(const MassActionSystem& sys, int reaction, int parts);

/// Column sums of the pivot row block of beta; second leg i is driven at
/// eps^(-sigma_i).
std::vector<Rational> epsilon_rate_exponents(const EnlargementRecord& record);
std::vector<double> epsilon_rate_assignment(const EnlargementRecord& record, double eps);

/// -- scripts ----------------------------------------------------------------

/// Executes a JSON enlargement script (array of step objects, or an object
/// with a "steps" array) against `net`. Steps may expand to several records
/// (enzymatic, trivial_split). A failing step aborts with its chain position.
std::vector<EnlargementRecord> compose_enlargements(const Network& net, const nlohmann::json& script);

/// Rate constants for the final network of a chain: base constants follow the
/// reaction maps, added reactions resolve their assigned specs at `eps`,
/// duplicates divide. Throws when an added reaction has no assigned rate.
std::vector<double> compose_rates(const std::vector<double>& base_rates, const std::vector<EnlargementRecord>& chain,
                                  double eps);

/// Exact consistency of a Split record with the result's stoichiometric
/// matrix (the block column-operation identities); throws on violation.
void verify_split_record(const EnlargementRecord& record);

} // namespace crn

#endif
