#ifndef CRN_VERIFY_HPP
#define CRN_VERIFY_HPP

#include "crn/enlarge.hpp"
#include "crn/orbits.hpp"
#include "crn/slowfast.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace crn {

/// Inputs of one certification run: a base system, an enlargement script,
/// initial conditions locating the base limit sets, and an eps sweep.
struct InheritanceTask {
  Network base_net;
  std::vector<double> base_rates;
  nlohmann::json script = nlohmann::json::array();
  std::vector<Vector> initials;
  std::vector<double> eps_schedule;  // strictly decreasing, positive
  ClassificationTolerances tolerances;
  double tube_radius = 0.1;
  double zeta = 0.5;               // Hausdorff pass threshold at the smallest eps
  double t_end = 200.0;            // base exploration horizon
  double transient_fraction = 0.5;
  double lift_settle_periods = 40.0;  // lifted-orbit exploration, in base periods
  double lift_transient_fraction = 0.25;
  IntegratorOptions integrator;
  double eps0_cap = 1.0;
  std::uint64_t seed = 0;
  std::string name;
};

/// Reads a task JSON file; network/script paths resolve relative to it.
InheritanceTask load_task(const std::string& path);

/// Outcome of comparing one base limit set against its lifted counterpart.
struct ClassificationComparison {
  bool pass = false;
  StabilityFlags base_flags, lifted_flags;
  int expected_extras = 0;
  int found_extras = 0;
  bool extras_stable = false;
  std::vector<std::complex<double>> extras;  // the fast directions
  std::vector<std::string> notes;
};

/// Checks that the lifted limit set preserves {nondegenerate, hyperbolic,
/// linearly stable} and carries exactly `expected_extras` additional stable
/// multipliers/eigenvalues. Throws NumericsError on kind mismatch.
ClassificationComparison compare_classifications(const LimitSetReport& base, const LimitSetReport& lifted,
                                                 int expected_extras, const ClassificationTolerances& tols);

struct SweepEntry {
  double eps = 0.0;
  int limit_set = 0;
  bool found = false;
  bool positive = false;
  double hausdorff_z = std::numeric_limits<double>::quiet_NaN();
  double conservation_drift = 0.0;
  std::optional<LimitSetReport> lifted;
  std::optional<ClassificationComparison> comparison;
  std::string failure;
};

struct InheritanceCertificate {
  std::string task_name;
  std::vector<LimitSetReport> base_reports;
  nlohmann::json slowfast_model;  // empty for an empty script
  std::vector<nlohmann::json> epsilon_bounds;  // one per limit set
  std::vector<SweepEntry> sweep;
  bool tubes_disjoint = true;
  bool pass = false;
  std::vector<std::string> notes;

  nlohmann::json to_json() const;
  void print_summary(std::ostream& os) const;
};

/// Runs the full pipeline: find base limit sets, enlarge, sweep eps with
/// natural continuation, and check the inheritance contract. A failure at one
/// eps is recorded and the sweep continues.
InheritanceCertificate run_inheritance(const InheritanceTask& task);

} // namespace crn

#endif
