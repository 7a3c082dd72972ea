#ifndef CRN_ORBITS_HPP
#define CRN_ORBITS_HPP

#include "crn/integrate.hpp"
#include "crn/kinetics.hpp"

#include <nlohmann/json_fwd.hpp>

#include <complex>
#include <string>
#include <vector>

namespace crn {

struct ClassificationTolerances {
  double zero_eig_tol = 1e-6;
  double unit_circle_tol = 1e-4;
  double trivial_multiplier_tol = 1e-6;
};

enum class LimitKind { Equilibrium, PeriodicOrbit };

enum class StabilityClass { Degenerate, Nondegenerate, Hyperbolic, LinearlyStable };

std::string to_string(StabilityClass c);
std::string to_string(LimitKind k);

/// Flags for the three nested properties, relative to the stoichiometric
/// class. LinearlyStable implies Hyperbolic implies Nondegenerate.
struct StabilityFlags {
  bool nondegenerate = false;
  bool hyperbolic = false;
  bool linearly_stable = false;
};

/// Classification from reduced eigenvalues (equilibria) or nontrivial Floquet
/// multipliers (orbits); thresholds straight from the tolerance record.
StabilityClass classify_spectrum(LimitKind kind, const std::vector<std::complex<double>>& values,
                                 const ClassificationTolerances& tols, StabilityFlags* flags = nullptr);

/// An equilibrium or periodic orbit with its reduced spectrum relative to the
/// stoichiometric class.
struct LimitSetReport {
  LimitKind kind = LimitKind::Equilibrium;
  Vector point;                          // equilibrium, or orbit anchor
  double period = 0.0;                   // orbits
  std::vector<Vector> samples;           // orbit samples over one period
  std::vector<std::complex<double>> reduced_spectrum;  // nontrivial multipliers / reduced eigenvalues
  std::complex<double> trivial_multiplier{0.0, 0.0};
  double residual = 0.0;  // ||Gamma v|| or shooting mismatch
  StabilityClass classification = StabilityClass::Degenerate;
  StabilityFlags flags;
  ClassificationTolerances tolerances;
  std::string diagnostic;
};

nlohmann::json report_to_json(const LimitSetReport& report);

struct NewtonOptions {
  int max_iterations = 60;
  double residual_tol = 1e-10;  // on ||Gamma v|| relative to 1 + |x|
};

/// Newton within the stoichiometric class of `guess` (x = guess + B u).
/// Throws NumericsError on non-convergence or escape from the positive
/// orthant; a singular reduced Jacobian at the solution is reported as a
/// degenerate classification, not an error.
LimitSetReport find_equilibrium(const MassActionSystem& sys, const Vector& guess, const ReducedBasis& basis,
                                const ClassificationTolerances& tols = {}, const NewtonOptions& opts = {});

struct PoincareSection {
  Vector point;
  Vector normal;  // unit flow direction at the section point
};

struct RoughOrbit {
  bool found = false;
  Vector anchor;
  double period = 0.0;
  PoincareSection section;
  std::string diagnostic;
};

struct DetectOptions {
  double transient_fraction = 0.5;  // discard this leading fraction
  double return_time_tol = 0.01;    // successive return times agree to 1%
  double shrink_ratio = 0.9;        // monotone shrinking below this = decay
  double min_diameter = 1e-8;
};

/// Scans a trajectory for recurrence through a deterministic Poincare section
/// (plane through the post-transient state of maximal first coordinate,
/// normal along the flow). Not finding an orbit is a result, not an error.
RoughOrbit detect_periodic_orbit(const Trajectory& traj, const DetectOptions& opts = {});

struct ShootingOptions {
  double residual_tol = 1e-9;  // on ||x(T) - x(0)|| relative to 1 + |x|
  int max_iterations = 40;
  int samples = 512;  // orbit samples stored in the report
  IntegratorOptions integrator{};
  int segments = 1;  // two-segment fallback engages automatically
};

/// Single-shooting Newton refinement of a rough orbit on its stoichiometric
/// class, with the monodromy obtained from the variational equation. If the
/// orbit integration blows up (stiffness), a two-segment shooting pass is
/// attempted before giving up.
LimitSetReport refine_orbit(const MassActionSystem& sys, const RoughOrbit& rough, const ReducedBasis& basis,
                            const ClassificationTolerances& tols = {}, const ShootingOptions& opts = {});

/// Symmetric Hausdorff distance between finite sample sets (Euclidean).
double hausdorff_distance(const std::vector<Vector>& a, const std::vector<Vector>& b);

} // namespace crn

#endif
