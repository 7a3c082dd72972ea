#ifndef CRN_SLOWFAST_HPP
#define CRN_SLOWFAST_HPP

#include "crn/enlarge.hpp"
#include "crn/kinetics.hpp"

#include <nlohmann/json_fwd.hpp>

#include <vector>

namespace crn {

/// Exact decomposition data for a Split enlargement, driving the singular
/// perturbation analysis: a nonsingular pivot block beta_hat of beta, the
/// conserved-direction matrix delta, and the exponent data for the critical
/// manifold w = V(z) o z^gamma.
struct SlowFastModel {
  EnlargementRecord record;
  int n = 0;  // base species
  int m = 0;  // split reactions
  int k = 0;  // extra new species

  std::vector<int> hat_rows;        // new-species rows forming beta_hat
  std::vector<int> doublehat_rows;  // remaining new-species rows

  RationalMatrix beta_hat;        // m x m, nonsingular (exact)
  RationalMatrix beta_hat_inv;    // m x m
  RationalMatrix doublehat_beta;  // k x m
  RationalMatrix delta;           // m x k, -(doublehat_beta * beta_hat_inv)^t
  RationalMatrix gamma;           // m x n, -(c * beta_hat_inv)^t
  RationalMatrix v_exponent;      // m x m, (beta_hat_inv)^t

  Vector conserved_offset;  // length k, all-ones unless overridden

  // floating caches
  Matrix alpha_bhinv;  // n x m, alpha * beta_hat_inv
  Matrix delta_t;      // k x m
  Matrix beta_hat_d;   // m x m

  /// Component split of a full new-species vector y (length m+k) into the
  /// pivot part y_hat and the complement y_doublehat.
  void split_y(const Vector& y_full, Vector& y_hat, Vector& y_doublehat) const;
  Vector join_y(const Vector& y_hat, const Vector& y_doublehat) const;
};

/// Selects the pivot rows by exact elimination preferring lowest indices and
/// computes all derived matrices exactly. Requires a record produced by
/// split_reactions (or trivial split) with the rank-m condition certified.
SlowFastModel decompose(const EnlargementRecord& record);

/// Affine chart on the hyperplane delta^t y_hat + y_doublehat = offset:
/// forward yields (z, y_hat) with z = x - alpha beta_hat^{-1} y_hat.
/// Throws NumericsError when the input lies off the hyperplane.
std::pair<Vector, Vector> phi_map(const SlowFastModel& sfm, const Vector& x, const Vector& y_full);
std::pair<Vector, Vector> phi_inverse(const SlowFastModel& sfm, const Vector& z, const Vector& y_hat);

/// Fast-variable rescaling w = y_hat / eps and its inverse.
std::pair<Vector, Vector> psi_map(const Vector& z, const Vector& y_hat, double eps);
std::pair<Vector, Vector> psi_inverse(const Vector& z, const Vector& w, double eps);

enum class SystemVariant { SlowEps, FastEps, SlowZero, FastZero };  // A_eps, B_eps, A0, B0

/// Right-hand sides of the transformed systems. For SlowZero the second
/// component is the algebraic residual rather than a derivative; for FastZero
/// the first component is identically zero.
std::pair<Vector, Vector> system_rhs(const SlowFastModel& sfm, const MassActionSystem& base, SystemVariant variant,
                                     const Vector& z, const Vector& w, double eps);

/// w = V(z) o z^gamma, the equilibrium manifold of the fast subsystem.
Vector critical_manifold(const SlowFastModel& sfm, const MassActionSystem& base, const Vector& z);

/// D_w of the fast subsystem: -beta_hat diag(w^{beta_hat^t} o z^{c^t})
/// beta_hat^t diag(1/w). Real negative spectrum for positive z, w.
Matrix layer_jacobian(const SlowFastModel& sfm, const MassActionSystem& base, const Vector& z, const Vector& w);

/// Compact neighborhood of a base limit set in z-coordinates: a union of
/// coordinate boxes of half-width `radius` around the samples.
struct OrbitTube {
  std::vector<Vector> samples;
  double radius = 0.0;
};

struct EpsilonBound {
  double k_sup = 0.0;     // 2 sup |V(z) o z^gamma| over the tube (sampled, x1.05)
  double d_boundary = 0;  // distance from the tube to the orthant boundary
  double norm_alpha_bhinv = 0.0;
  double norm_delta_t = 0.0;
  double eps0_cap = 0.0;
  double eps1 = 0.0;  // min of the positivity bounds and the cap
  struct Refinement {
    int samples_per_box;
    double sup_estimate;
  };
  std::vector<Refinement> audit;  // sampling audit trail
};

/// Samples the sup over the tube with grid refinement (stop when the change
/// is below 1%, then a 5% safety factor). The delta term is omitted when
/// k == 0. Throws when the tube touches the orthant boundary.
EpsilonBound epsilon_bound(const SlowFastModel& sfm, const MassActionSystem& base, const OrbitTube& tube,
                           double eps0_cap, std::uint64_t seed = 0);

/// Initial condition on the zeroth-order slow manifold over z0: y_hat = eps w
/// with w on the critical manifold, x = z0 + alpha beta_hat^{-1} y_hat, and
/// y_doublehat = offset - delta^t y_hat. Throws on positivity violation.
Vector lifted_initial_condition(const SlowFastModel& sfm, const MassActionSystem& base, const Vector& z0, double eps);

/// Projection of an enlarged-network state to base z-coordinates (applies
/// the conservation restriction and the affine chart).
Vector to_base_coordinates(const SlowFastModel& sfm, const Vector& full_state);

nlohmann::json slowfast_to_json(const SlowFastModel& sfm);
nlohmann::json epsilon_bound_to_json(const EpsilonBound& bound);

} // namespace crn

#endif
