#ifndef CRN_INTEGRATE_HPP
#define CRN_INTEGRATE_HPP

#include "crn/kinetics.hpp"

#include <functional>
#include <vector>

namespace crn {

struct IntegratorOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double initial_step = 0.0;  // 0 = choose automatically
  double max_step = 0.0;      // 0 = no cap
  std::size_t max_steps = 100'000'000;
  bool dense = true;  // keep per-step interpolation data
};

/// Right-hand side callback; returns false when the state is outside the
/// domain or the result is non-finite, which makes the integrator retry with
/// a smaller step.
using OdeFunction = std::function<bool(double t, const Vector& y, Vector& dy)>;

/// Solution of one integration run: accepted nodes, node derivatives and
/// (optionally) dense-output segments allowing evaluation at any interior t.
class Trajectory {
 public:
  std::size_t size() const { return times_.size(); }
  double t_front() const { return times_.front(); }
  double t_back() const { return times_.back(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<Vector>& states() const { return states_; }
  const std::vector<Vector>& derivatives() const { return derivs_; }
  const Vector& state(std::size_t i) const { return states_[i]; }
  const Vector& back() const { return states_.back(); }

  bool has_dense() const { return !segments_.empty(); }

  /// Dense evaluation; clamps t into [t_front, t_back].
  Vector eval(double t) const;

  struct Stats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t evaluations = 0;
  };
  const Stats& stats() const { return stats_; }

  /// max_i |w . (x_i - x_0)| over the stored nodes, for a conservation row w.
  double conservation_drift(const Vector& w) const;

 private:
  friend Trajectory integrate_ode(const OdeFunction&, Vector, double, double, const IntegratorOptions&);

  struct Segment {
    double t0, h;
    Vector c1, c2, c3, c4, c5;  // dopri5 dense-output coefficients
  };

  std::vector<double> times_;
  std::vector<Vector> states_;
  std::vector<Vector> derivs_;
  std::vector<Segment> segments_;
  Stats stats_;
};

/// Adaptive Dormand-Prince 5(4) with 4th-order dense output. Throws
/// IntegrationError on step-size underflow or persistent evaluation failure.
Trajectory integrate_ode(const OdeFunction& f, Vector y0, double t0, double t1, const IntegratorOptions& opts = {});

/// Mass-action convenience wrapper: x' = Gamma v(x) from t=0 to t_end.
Trajectory integrate(const MassActionSystem& sys, const Vector& x0, double t_end, const IntegratorOptions& opts = {});

/// Flows x0 forward by `duration` and also transports the n x n fundamental
/// matrix along the trajectory (variational equation with the analytic
/// Jacobian). Returns the end state; `fundamental` holds the transport map.
Vector flow_with_variational(const MassActionSystem& sys, const Vector& x0, double duration, Matrix& fundamental,
                             const IntegratorOptions& opts = {});

} // namespace crn

#endif
