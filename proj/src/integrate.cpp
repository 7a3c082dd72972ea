#include "crn/integrate.hpp"

#include "crn/errors.hpp"

#include <algorithm>
#include <cmath>

namespace crn {

namespace {

// Dormand-Prince RK5(4)7M coefficients.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

} // namespace

Vector Trajectory::eval(double t) const {
  if (times_.empty()) throw NumericsError("Trajectory::eval on empty trajectory");
  if (t <= times_.front()) return states_.front();
  if (t >= times_.back()) return states_.back();
  if (segments_.empty()) {
    // fall back to nearest node
    auto it = std::lower_bound(times_.begin(), times_.end(), t);
    return states_[static_cast<std::size_t>(it - times_.begin())];
  }
  // segment i spans [times_[i], times_[i+1]]
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  std::size_t idx = static_cast<std::size_t>(it - times_.begin());
  idx = (idx == 0) ? 0 : idx - 1;
  idx = std::min(idx, segments_.size() - 1);
  const Segment& s = segments_[idx];
  const double theta = (t - s.t0) / s.h;
  const double theta1 = 1.0 - theta;
  return s.c1 + theta * (s.c2 + theta1 * (s.c3 + theta * (s.c4 + theta1 * s.c5)));
}

double Trajectory::conservation_drift(const Vector& w) const {
  if (states_.empty()) return 0.0;
  const double base = w.dot(states_.front());
  double drift = 0.0;
  for (const Vector& x : states_) drift = std::max(drift, std::abs(w.dot(x) - base));
  return drift;
}

Trajectory integrate_ode(const OdeFunction& f, Vector y0, double t0, double t1, const IntegratorOptions& opts) {
  if (!(t1 > t0)) throw IntegrationError("integrate_ode: t_end must exceed t_start");
  const auto n = y0.size();

  Trajectory traj;
  traj.times_.push_back(t0);
  traj.states_.push_back(y0);

  Vector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), yerr(n);
  auto& stats = traj.stats_;

  auto eval = [&](double t, const Vector& y, Vector& dy) {
    ++stats.evaluations;
    return f(t, y, dy) && dy.allFinite();
  };

  if (!eval(t0, y0, k1)) throw IntegrationError("integrate_ode: right-hand side failed at the initial state");
  traj.derivs_.push_back(k1);

  double h = opts.initial_step;
  if (h <= 0) {
    // crude but serviceable starter: limit both by span and by derivative size
    const double scale = 1.0 + y0.cwiseAbs().maxCoeff();
    const double dscale = 1.0 + k1.cwiseAbs().maxCoeff();
    h = std::min((t1 - t0) / 100.0, 0.01 * scale / dscale);
  }
  if (opts.max_step > 0) h = std::min(h, opts.max_step);

  double t = t0;
  Vector y = y0;

  while (t < t1) {
    if (stats.accepted + stats.rejected > opts.max_steps)
      throw IntegrationError("integrate_ode: exceeded the step budget");
    h = std::min(h, t1 - t);
    const double hmin = 1e-14 * std::max(1.0, std::abs(t));
    if (h < hmin) throw IntegrationError("integrate_ode: step-size underflow at t=" + std::to_string(t));

    bool stage_ok = true;
    ytmp = y + h * (a21 * k1);
    stage_ok = stage_ok && eval(t + c2 * h, ytmp, k2);
    if (stage_ok) {
      ytmp = y + h * (a31 * k1 + a32 * k2);
      stage_ok = eval(t + c3 * h, ytmp, k3);
    }
    if (stage_ok) {
      ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
      stage_ok = eval(t + c4 * h, ytmp, k4);
    }
    if (stage_ok) {
      ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      stage_ok = eval(t + c5 * h, ytmp, k5);
    }
    if (stage_ok) {
      ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      stage_ok = eval(t + h, ytmp, k6);
    }
    if (stage_ok) {
      ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
      stage_ok = eval(t + h, ynew, k7);
    }

    if (!stage_ok) {
      ++stats.rejected;
      h *= 0.5;
      continue;
    }

    yerr = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double err = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sk = opts.atol + opts.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      const double r = yerr[i] / sk;
      err += r * r;
    }
    err = std::sqrt(err / static_cast<double>(n));

    if (!std::isfinite(err) || err > 1.0) {
      ++stats.rejected;
      const double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
      h *= std::min(fac, 0.9);
      continue;
    }

    if (opts.dense) {
      Trajectory::Segment seg;
      seg.t0 = t;
      seg.h = h;
      seg.c1 = y;
      seg.c2 = ynew - y;
      seg.c3 = h * k1 - seg.c2;
      seg.c4 = seg.c2 - h * k7 - seg.c3;
      seg.c5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      traj.segments_.push_back(std::move(seg));
    }

    t += h;
    y = ynew;
    k1 = k7;  // FSAL
    ++stats.accepted;
    traj.times_.push_back(t);
    traj.states_.push_back(y);
    traj.derivs_.push_back(k1);

    double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
    fac = std::clamp(fac, 0.2, 10.0);
    h *= fac;
    if (opts.max_step > 0) h = std::min(h, opts.max_step);
  }
  return traj;
}

Trajectory integrate(const MassActionSystem& sys, const Vector& x0, double t_end, const IntegratorOptions& opts) {
  auto f = [&sys](double, const Vector& y, Vector& dy) { return sys.rhs_into(y, dy); };
  return integrate_ode(f, x0, 0.0, t_end, opts);
}

Vector flow_with_variational(const MassActionSystem& sys, const Vector& x0, double duration, Matrix& fundamental,
                             const IntegratorOptions& opts) {
  const int n = sys.dim();
  Vector aug(n + n * n);
  aug.head(n) = x0;
  Eigen::Map<Matrix>(aug.data() + n, n, n) = Matrix::Identity(n, n);

  auto f = [&sys, n](double, const Vector& y, Vector& dy) {
    dy.resize(y.size());
    Vector state = y.head(n);
    Vector dstate(n);
    if (!sys.rhs_into(state, dstate)) return false;
    dy.head(n) = dstate;
    Matrix jac;
    try {
      jac = sys.jacobian(state);
    } catch (const EvaluationError&) {
      return false;
    }
    Eigen::Map<const Matrix> phi(y.data() + n, n, n);
    Eigen::Map<Matrix>(dy.data() + n, n, n) = jac * phi;
    return true;
  };

  IntegratorOptions o = opts;
  o.dense = false;
  const Trajectory traj = integrate_ode(f, aug, 0.0, duration, o);
  const Vector& end = traj.back();
  fundamental = Eigen::Map<const Matrix>(end.data() + n, n, n);
  return end.head(n);
}

} // namespace crn
