#include "crn/orbits.hpp"

#include "crn/errors.hpp"
#include "crn/kernels.hpp"

#include <nlohmann/json.hpp>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace crn {

std::string to_string(StabilityClass c) {
  switch (c) {
    case StabilityClass::Degenerate: return "degenerate";
    case StabilityClass::Nondegenerate: return "nondegenerate";
    case StabilityClass::Hyperbolic: return "hyperbolic";
    case StabilityClass::LinearlyStable: return "linearly stable";
  }
  return "?";
}

std::string to_string(LimitKind k) { return k == LimitKind::Equilibrium ? "equilibrium" : "periodic orbit"; }

StabilityClass classify_spectrum(LimitKind kind, const std::vector<std::complex<double>>& values,
                                 const ClassificationTolerances& tols, StabilityFlags* flags) {
  for (double t : {tols.zero_eig_tol, tols.unit_circle_tol, tols.trivial_multiplier_tol})
    if (!(t > 0) || !(t < 0.1)) throw NumericsError("classification tolerances must lie in (0, 0.1)");
  StabilityFlags f;
  f.nondegenerate = true;
  f.hyperbolic = true;
  f.linearly_stable = true;
  for (const std::complex<double>& v : values) {
    if (kind == LimitKind::Equilibrium) {
      if (std::abs(v) <= tols.zero_eig_tol) f.nondegenerate = false;
      if (std::abs(v.real()) <= tols.zero_eig_tol) f.hyperbolic = false;
      if (!(v.real() < -tols.zero_eig_tol)) f.linearly_stable = false;
    } else {
      if (std::abs(v - 1.0) <= tols.unit_circle_tol) f.nondegenerate = false;
      if (std::abs(std::abs(v) - 1.0) <= tols.unit_circle_tol) f.hyperbolic = false;
      if (!(std::abs(v) < 1.0 - tols.unit_circle_tol)) f.linearly_stable = false;
    }
  }
  // hyperbolicity and stability only make sense for nondegenerate limit sets
  f.hyperbolic = f.hyperbolic && f.nondegenerate;
  f.linearly_stable = f.linearly_stable && f.hyperbolic;
  if (flags) *flags = f;
  if (f.linearly_stable) return StabilityClass::LinearlyStable;
  if (f.hyperbolic) return StabilityClass::Hyperbolic;
  if (f.nondegenerate) return StabilityClass::Nondegenerate;
  return StabilityClass::Degenerate;
}

nlohmann::json report_to_json(const LimitSetReport& report) {
  nlohmann::json j;
  j["kind"] = to_string(report.kind);
  j["classification"] = to_string(report.classification);
  j["nondegenerate"] = report.flags.nondegenerate;
  j["hyperbolic"] = report.flags.hyperbolic;
  j["linearly_stable"] = report.flags.linearly_stable;
  j["residual"] = report.residual;
  j["point"] = std::vector<double>(report.point.data(), report.point.data() + report.point.size());
  if (report.kind == LimitKind::PeriodicOrbit) {
    j["period"] = report.period;
    j["trivial_multiplier"] = {report.trivial_multiplier.real(), report.trivial_multiplier.imag()};
  }
  nlohmann::json spectrum = nlohmann::json::array();
  for (const auto& v : report.reduced_spectrum) spectrum.push_back({v.real(), v.imag()});
  j[report.kind == LimitKind::PeriodicOrbit ? "multipliers" : "eigenvalues"] = spectrum;
  j["tolerances"] = {{"zero_eig_tol", report.tolerances.zero_eig_tol},
                     {"unit_circle_tol", report.tolerances.unit_circle_tol},
                     {"trivial_multiplier_tol", report.tolerances.trivial_multiplier_tol}};
  if (!report.diagnostic.empty()) j["diagnostic"] = report.diagnostic;
  return j;
}

namespace {

std::vector<std::complex<double>> eigenvalues_of(const Matrix& m) {
  if (m.rows() == 0) return {};
  Eigen::EigenSolver<Matrix> solver(m, false);
  std::vector<std::complex<double>> out(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = solver.eigenvalues()[i];
  return out;
}

bool positive(const Vector& x) { return (x.array() > 0).all(); }

} // namespace

LimitSetReport find_equilibrium(const MassActionSystem& sys, const Vector& guess, const ReducedBasis& basis,
                                const ClassificationTolerances& tols, const NewtonOptions& opts) {
  if (!positive(guess)) throw NumericsError("find_equilibrium: guess must be positive");
  const Matrix& b = basis.columns();
  const int rank = basis.dimension();

  Vector x = guess;
  auto residual_norm = [&](const Vector& state) { return sys.rhs(state).norm(); };
  double res = residual_norm(x);

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    const double scale = 1.0 + x.norm();
    if (res < opts.residual_tol * scale) break;
    if (rank == 0) break;

    const Matrix jr = b.transpose() * sys.jacobian(x) * b;
    const Vector fr = b.transpose() * sys.rhs(x);
    Eigen::FullPivLU<Matrix> lu(jr);
    if (!lu.isInvertible())
      throw NumericsError("find_equilibrium: singular reduced Jacobian away from a solution");
    const Vector du = lu.solve(-fr);

    // damped update, kept inside the positive orthant
    double lambda = 1.0;
    bool moved = false;
    for (int halving = 0; halving < 40; ++halving, lambda *= 0.5) {
      const Vector trial = x + b * (lambda * du);
      if (!positive(trial)) continue;
      double trial_res;
      try {
        trial_res = residual_norm(trial);
      } catch (const EvaluationError&) {
        continue;
      }
      if (trial_res < res) {
        x = trial;
        res = trial_res;
        moved = true;
        break;
      }
    }
    if (!moved) throw NumericsError("find_equilibrium: Newton step could not stay positive and reduce the residual");
  }

  const double scale = 1.0 + x.norm();
  if (res >= opts.residual_tol * scale)
    throw NumericsError("find_equilibrium: no convergence (residual " + std::to_string(res) + ")");

  LimitSetReport report;
  report.kind = LimitKind::Equilibrium;
  report.point = x;
  report.residual = res;
  report.tolerances = tols;
  report.reduced_spectrum = eigenvalues_of(b.transpose() * sys.jacobian(x) * b);
  report.classification = classify_spectrum(LimitKind::Equilibrium, report.reduced_spectrum, tols, &report.flags);
  return report;
}

RoughOrbit detect_periodic_orbit(const Trajectory& traj, const DetectOptions& opts) {
  RoughOrbit out;
  if (traj.size() < 4) {
    out.diagnostic = "trajectory too short";
    return out;
  }
  const double t_cut = traj.t_front() + opts.transient_fraction * (traj.t_back() - traj.t_front());

  // deterministic section: post-transient state of maximal first coordinate,
  // earliest time on ties; normal along the flow there
  std::size_t best = traj.size();
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (traj.times()[i] < t_cut) continue;
    if (best == traj.size() || traj.state(i)[0] > traj.state(best)[0]) best = i;
  }
  if (best == traj.size()) {
    out.diagnostic = "no post-transient samples";
    return out;
  }
  const Vector p0 = traj.state(best);
  const Vector f0 = traj.derivatives()[best];
  const double fscale = 1.0 + p0.norm();
  if (f0.norm() <= 1e-12 * fscale) {
    out.diagnostic = "stationary state: flow vanishes at the section point";
    return out;
  }
  const Vector normal = f0.normalized();
  out.section = {p0, normal};

  auto g = [&](double t) { return normal.dot(traj.eval(t) - p0); };

  // positive-direction crossings of the section after the transient cut
  std::vector<double> crossings;
  for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
    const double ta = traj.times()[i], tb = traj.times()[i + 1];
    if (tb < t_cut) continue;
    double ga = g(ta), gb = g(tb);
    if (!(ga < 0.0 && gb >= 0.0)) continue;
    double lo = ta, hi = tb;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (g(mid) < 0.0 ? lo : hi) = mid;
    }
    const double tc = 0.5 * (lo + hi);
    if (crossings.empty() || tc - crossings.back() > 1e-9 * (1.0 + std::abs(tc))) crossings.push_back(tc);
  }

  if (crossings.size() < 3) {
    out.diagnostic = "fewer than 3 section crossings";
    return out;
  }

  std::vector<double> returns;
  for (std::size_t i = 0; i + 1 < crossings.size(); ++i) returns.push_back(crossings[i + 1] - crossings[i]);

  // loop diameters distinguish a genuine orbit from decay to an equilibrium
  std::vector<double> diameters;
  for (std::size_t i = 0; i + 1 < crossings.size(); ++i) {
    const Vector start = traj.eval(crossings[i]);
    double diameter = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
      if (traj.times()[k] < crossings[i] || traj.times()[k] > crossings[i + 1]) continue;
      diameter = std::max(diameter, (traj.state(k) - start).norm());
    }
    diameters.push_back(diameter);
  }
  bool shrinking = diameters.size() >= 2;
  for (std::size_t i = 0; i + 1 < diameters.size(); ++i)
    shrinking = shrinking && diameters[i + 1] < opts.shrink_ratio * diameters[i];
  if (shrinking || diameters.back() < opts.min_diameter * fscale) {
    out.diagnostic = "return loops shrink monotonically (decay to equilibrium)";
    return out;
  }

  const double last = returns.back();
  const double prev = returns[returns.size() - 2];
  if (std::abs(last - prev) > opts.return_time_tol * last) {
    out.diagnostic = "successive return times disagree by more than " + std::to_string(opts.return_time_tol * 100) + "%";
    return out;
  }

  out.found = true;
  out.anchor = traj.eval(crossings.back());
  out.period = last;
  return out;
}

namespace {

// Orthonormal basis, inside the reduced coordinates, of the directions lying
// in the section (perpendicular to the reduced normal).
Matrix section_tangent_basis(const Vector& reduced_normal) {
  const Eigen::Index r = reduced_normal.size();
  Eigen::HouseholderQR<Matrix> qr(reduced_normal);
  Matrix q = qr.householderQ();
  return q.rightCols(r - 1);
}

struct ShootingResult {
  Vector anchor;
  double period;
  double residual;
  Matrix monodromy;  // full n x n at the anchor
};

// K-segment shooting on the stoichiometric class: unknowns are the section
// coordinates of the anchor, the reduced coordinates of the interior points,
// and the period.
ShootingResult shoot(const MassActionSystem& sys, const ReducedBasis& basis, const Vector& anchor0, double period0,
                     const Vector& normal, int segments, const ShootingOptions& opts) {
  const Matrix& b = basis.columns();
  const int rank = basis.dimension();
  const int k_seg = segments;
  if (rank < 1) throw NumericsError("refine_orbit: network has rank 0");

  const Vector reduced_normal = (b.transpose() * normal).eval();
  if (reduced_normal.norm() < 1e-12) throw NumericsError("refine_orbit: flow direction escapes the class");
  const Matrix tangent = section_tangent_basis(reduced_normal.normalized());  // rank x (rank-1)

  // unknown layout: [s (rank-1) | u_1..u_{K-1} (rank each) | T]
  const int unknowns = (rank - 1) + (k_seg - 1) * rank + 1;

  std::vector<Vector> interior0(k_seg - 1);
  {
    // seed interior points by integrating the rough orbit
    Vector x = anchor0;
    for (int s = 0; s + 1 < k_seg; ++s) {
      Trajectory leg = integrate(sys, x, period0 / k_seg, opts.integrator);
      x = leg.back();
      interior0[s] = x;
    }
  }

  Vector z = Vector::Zero(unknowns);
  z[unknowns - 1] = period0;

  auto decode = [&](const Vector& vars, std::vector<Vector>& points, double& period) {
    points.resize(k_seg);
    points[0] = anchor0 + b * (tangent * vars.head(rank - 1));
    for (int s = 0; s + 1 < k_seg; ++s)
      points[s + 1] = interior0[s] + b * vars.segment(rank - 1 + s * rank, rank);
    period = vars[unknowns - 1];
  };

  auto evaluate = [&](const Vector& vars, Vector& residuals, std::vector<Matrix>* transports,
                      std::vector<Vector>* flows) -> std::vector<Vector> {
    std::vector<Vector> points;
    double period;
    decode(vars, points, period);
    if (!(period > 0)) throw NumericsError("refine_orbit: period went non-positive");
    for (const Vector& p : points)
      if (!positive(p)) throw NumericsError("refine_orbit: shooting point left the positive orthant");

    residuals.resize(k_seg * rank);
    if (transports) transports->resize(k_seg);
    if (flows) flows->resize(k_seg);
    for (int s = 0; s < k_seg; ++s) {
      Vector end;
      if (transports) {
        Matrix phi;
        end = flow_with_variational(sys, points[s], period / k_seg, phi, opts.integrator);
        (*transports)[s] = phi;
      } else {
        Trajectory leg = integrate(sys, points[s], period / k_seg, opts.integrator);
        end = leg.back();
      }
      if (flows) (*flows)[s] = sys.rhs(end);
      const Vector target = points[(s + 1) % k_seg];
      residuals.segment(s * rank, rank) = b.transpose() * (end - target);
    }
    return points;
  };

  double best_res = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    Vector residuals;
    std::vector<Matrix> transports;
    std::vector<Vector> flows;
    std::vector<Vector> points = evaluate(z, residuals, &transports, &flows);
    const double scale = 1.0 + points[0].norm();
    best_res = residuals.norm();
    if (best_res < opts.residual_tol * scale) {
      Matrix monodromy = Matrix::Identity(sys.dim(), sys.dim());
      for (int s = k_seg - 1; s >= 0; --s) monodromy = monodromy * transports[s];
      double period;
      std::vector<Vector> pts;
      decode(z, pts, period);
      // report the true closure error in state space
      Vector x = pts[0];
      for (int s = 0; s < k_seg; ++s) {
        Trajectory leg = integrate(sys, x, period / k_seg, opts.integrator);
        x = leg.back();
      }
      return {pts[0], period, (x - pts[0]).norm(), monodromy};
    }

    // assemble the Newton matrix
    Matrix jac = Matrix::Zero(k_seg * rank, unknowns);
    for (int s = 0; s < k_seg; ++s) {
      const Matrix reduced_transport = b.transpose() * transports[s] * b;  // d(end_s)/d(point_s), reduced
      // derivative w.r.t. the segment start point
      if (s == 0) {
        jac.block(0, 0, rank, rank - 1) = reduced_transport * tangent;
      } else {
        jac.block(s * rank, rank - 1 + (s - 1) * rank, rank, rank) = reduced_transport;
      }
      // derivative w.r.t. the segment target point
      const int target = (s + 1) % k_seg;
      if (target == 0) {
        jac.block(s * rank, 0, rank, rank - 1) -= tangent;
      } else {
        jac.block(s * rank, rank - 1 + (target - 1) * rank, rank, rank) -= Matrix::Identity(rank, rank);
      }
      // derivative w.r.t. the period
      jac.block(s * rank, unknowns - 1, rank, 1) = (b.transpose() * flows[s]) / k_seg;
    }

    const Vector dz = jac.colPivHouseholderQr().solve(-residuals);
    if (!dz.allFinite()) throw NumericsError("refine_orbit: singular shooting system");

    double lambda = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 30; ++halving, lambda *= 0.5) {
      const Vector trial = z + lambda * dz;
      Vector trial_res;
      try {
        evaluate(trial, trial_res, nullptr, nullptr);
      } catch (const NumericsError&) {
        continue;
      } catch (const IntegrationError&) {
        continue;
      } catch (const EvaluationError&) {
        continue;
      }
      if (trial_res.norm() < best_res || lambda < 1e-6) {
        z = trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) throw NumericsError("refine_orbit: damped Newton stalled (residual " + std::to_string(best_res) + ")");
  }
  throw NumericsError("refine_orbit: shooting did not converge (residual " + std::to_string(best_res) + ")");
}

} // namespace

LimitSetReport refine_orbit(const MassActionSystem& sys, const RoughOrbit& rough, const ReducedBasis& basis,
                            const ClassificationTolerances& tols, const ShootingOptions& opts) {
  if (!rough.found) throw NumericsError("refine_orbit: no rough orbit supplied");

  ShootingResult sol{};
  bool solved = false;
  std::string first_error;
  for (int segments : {opts.segments, 2}) {
    try {
      sol = shoot(sys, basis, rough.anchor, rough.period, rough.section.normal, segments, opts);
      solved = true;
      break;
    } catch (const std::exception& e) {
      if (first_error.empty()) first_error = e.what();
      if (segments != opts.segments) break;
    }
  }
  if (!solved) throw NumericsError("refine_orbit: " + first_error);

  LimitSetReport report;
  report.kind = LimitKind::PeriodicOrbit;
  report.point = sol.anchor;
  report.period = sol.period;
  report.residual = sol.residual;
  report.tolerances = tols;

  // orbit samples over one period (dense output)
  {
    IntegratorOptions io = opts.integrator;
    io.dense = true;
    Trajectory cycle = integrate(sys, sol.anchor, sol.period, io);
    for (int i = 0; i < opts.samples; ++i)
      report.samples.push_back(cycle.eval(sol.period * i / static_cast<double>(opts.samples)));
  }

  const Matrix reduced_monodromy = basis.columns().transpose() * sol.monodromy * basis.columns();
  std::vector<std::complex<double>> multipliers = eigenvalues_of(reduced_monodromy);

  // strip the trivial multiplier (nearest 1); ambiguity means degenerate
  std::size_t trivial = 0;
  for (std::size_t i = 1; i < multipliers.size(); ++i)
    if (std::abs(multipliers[i] - 1.0) < std::abs(multipliers[trivial] - 1.0)) trivial = i;
  if (multipliers.empty() || std::abs(multipliers[trivial] - 1.0) > tols.trivial_multiplier_tol) {
    report.classification = StabilityClass::Degenerate;
    report.diagnostic = "no Floquet multiplier within trivial_multiplier_tol of 1";
    for (std::size_t i = 0; i < multipliers.size(); ++i) report.reduced_spectrum.push_back(multipliers[i]);
    return report;
  }
  int near_one = 0;
  for (const auto& mu : multipliers)
    if (std::abs(mu - 1.0) <= tols.trivial_multiplier_tol) ++near_one;
  report.trivial_multiplier = multipliers[trivial];
  for (std::size_t i = 0; i < multipliers.size(); ++i)
    if (i != trivial) report.reduced_spectrum.push_back(multipliers[i]);
  if (near_one > 1) {
    report.classification = StabilityClass::Degenerate;
    report.diagnostic = "multiple multipliers within trivial_multiplier_tol of 1";
    report.flags = {};
    return report;
  }

  report.classification = classify_spectrum(LimitKind::PeriodicOrbit, report.reduced_spectrum, tols, &report.flags);
  return report;
}

double hausdorff_distance(const std::vector<Vector>& a, const std::vector<Vector>& b) {
  return kernels::hausdorff_distance(a, b);
}

} // namespace crn
