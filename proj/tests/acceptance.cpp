// Acceptance suite: end-to-end checks of the numbered criteria, one pass/fail
// line each, with wall-clock budgets enforced. Exit status is nonzero when
// any criterion fails.

#include "crn/enlarge.hpp"
#include "crn/errors.hpp"
#include "crn/integrate.hpp"
#include "crn/kinetics.hpp"
#include "crn/network.hpp"
#include "crn/orbits.hpp"
#include "crn/parser.hpp"
#include "crn/slowfast.hpp"
#include "crn/verify.hpp"

#include "test_util.hpp"

#include <nlohmann/json.hpp>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

using namespace crn;
using test::load_fixture;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void run_criterion(int number, const std::string& name, double budget_seconds,
                   const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome outcome;
  try {
    outcome = body();
  } catch (const std::exception& e) {
    outcome.pass = false;
    outcome.detail = std::string("exception: ") + e.what();
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_budget = elapsed < budget_seconds;
  const bool pass = outcome.pass && in_budget;
  if (!pass) ++failures;
  std::printf("[%s] %d. %s (%.2fs/%.0fs)%s%s\n", pass ? "PASS" : "FAIL", number, name.c_str(), elapsed,
              budget_seconds, outcome.detail.empty() ? "" : ": ", outcome.detail.c_str());
  std::fflush(stdout);
}

MassActionSystem load_system(const char* fixture, double eps = 1.0) {
  const ParsedNetwork p = load_fixture(fixture);
  std::vector<double> k;
  for (const auto& spec : p.rates) k.push_back(spec ? spec->resolve(eps) : 1.0);
  return {p.net, k};
}

EnlargementRecord split_record(const char* fixture, const std::vector<std::pair<std::string, std::string>>& splits,
                               const std::vector<std::string>& new_species) {
  const Network net = load_fixture(fixture).net;
  Network scratch = net;
  for (const auto& s : new_species) scratch.add_species(s);
  SplitSpec spec;
  spec.new_species = new_species;
  for (const auto& [label, intermediate] : splits) {
    SplitPart part;
    part.reaction = net.reaction_index(label);
    const Complex combined = parse_complex(intermediate, scratch);
    for (const auto& [idx, coeff] : combined.terms()) {
      if (idx < net.n_species())
        part.intermediate_old.set(idx, coeff);
      else
        part.intermediate_new.set(idx - net.n_species(), coeff);
    }
    spec.splits.push_back(part);
  }
  return split_reactions(net, spec);
}

ShootingOptions tight_shooting() {
  ShootingOptions opts;
  opts.residual_tol = 1e-11;
  opts.integrator.rtol = 1e-12;
  opts.integrator.atol = 1e-14;
  return opts;
}

Outcome criterion_figure1() {
  const MassActionSystem sys = load_system("r1.crn");
  const Trajectory traj = integrate(sys, Vector::Ones(3), 200.0);
  const RoughOrbit rough = detect_periodic_orbit(traj);
  if (!rough.found) return {false, "no orbit detected: " + rough.diagnostic};

  const ReducedBasis basis(sys.network());
  const LimitSetReport report = refine_orbit(sys, rough, basis, {}, tight_shooting());
  if (report.reduced_spectrum.size() != 2) return {false, "expected 2 nontrivial multipliers"};

  double max_mod = 0;
  for (const auto& mu : report.reduced_spectrum) max_mod = std::max(max_mod, std::abs(mu));

  // independent cross-check: finite-difference monodromy
  Matrix variational;
  flow_with_variational(sys, report.point, report.period, variational, tight_shooting().integrator);
  IntegratorOptions tight = tight_shooting().integrator;
  tight.dense = false;
  const double h = 1e-7;
  const Vector base_end = integrate(sys, report.point, report.period, tight).back();
  Matrix fd(3, 3);
  for (int i = 0; i < 3; ++i) {
    Vector perturbed = report.point;
    perturbed[i] += h;
    fd.col(i) = (integrate(sys, perturbed, report.period, tight).back() - base_end) / h;
  }
  const double fd_err = (variational - fd).norm() / (1 + variational.norm());

  std::ostringstream detail;
  detail << "period=" << report.period << " residual=" << report.residual << " max|mu|=" << max_mod
         << " fd-check=" << fd_err;
  const bool pass = report.residual < 1e-9 && max_mod <= 0.99 && fd_err < 1e-4 &&
                    report.classification == StabilityClass::LinearlyStable;
  return {pass, detail.str()};
}

Outcome criterion_figure2() {
  const double eps = 0.1;
  const MassActionSystem sys = load_system("r2.crn", eps);

  // start on the invariant coset W - V = 1 via the slow-manifold lift
  const EnlargementRecord rec = split_record("r1.crn", {{"r1", "Z + 2 U"}, {"r4", "V + W"}}, {"U", "V", "W"});
  const SlowFastModel sfm = decompose(rec);
  const MassActionSystem base = load_system("r1.crn");
  const Vector x0 = lifted_initial_condition(sfm, base, Vector::Ones(3), eps);

  const Trajectory traj = integrate(sys, x0, 200.0);
  Vector conservation(6);
  conservation << 0, 0, 0, 0, -1, 1;
  const double drift = traj.conservation_drift(conservation);
  if (drift >= 1e-8) return {false, "conservation drift " + std::to_string(drift)};

  const RoughOrbit rough = detect_periodic_orbit(traj);
  if (!rough.found) return {false, "no orbit detected: " + rough.diagnostic};
  const ReducedBasis basis(sys.network());
  const LimitSetReport report = refine_orbit(sys, rough, basis, {}, tight_shooting());

  if (report.reduced_spectrum.size() != 4) return {false, "expected 4 nontrivial multipliers"};
  int inside = 0, fast = 0;
  double max_mod = 0;
  for (const auto& mu : report.reduced_spectrum) {
    max_mod = std::max(max_mod, std::abs(mu));
    if (std::abs(mu) < 1.0) ++inside;
    if (std::abs(mu) < 0.5) ++fast;
  }
  std::ostringstream detail;
  detail << "drift=" << drift << " period=" << report.period << " max|mu|=" << max_mod << " fast=" << fast << "/4";
  const bool pass = inside == 4 && fast >= 2 && report.classification == StabilityClass::LinearlyStable;
  return {pass, detail.str()};
}

Outcome criterion_eps_sweep() {
  const InheritanceTask task = load_task(test::fixture_path("tasks/r1_to_r2.json"));
  const InheritanceCertificate cert = run_inheritance(task);

  double d_largest = -1, d_smallest = -1;
  bool all_finite = true;
  for (const SweepEntry& e : cert.sweep) {
    if (!e.found || !std::isfinite(e.hausdorff_z)) all_finite = false;
    if (e.eps == task.eps_schedule.front()) d_largest = e.hausdorff_z;
    if (e.eps == task.eps_schedule.back()) d_smallest = e.hausdorff_z;
  }
  std::ostringstream detail;
  detail << "verdict=" << (cert.pass ? "PASS" : "FAIL") << " d(0.1)=" << d_largest << " d(0.02)=" << d_smallest;
  return {cert.pass && all_finite && d_smallest <= d_largest, detail.str()};
}

Outcome criterion_layer_jacobian() {
  struct Fixture {
    EnlargementRecord rec;
    MassActionSystem base;
  };
  std::vector<Fixture> fixtures;
  fixtures.push_back({split_record("r1.crn", {{"r1", "Z + 2 U"}, {"r4", "V + W"}}, {"U", "V", "W"}),
                      load_system("r1.crn")});
  fixtures.push_back({split_record("r3.crn", {{"r2", "W"}}, {"W"}), load_system("r3.crn")});
  fixtures.push_back({split_record("erk_reduced.crn", {{"m", "S10E"}, {"n", "S01F"}}, {"S10E", "S01F"}),
                      load_system("erk_reduced.crn")});

  std::mt19937_64 rng(2026);
  double worst_im = 0, worst_re = -1e300;
  for (const Fixture& f : fixtures) {
    const SlowFastModel sfm = decompose(f.rec);
    for (int trial = 0; trial < 100; ++trial) {
      const Vector z = test::random_positive(sfm.n, rng, 0.3, 2.5);
      const Vector w =
          trial % 2 ? critical_manifold(sfm, f.base, z) : test::random_positive(sfm.m, rng, 0.2, 2.0);
      const Matrix jac = layer_jacobian(sfm, f.base, z, w);
      const Eigen::EigenSolver<Matrix> eig(jac);
      double rho = 0;
      for (int i = 0; i < sfm.m; ++i) rho = std::max(rho, std::abs(eig.eigenvalues()[i]));
      for (int i = 0; i < sfm.m; ++i) {
        worst_im = std::max(worst_im, std::abs(eig.eigenvalues()[i].imag()) / rho);
        worst_re = std::max(worst_re, eig.eigenvalues()[i].real());
      }

      // symmetrized similarity transform must be positive definite
      Vector d(sfm.m);
      for (int i = 0; i < sfm.m; ++i) {
        double p = 1;
        for (int j = 0; j < sfm.m; ++j) p *= std::pow(w[j], to_double(sfm.beta_hat(j, i)));
        for (int j = 0; j < sfm.n; ++j) p *= std::pow(z[j], to_double(sfm.record.c_matrix(j, i)));
        d[i] = p;
      }
      const Matrix core = sfm.beta_hat_d * d.asDiagonal() * sfm.beta_hat_d.transpose();
      const Vector s = w.cwiseInverse().cwiseSqrt();
      const Eigen::LLT<Matrix> llt(Matrix(s.asDiagonal() * core * s.asDiagonal()));
      if (llt.info() != Eigen::Success) return {false, "symmetrized layer matrix not positive definite"};
    }
  }
  std::ostringstream detail;
  detail << "max |Im|/rho=" << worst_im << " max Re=" << worst_re;
  return {worst_im <= 1e-9 && worst_re < 0, detail.str()};
}

Outcome criterion_exact_structure() {
  const Network r1 = load_fixture("r1.crn").net;
  const Network r2 = load_fixture("r2.crn").net;
  const Network mapk = load_fixture("mapk.crn").net;
  const Network rpp = load_fixture("mapk_rpp.crn").net;

  bool pass = network_rank(r1) == 3;
  pass = pass && network_rank(r2) == 5;
  const auto basis = conservation_basis(r2);
  pass = pass && basis.size() == 1;
  if (pass) {
    const auto& w = basis[0];
    const Rational s = w[5];
    pass = s != 0 && w[0] == 0 && w[1] == 0 && w[2] == 0 && w[3] == 0 && w[4] == -s;
  }
  pass = pass && mapk.n_species() == 24 && mapk.n_reactions() == 36 && network_rank(mapk) == 17;
  pass = pass && rpp.n_species() == 8 && rpp.n_reactions() == 14 && network_rank(rpp) == 8;
  return {pass, "ranks 3/5/17/8, conservation span exact"};
}

Outcome criterion_enlargement_laws() {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> nd(2, 4), rd(2, 5), coeff(0, 2), mi(1, 2);
  int cases = 0;
  for (int iter = 0; iter < 200; ++iter) {
    Network net;
    const int n = nd(rng);
    for (int i = 0; i < n; ++i) net.add_species("S" + std::to_string(i));
    const int r = rd(rng);
    for (int j = 0; j < r; ++j) {
      Reaction reaction;
      for (int i = 0; i < n; ++i) {
        reaction.reactant.set(i, coeff(rng));
        reaction.product.set(i, coeff(rng));
      }
      net.reactions.push_back(reaction);
    }
    const int base_rank = network_rank(net);

    // E1: a scaled copy of an existing reaction keeps the rank
    std::uniform_int_distribution<int> pick(0, r - 1);
    Reaction doubled;
    const Reaction& src = net.reactions[pick(rng)];
    for (const auto& [i, c] : src.reactant.terms()) doubled.reactant.set(i, c * 2);
    for (const auto& [i, c] : src.product.terms()) doubled.product.set(i, c * 2);
    if (network_rank(add_dependent_reactions(net, {doubled}).result) != base_rank)
      return {false, "E1 changed the rank"};

    // E3: both-sides insertion keeps the rank
    std::vector<SpeciesInsertion> ins;
    for (int j = 0; j < r; ++j) ins.push_back({j, 1, 1});
    if (network_rank(add_dependent_species(net, "Enz", ins).result) != base_rank)
      return {false, "E3 changed the rank"};

    // valid E6 raises by m; invalid beta is rejected
    const int m = std::min(mi(rng), r);
    SplitSpec spec;
    for (int s = 0; s < m; ++s) spec.new_species.push_back("N" + std::to_string(s));
    for (int s = 0; s < m; ++s) {
      SplitPart part;
      part.reaction = s;
      part.intermediate_new.set(s, 1 + coeff(rng));
      spec.splits.push_back(part);
    }
    if (network_rank(split_reactions(net, spec).result) != base_rank + m) return {false, "E6 rank increase wrong"};

    if (r >= 2) {
      SplitSpec bad;
      bad.new_species = {"N0", "N1"};
      SplitPart s1, s2;
      s1.reaction = 0;
      s1.intermediate_new.set(0, 1);
      s2.reaction = 1;
      s2.intermediate_new.set(0, 3);
      bad.splits = {s1, s2};
      try {
        split_reactions(net, bad);
        return {false, "rank-deficient beta was accepted"};
      } catch (const EnlargeError&) {
      }
    }

    // duplication leaves the right-hand side pointwise invariant
    std::vector<double> k;
    std::uniform_real_distribution<double> kd(0.2, 3.0);
    for (int j = 0; j < r; ++j) k.push_back(kd(rng));
    const MassActionSystem sys(net, k);
    const MassActionSystem dup = duplicate_reaction(sys, pick(rng), 3);
    for (int trial = 0; trial < 5; ++trial) {
      const Vector x = test::random_positive(n, rng);
      const Vector a = sys.rhs(x);
      const Vector b = dup.rhs(x);
      if ((a - b).norm() > 1e-14 * (1 + a.norm())) return {false, "duplication changed the dynamics"};
    }
    ++cases;
  }
  return {cases == 200, std::to_string(cases) + " randomized cases"};
}

Outcome criterion_cascade_chain() {
  const Network rpp = load_fixture("mapk_rpp.crn").net;
  const nlohmann::json script = nlohmann::json::parse(test::read_file(test::fixture_path("scripts/mapk_chain.json")));
  const auto chain = compose_enlargements(rpp, script);
  const Network& final_net = chain.back().result;

  auto strip = [](Network net) {
    for (Reaction& r : net.reactions) r.label.clear();
    return net;
  };
  const bool isomorphic = canonicalized(strip(final_net)) == canonicalized(strip(load_fixture("mapk.crn").net));
  std::ostringstream detail;
  detail << chain.size() << " records -> " << final_net.n_species() << " species, " << final_net.n_reactions()
         << " reactions, rank " << network_rank(final_net) << (isomorphic ? ", isomorphic to the fixture" : "");
  return {isomorphic && final_net.n_species() == 24 && final_net.n_reactions() == 36 && network_rank(final_net) == 17,
          detail.str()};
}

Outcome criterion_chain_rule() {
  const EnlargementRecord rec = split_record("r1.crn", {{"r1", "Z + 2 U"}, {"r4", "V + W"}}, {"U", "V", "W"});
  const SlowFastModel sfm = decompose(rec);
  const MassActionSystem base = load_system("r1.crn");
  const std::vector<double> k = test::r1_rates();
  const double eps = 0.1;
  const MassActionSystem lifted(rec.result, compose_rates(k, {rec}, eps));

  std::mt19937_64 rng(2525);
  double worst_rhs = 0, worst_manifold = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const Vector z = test::random_positive(3, rng, 0.8, 2.5);
    const Vector w = test::random_positive(2, rng, 0.2, 1.5);

    const auto [z_, y_hat] = psi_inverse(z, w, eps);
    const auto [x, y_full] = phi_inverse(sfm, z_, y_hat);
    Vector full(6);
    full.head(3) = x;
    full.tail(3) = y_full;
    const Vector dfull = lifted.rhs(full);
    Vector dy_hat(2);
    dy_hat << dfull[3], dfull[4];
    const Vector dz_expected = dfull.head(3) - sfm.alpha_bhinv * dy_hat;
    const Vector dw_expected = dy_hat / eps;
    const auto [dz, dw] = system_rhs(sfm, base, SystemVariant::SlowEps, z, w, eps);
    worst_rhs = std::max(worst_rhs, (dz - dz_expected).norm() / (1 + dz_expected.norm()));
    worst_rhs = std::max(worst_rhs, (dw - dw_expected).norm() / (1 + dw_expected.norm()));

    const Vector manifold = critical_manifold(sfm, base, z);
    worst_manifold = std::max(worst_manifold, std::abs(manifold[0] - std::sqrt(k[0] * z[0] * z[1] / z[2])));
    worst_manifold = std::max(worst_manifold, std::abs(manifold[1] - k[3] * z[0]));
  }
  std::ostringstream detail;
  detail << "max rhs mismatch=" << worst_rhs << " max manifold mismatch=" << worst_manifold;
  return {worst_rhs < 1e-10 && worst_manifold < 1e-12, detail.str()};
}

Outcome criterion_jacobians() {
  std::mt19937_64 rng(909);
  double worst = 0;
  for (const char* name : {"r1.crn", "r2.crn", "r3.crn", "r4.crn", "erk_reduced.crn", "erk_full.crn",
                           "mapk_rpp.crn", "mapk_rp.crn", "mapk.crn"}) {
    const MassActionSystem sys = load_system(name, 0.25);
    for (int trial = 0; trial < 50; ++trial) {
      const Vector x = test::random_positive(sys.dim(), rng, 0.5, 2.0);
      const Matrix analytic = sys.jacobian(x);
      Matrix fd(sys.dim(), sys.dim());
      const double h = 1e-6;
      for (int i = 0; i < sys.dim(); ++i) {
        Vector xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        fd.col(i) = (sys.rhs(xp) - sys.rhs(xm)) / (2 * h);
      }
      worst = std::max(worst, (analytic - fd).norm() / (1 + analytic.norm()));
    }
  }
  std::ostringstream detail;
  detail << "max relative error " << worst;
  return {worst < 1e-5, detail.str()};
}

} // namespace

int main() {
  std::printf("acceptance suite\n");
  run_criterion(1, "oscillator orbit found, stable, cross-checked", 30, criterion_figure1);
  run_criterion(2, "enlarged oscillator at eps=0.1: conservation and fast multipliers", 60, criterion_figure2);
  run_criterion(3, "eps sweep converges and certifies inheritance", 180, criterion_eps_sweep);
  run_criterion(4, "layer Jacobian spectra real, negative, definite", 10, criterion_layer_jacobian);
  run_criterion(5, "exact structural invariants of the fixture corpus", 1, criterion_exact_structure);
  run_criterion(6, "randomized enlargement laws (200 cases)", 30, criterion_enlargement_laws);
  run_criterion(7, "cascade enlargement chain reproduces the full network", 5, criterion_cascade_chain);
  run_criterion(8, "chart coherence and the closed-form critical manifold", 5, criterion_chain_rule);
  run_criterion(9, "analytic Jacobians against finite differences", 10, criterion_jacobians);

  if (failures) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
