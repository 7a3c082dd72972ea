#include "crn/verify.hpp"

#include "crn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace crn {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<double> resolve_base_rates(const ParsedNetwork& parsed, const nlohmann::json& task,
                                       const std::filesystem::path& dir) {
  const Network& net = parsed.net;
  std::vector<std::optional<RateSpec>> specs = parsed.rates;

  if (task.contains("rates")) {
    const nlohmann::json& rates = task.at("rates");
    if (rates.is_array()) {
      if (static_cast<int>(rates.size()) != net.n_reactions())
        throw std::runtime_error("task rates array length must match the reaction count");
      for (int j = 0; j < net.n_reactions(); ++j)
        specs[j] = rates[j].is_number() ? RateSpec::literal(rates[j].get<double>())
                                        : parse_rate_value(rates[j].get<std::string>());
    } else if (rates.is_object()) {
      for (const auto& [label, value] : rates.items()) {
        const int idx = net.reaction_index(label);
        if (idx < 0) throw std::runtime_error("task rates: unknown reaction label '" + label + "'");
        specs[idx] = value.is_number() ? RateSpec::literal(value.get<double>())
                                       : parse_rate_value(value.get<std::string>());
      }
    } else if (rates.is_string()) {
      const auto table = parse_rate_file(read_file(dir / rates.get<std::string>()));
      for (const auto& [label, spec] : table) {
        const int idx = net.reaction_index(label);
        if (idx < 0) throw std::runtime_error("rate file: unknown reaction label '" + label + "'");
        specs[idx] = spec;
      }
    }
  }

  std::vector<double> out(net.n_reactions());
  for (int j = 0; j < net.n_reactions(); ++j) {
    if (!specs[j])
      throw std::runtime_error("no rate constant for reaction " + std::to_string(j) + " ('" +
                               net.reactions[j].label + "')");
    if (specs[j]->is_eps) throw std::runtime_error("base rate constants cannot be eps-scheduled");
    out[j] = specs[j]->value;
  }
  return out;
}

} // namespace

InheritanceTask load_task(const std::string& path) {
  const std::filesystem::path task_path(path);
  const std::filesystem::path dir = task_path.has_parent_path() ? task_path.parent_path() : ".";
  const nlohmann::json j = nlohmann::json::parse(read_file(task_path));

  InheritanceTask task;
  task.name = j.value("name", task_path.stem().string());

  const ParsedNetwork parsed = parse_network(read_file(dir / j.at("network").get<std::string>()));
  task.base_net = parsed.net;
  task.base_rates = resolve_base_rates(parsed, j, dir);

  if (j.contains("script")) {
    const auto& script = j.at("script");
    task.script = script.is_string() ? nlohmann::json::parse(read_file(dir / script.get<std::string>())) : script;
  }

  for (const auto& init : j.at("initials")) {
    Vector x(task.base_net.n_species());
    if (static_cast<int>(init.size()) != task.base_net.n_species())
      throw std::runtime_error("initial condition length must match the species count");
    for (int i = 0; i < x.size(); ++i) x[i] = init[i].get<double>();
    task.initials.push_back(x);
  }

  task.eps_schedule = j.value("eps_schedule", std::vector<double>{});
  for (std::size_t i = 0; i < task.eps_schedule.size(); ++i) {
    if (!(task.eps_schedule[i] > 0)) throw std::runtime_error("eps schedule must be positive");
    if (i > 0 && !(task.eps_schedule[i] < task.eps_schedule[i - 1]))
      throw std::runtime_error("eps schedule must be strictly decreasing");
  }

  task.tube_radius = j.value("tube_radius", task.tube_radius);
  if (!(task.tube_radius > 0)) throw std::runtime_error("tube_radius must be positive");
  task.zeta = j.value("zeta", task.zeta);
  task.t_end = j.value("t_end", task.t_end);
  task.transient_fraction = j.value("transient_fraction", task.transient_fraction);
  task.lift_settle_periods = j.value("lift_settle_periods", task.lift_settle_periods);
  task.lift_transient_fraction = j.value("lift_transient_fraction", task.lift_transient_fraction);
  task.eps0_cap = j.value("eps0_cap", task.eps0_cap);
  task.seed = j.value("seed", static_cast<std::uint64_t>(0));
  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    task.tolerances.zero_eig_tol = t.value("zero_eig_tol", task.tolerances.zero_eig_tol);
    task.tolerances.unit_circle_tol = t.value("unit_circle_tol", task.tolerances.unit_circle_tol);
    task.tolerances.trivial_multiplier_tol = t.value("trivial_multiplier_tol", task.tolerances.trivial_multiplier_tol);
  }
  if (j.contains("integrator")) {
    const auto& t = j.at("integrator");
    task.integrator.rtol = t.value("rtol", task.integrator.rtol);
    task.integrator.atol = t.value("atol", task.integrator.atol);
  }
  return task;
}

ClassificationComparison compare_classifications(const LimitSetReport& base, const LimitSetReport& lifted,
                                                 int expected_extras, const ClassificationTolerances& tols) {
  if (base.kind != lifted.kind) throw NumericsError("compare_classifications: limit-set kinds differ");

  ClassificationComparison cmp;
  cmp.base_flags = base.flags;
  cmp.lifted_flags = lifted.flags;
  cmp.expected_extras = expected_extras;
  cmp.found_extras = static_cast<int>(lifted.reduced_spectrum.size()) - static_cast<int>(base.reduced_spectrum.size());

  bool preserved = true;
  if (base.flags.nondegenerate && !lifted.flags.nondegenerate) preserved = false;
  if (base.flags.hyperbolic && !lifted.flags.hyperbolic) preserved = false;
  if (base.flags.linearly_stable && !lifted.flags.linearly_stable) preserved = false;

  if (base.flags.hyperbolic && !base.flags.linearly_stable && lifted.flags.linearly_stable) {
    preserved = false;
    cmp.notes.push_back("suspicious: base is hyperbolic-unstable but the lifted limit set is stable");
  }

  // identify the extras as the fastest directions
  std::vector<std::complex<double>> sorted = lifted.reduced_spectrum;
  if (lifted.kind == LimitKind::PeriodicOrbit) {
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return std::abs(a) < std::abs(b); });
  } else {
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.real() < b.real(); });
  }
  cmp.extras_stable = true;
  const int extras = std::max(0, std::min<int>(cmp.found_extras, static_cast<int>(sorted.size())));
  for (int i = 0; i < extras; ++i) {
    cmp.extras.push_back(sorted[i]);
    if (lifted.kind == LimitKind::PeriodicOrbit) {
      if (!(std::abs(sorted[i]) < 1.0 - tols.unit_circle_tol)) cmp.extras_stable = false;
    } else {
      if (!(sorted[i].real() < -tols.zero_eig_tol)) cmp.extras_stable = false;
    }
  }
  if (cmp.found_extras != expected_extras) {
    cmp.notes.push_back("expected " + std::to_string(expected_extras) + " extra spectrum values, found " +
                        std::to_string(cmp.found_extras));
  }
  if (!cmp.extras_stable) cmp.notes.push_back("an extra (fast) direction is not strictly stable");

  cmp.pass = preserved && cmp.found_extras == expected_extras && cmp.extras_stable;
  return cmp;
}

namespace {

struct BaseLimitSet {
  LimitSetReport report;
  std::vector<Vector> tube_samples;  // in base coordinates
};

BaseLimitSet locate_base_limit_set(const MassActionSystem& sys, const ReducedBasis& basis, const Vector& x0,
                                   const InheritanceTask& task) {
  Trajectory traj = integrate(sys, x0, task.t_end, task.integrator);
  DetectOptions detect;
  detect.transient_fraction = task.transient_fraction;
  RoughOrbit rough = detect_periodic_orbit(traj, detect);

  BaseLimitSet out;
  if (rough.found) {
    ShootingOptions shooting;
    shooting.integrator = task.integrator;
    out.report = refine_orbit(sys, rough, basis, task.tolerances, shooting);
    out.tube_samples = out.report.samples;
  } else {
    out.report = find_equilibrium(sys, traj.back(), basis, task.tolerances);
    out.tube_samples = {out.report.point};
  }
  return out;
}

double limit_set_distance(const LimitSetReport& base, const std::vector<Vector>& lifted_z) {
  if (base.kind == LimitKind::Equilibrium) return (lifted_z.front() - base.point).norm();
  return hausdorff_distance(base.samples, lifted_z);
}

} // namespace

InheritanceCertificate run_inheritance(const InheritanceTask& task) {
  InheritanceCertificate cert;
  cert.task_name = task.name;

  MassActionSystem base(task.base_net, task.base_rates);
  ReducedBasis base_basis(task.base_net);

  std::vector<BaseLimitSet> base_sets;
  for (std::size_t i = 0; i < task.initials.size(); ++i) {
    try {
      base_sets.push_back(locate_base_limit_set(base, base_basis, task.initials[i], task));
    } catch (const std::exception& e) {
      throw NumericsError("base limit set " + std::to_string(i) + " not found: " + e.what());
    }
    cert.base_reports.push_back(base_sets.back().report);
  }

  // tube disjointness across distinct limit sets
  for (std::size_t a = 0; a < base_sets.size(); ++a)
    for (std::size_t b = a + 1; b < base_sets.size(); ++b) {
      double min_dist = std::numeric_limits<double>::infinity();
      for (const Vector& p : base_sets[a].tube_samples)
        for (const Vector& q : base_sets[b].tube_samples) min_dist = std::min(min_dist, (p - q).norm());
      if (min_dist <= 2 * task.tube_radius) {
        cert.tubes_disjoint = false;
        cert.notes.push_back("tubes of limit sets " + std::to_string(a) + " and " + std::to_string(b) +
                             " are not disjoint");
      }
    }

  const std::vector<EnlargementRecord> chain = compose_enlargements(task.base_net, task.script);

  if (chain.empty()) {
    // empty script: the certificate trivially equates base and enlarged
    cert.pass = cert.tubes_disjoint;
    for (std::size_t i = 0; i < base_sets.size(); ++i) {
      SweepEntry entry;
      entry.eps = 0.0;
      entry.limit_set = static_cast<int>(i);
      entry.found = true;
      entry.positive = (base_sets[i].report.point.array() > 0).all();
      entry.hausdorff_z = 0.0;
      entry.lifted = base_sets[i].report;
      entry.comparison = compare_classifications(base_sets[i].report, base_sets[i].report, 0, task.tolerances);
      cert.pass = cert.pass && entry.positive;
      cert.sweep.push_back(std::move(entry));
    }
    cert.notes.push_back("empty enlargement script; base and enlarged systems coincide");
    return cert;
  }

  // the slow-fast machinery drives the last Split record
  int split_index = -1;
  for (int i = static_cast<int>(chain.size()) - 1; i >= 0; --i)
    if (chain[i].kind == EnlargeKind::Split) {
      split_index = i;
      break;
    }
  if (!task.eps_schedule.empty() && split_index < 0)
    throw NumericsError("run_inheritance: eps schedule given but the script has no E6 step");
  if (split_index < 0) throw NumericsError("run_inheritance: scripts without E6 need an empty eps schedule");
  if (chain[split_index].base.n_species() != task.base_net.n_species())
    throw NumericsError("run_inheritance: species added before the driven E6 step are not supported");
  for (std::size_t i = split_index + 1; i < chain.size(); ++i)
    if (!chain[i].new_species_indices.empty())
      throw NumericsError("run_inheritance: species added after the driven E6 step are not supported");

  // base system against which the split rates are evaluated
  MassActionSystem split_base(chain[split_index].base,
                              compose_rates(task.base_rates,
                                            std::vector<EnlargementRecord>(chain.begin(), chain.begin() + split_index),
                                            1.0));
  SlowFastModel sfm = decompose(chain[split_index]);
  cert.slowfast_model = slowfast_to_json(sfm);

  double eps1_min = std::numeric_limits<double>::infinity();
  for (const BaseLimitSet& set : base_sets) {
    OrbitTube tube{set.tube_samples, task.tube_radius};
    const EpsilonBound bound = epsilon_bound(sfm, split_base, tube, task.eps0_cap, task.seed);
    eps1_min = std::min(eps1_min, bound.eps1);
    cert.epsilon_bounds.push_back(epsilon_bound_to_json(bound));
  }
  for (double eps : task.eps_schedule)
    if (eps > eps1_min)
      cert.notes.push_back("eps=" + std::to_string(eps) + " exceeds the conservative sufficiency bound eps1=" +
                           std::to_string(eps1_min) + "; the run is verified empirically at this eps");

  const Network& final_net = chain.back().result;
  ReducedBasis lifted_basis(final_net);
  const int m_extra = network_rank(final_net) - network_rank(task.base_net);

  // species embedding through the post-split records (no new species there)
  std::vector<int> embed(final_net.n_species());
  for (int i = 0; i < final_net.n_species(); ++i) embed[i] = i;

  std::vector<Vector> continuation(base_sets.size());
  for (std::size_t i = 0; i < base_sets.size(); ++i)
    continuation[i] = base_sets[i].report.point;  // z-coordinates of the anchor

  for (double eps : task.eps_schedule) {
    const std::vector<double> rates = compose_rates(task.base_rates, chain, eps);
    MassActionSystem lifted_sys(final_net, rates);

    for (std::size_t i = 0; i < base_sets.size(); ++i) {
      SweepEntry entry;
      entry.eps = eps;
      entry.limit_set = static_cast<int>(i);
      try {
        const Vector z0 = continuation[i];
        Vector x0 = lifted_initial_condition(sfm, split_base, z0, eps);
        // the split-record result and the final network share species indices
        Vector x0_final = Vector::Zero(final_net.n_species());
        x0_final.head(x0.size()) = x0;

        LimitSetReport lifted;
        std::vector<Vector> lifted_z;
        double drift = 0.0;
        if (base_sets[i].report.kind == LimitKind::PeriodicOrbit) {
          const double horizon = std::max(task.lift_settle_periods * base_sets[i].report.period, 10.0);
          Trajectory traj = integrate(lifted_sys, x0_final, horizon, task.integrator);
          for (const auto& w : conservation_basis(final_net)) {
            Vector wd(final_net.n_species());
            for (int s = 0; s < final_net.n_species(); ++s) wd[s] = to_double(w[s]);
            drift = std::max(drift, traj.conservation_drift(wd));
          }
          DetectOptions detect;
          detect.transient_fraction = task.lift_transient_fraction;
          RoughOrbit rough = detect_periodic_orbit(traj, detect);
          if (!rough.found) throw NumericsError("no lifted orbit detected: " + rough.diagnostic);
          ShootingOptions shooting;
          shooting.integrator = task.integrator;
          lifted = refine_orbit(lifted_sys, rough, lifted_basis, task.tolerances, shooting);
          for (const Vector& s : lifted.samples) lifted_z.push_back(to_base_coordinates(sfm, s.head(x0.size())));
        } else {
          lifted = find_equilibrium(lifted_sys, x0_final, lifted_basis, task.tolerances);
          lifted_z = {to_base_coordinates(sfm, lifted.point.head(x0.size()))};
        }

        entry.found = true;
        entry.positive = base_sets[i].report.kind == LimitKind::PeriodicOrbit
                             ? std::all_of(lifted.samples.begin(), lifted.samples.end(),
                                           [](const Vector& s) { return (s.array() > 0).all(); })
                             : (lifted.point.array() > 0).all();
        entry.conservation_drift = drift;
        entry.hausdorff_z = limit_set_distance(base_sets[i].report, lifted_z);
        entry.comparison = compare_classifications(base_sets[i].report, lifted, m_extra, task.tolerances);
        entry.lifted = std::move(lifted);
        continuation[i] = lifted_z.front();
      } catch (const std::exception& e) {
        entry.failure = e.what();
      }
      cert.sweep.push_back(std::move(entry));
    }
  }

  // verdict: every base-nondegenerate limit set must be inherited at the
  // smallest eps, with distances below zeta and the weak monotone trend
  bool pass = cert.tubes_disjoint;
  const double eps_small = task.eps_schedule.back();
  const double eps_large = task.eps_schedule.front();
  for (std::size_t i = 0; i < base_sets.size(); ++i) {
    if (!base_sets[i].report.flags.nondegenerate) {
      cert.notes.push_back("base limit set " + std::to_string(i) + " is degenerate; nothing to inherit");
      continue;
    }
    const SweepEntry* smallest = nullptr;
    const SweepEntry* largest = nullptr;
    for (const SweepEntry& e : cert.sweep) {
      if (e.limit_set != static_cast<int>(i)) continue;
      if (e.eps == eps_small) smallest = &e;
      if (e.eps == eps_large) largest = &e;
    }
    if (!smallest || !smallest->found || !smallest->positive || !smallest->lifted ||
        !smallest->lifted->flags.nondegenerate || !smallest->comparison || !smallest->comparison->pass) {
      pass = false;
      cert.notes.push_back("limit set " + std::to_string(i) + " not inherited at eps=" + std::to_string(eps_small));
      continue;
    }
    if (smallest->conservation_drift >= 1e-8) {
      pass = false;
      cert.notes.push_back("limit set " + std::to_string(i) + ": conservation drift " +
                           std::to_string(smallest->conservation_drift) + " exceeds the trajectory bound");
    }
    if (!(smallest->hausdorff_z <= task.zeta)) {
      pass = false;
      cert.notes.push_back("limit set " + std::to_string(i) + ": distance " + std::to_string(smallest->hausdorff_z) +
                           " exceeds zeta at the smallest eps");
    }
    if (largest && largest->found && !(smallest->hausdorff_z <= largest->hausdorff_z)) {
      pass = false;
      cert.notes.push_back("limit set " + std::to_string(i) + ": distance did not improve from the largest eps");
    }
  }
  cert.pass = pass;
  return cert;
}

nlohmann::json InheritanceCertificate::to_json() const {
  nlohmann::json j;
  j["task"] = task_name;
  j["verdict"] = pass ? "PASS" : "FAIL";
  j["tubes_disjoint"] = tubes_disjoint;
  j["base_limit_sets"] = nlohmann::json::array();
  for (const auto& r : base_reports) j["base_limit_sets"].push_back(report_to_json(r));
  if (!slowfast_model.empty()) j["slowfast"] = slowfast_model;
  j["epsilon_bounds"] = epsilon_bounds;
  j["sweep"] = nlohmann::json::array();
  for (const SweepEntry& e : sweep) {
    nlohmann::json je;
    je["eps"] = e.eps;
    je["limit_set"] = e.limit_set;
    je["found"] = e.found;
    if (e.found) {
      je["positive"] = e.positive;
      je["distance_z"] = e.hausdorff_z;
      je["conservation_drift"] = e.conservation_drift;
      je["lifted"] = report_to_json(*e.lifted);
      if (e.comparison) {
        nlohmann::json jc;
        jc["pass"] = e.comparison->pass;
        jc["expected_extras"] = e.comparison->expected_extras;
        jc["found_extras"] = e.comparison->found_extras;
        jc["extras_stable"] = e.comparison->extras_stable;
        nlohmann::json extras = nlohmann::json::array();
        for (const auto& v : e.comparison->extras) extras.push_back({v.real(), v.imag()});
        jc["fast_spectrum"] = extras;
        jc["notes"] = e.comparison->notes;
        je["comparison"] = jc;
      }
    } else {
      je["failure"] = e.failure;
    }
    j["sweep"].push_back(je);
  }
  j["notes"] = notes;
  return j;
}

void InheritanceCertificate::print_summary(std::ostream& os) const {
  os << "inheritance certificate: " << task_name << "\n";
  os << "  base limit sets:\n";
  for (std::size_t i = 0; i < base_reports.size(); ++i) {
    const auto& r = base_reports[i];
    os << "    [" << i << "] " << to_string(r.kind) << ", " << to_string(r.classification);
    if (r.kind == LimitKind::PeriodicOrbit) os << ", period " << std::setprecision(6) << r.period;
    os << ", residual " << std::scientific << std::setprecision(2) << r.residual << std::defaultfloat << "\n";
  }
  if (!sweep.empty()) {
    os << "  sweep:\n";
    os << "    " << std::setw(8) << "eps" << std::setw(6) << "set" << std::setw(8) << "found" << std::setw(10)
       << "positive" << std::setw(13) << "distance" << std::setw(12) << "class" << "\n";
    for (const SweepEntry& e : sweep) {
      os << "    " << std::setw(8) << e.eps << std::setw(6) << e.limit_set << std::setw(8)
         << (e.found ? "yes" : "no");
      if (e.found) {
        os << std::setw(10) << (e.positive ? "yes" : "no") << std::setw(13) << std::scientific
           << std::setprecision(3) << e.hausdorff_z << std::defaultfloat << "  "
           << (e.lifted ? to_string(e.lifted->classification) : "-");
      } else {
        os << "  " << e.failure;
      }
      os << "\n";
    }
  }
  for (const std::string& note : notes) os << "  note: " << note << "\n";
  os << "  verdict: " << (pass ? "PASS" : "FAIL") << "\n";
}

} // namespace crn
