#include "crn/enlarge.hpp"
#include "crn/errors.hpp"
#include "crn/integrate.hpp"
#include "crn/network.hpp"
#include "crn/orbits.hpp"
#include "crn/parser.hpp"
#include "crn/svg.hpp"
#include "crn/verify.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kExitParse = 2;
constexpr int kExitEnlarge = 3;
constexpr int kExitNumeric = 4;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw crn::ParseError(1, 1, "cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::filesystem::path out_path(const std::string& name) {
  const char* dir = std::getenv("CRNKIT_OUTDIR");
  if (dir && *dir) {
    std::filesystem::create_directories(dir);
    return std::filesystem::path(dir) / name;
  }
  return name;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
}

std::vector<double> split_doubles(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

struct SystemArgs {
  std::string network_path;
  std::string k_csv;
  std::string rates_path;
  double eps = 0.0;
};

crn::MassActionSystem build_system(const SystemArgs& args) {
  const crn::ParsedNetwork parsed = crn::parse_network(read_file(args.network_path));
  const crn::Network& net = parsed.net;
  std::vector<std::optional<crn::RateSpec>> specs = parsed.rates;

  if (!args.rates_path.empty()) {
    for (const auto& [label, spec] : crn::parse_rate_file(read_file(args.rates_path))) {
      const int idx = net.reaction_index(label);
      if (idx < 0) throw crn::ParseError(1, 1, "rate file names unknown reaction '" + label + "'");
      specs[idx] = spec;
    }
  }
  if (!args.k_csv.empty()) {
    const std::vector<double> ks = split_doubles(args.k_csv);
    if (static_cast<int>(ks.size()) != net.n_reactions())
      throw crn::ParseError(1, 1, "--k needs exactly one value per reaction (" + std::to_string(net.n_reactions()) +
                                      " expected)");
    for (int j = 0; j < net.n_reactions(); ++j) specs[j] = crn::RateSpec::literal(ks[j]);
  }

  std::vector<double> k(net.n_reactions());
  for (int j = 0; j < net.n_reactions(); ++j) {
    if (!specs[j])
      throw crn::ParseError(1, 1, "no rate constant for reaction " + std::to_string(j) + " ('" +
                                      net.reactions[j].label + "'); use --k, --rates or k= annotations");
    if (specs[j]->is_eps && !(args.eps > 0))
      throw crn::ParseError(1, 1, "reaction " + std::to_string(j) + " has an eps-scheduled rate; pass --eps");
    k[j] = specs[j]->resolve(specs[j]->is_eps ? args.eps : 1.0);
  }
  return crn::MassActionSystem(net, k);
}

std::string trajectory_csv(const crn::Trajectory& traj, const crn::Network& net) {
  std::ostringstream os;
  os << "t";
  for (const auto& s : net.species) os << "," << s;
  os << "\n";
  os.precision(12);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    os << traj.times()[i];
    for (int j = 0; j < net.n_species(); ++j) os << "," << traj.state(i)[j];
    os << "\n";
  }
  return os.str();
}

int cmd_info(const std::string& network_path) {
  const crn::Network net = crn::parse_network(read_file(network_path)).net;
  if (net.n_reactions() == 0) throw crn::ParseError(1, 1, "no reactions in '" + network_path + "'");
  const crn::RationalMatrix gamma = crn::stoichiometric_matrix(net);
  std::cout << net.n_species() << " species, " << net.n_reactions() << " reactions, rank " << gamma.rank() << "\n";

  std::cout << "species:";
  for (const auto& s : net.species) std::cout << " " << s;
  std::cout << "\n";

  const auto basis = crn::conservation_basis(net);
  if (basis.empty()) {
    std::cout << "no conservation laws\n";
  } else {
    std::cout << "conservation basis:\n";
    for (const auto& w : basis) {
      std::cout << "  (";
      for (std::size_t i = 0; i < w.size(); ++i) std::cout << (i ? ", " : "") << crn::rational_to_string(w[i]);
      std::cout << ")\n";
    }
  }

  std::cout << "stoichiometric matrix:\n";
  for (int i = 0; i < gamma.rows(); ++i) {
    std::cout << "  ";
    for (int j = 0; j < gamma.cols(); ++j) std::cout << (j ? " " : "") << crn::rational_to_string(gamma(i, j));
    std::cout << "\n";
  }
  return 0;
}

int cmd_enlarge(const std::string& network_path, const std::string& script_path, const std::string& out,
                const std::string& provenance) {
  const crn::Network net = crn::parse_network(read_file(network_path)).net;
  const nlohmann::json script = nlohmann::json::parse(read_file(script_path));
  const auto chain = crn::compose_enlargements(net, script);
  const crn::Network& final_net = chain.empty() ? net : chain.back().result;

  const std::string text = crn::serialize_network(final_net);
  if (out.empty())
    std::cout << text;
  else
    write_file(out_path(out), text);

  nlohmann::json prov = nlohmann::json::array();
  for (const auto& rec : chain) {
    nlohmann::json j;
    j["op"] = crn::kind_code(rec.kind);
    j["species"] = rec.result.n_species();
    j["reactions"] = rec.result.n_reactions();
    j["rank"] = crn::network_rank(rec.result);
    j["new_species"] = nlohmann::json::array();
    for (int idx : rec.new_species_indices) j["new_species"].push_back(rec.result.species[idx]);
    j["new_reactions"] = rec.new_reaction_indices;
    prov.push_back(j);
  }
  if (!provenance.empty()) write_file(out_path(provenance), prov.dump(2) + "\n");
  std::cout << "applied " << chain.size() << " enlargement record(s): " << final_net.n_species() << " species, "
            << final_net.n_reactions() << " reactions, rank " << crn::network_rank(final_net) << "\n";
  return 0;
}

struct SimArgs {
  SystemArgs system;
  std::string x0_csv;
  double t_end = 100.0;
  double rtol = 1e-10;
  double atol = 1e-12;
  std::string csv_out;
  std::string plot;  // "X:Y"
  std::string svg_out;
  double transient = 0.5;
  std::string json_out;
};

crn::Trajectory run_simulation(const SimArgs& args, crn::MassActionSystem& sys_out) {
  crn::MassActionSystem sys = build_system(args.system);
  const std::vector<double> x0v = split_doubles(args.x0_csv);
  if (static_cast<int>(x0v.size()) != sys.dim())
    throw crn::ParseError(1, 1, "--x0 needs one value per species (" + std::to_string(sys.dim()) + " expected)");
  crn::Vector x0(sys.dim());
  for (int i = 0; i < sys.dim(); ++i) x0[i] = x0v[i];

  crn::IntegratorOptions opts;
  opts.rtol = args.rtol;
  opts.atol = args.atol;
  crn::Trajectory traj = crn::integrate(sys, x0, args.t_end, opts);
  sys_out = std::move(sys);
  return traj;
}

void emit_plot(const SimArgs& args, const crn::Trajectory& traj, const crn::Network& net) {
  if (args.plot.empty() || args.svg_out.empty()) return;
  const auto colon = args.plot.find(':');
  if (colon == std::string::npos) throw crn::ParseError(1, 1, "--plot expects SPECIES:SPECIES");
  const int a = net.species_index(args.plot.substr(0, colon));
  const int b = net.species_index(args.plot.substr(colon + 1));
  if (a < 0 || b < 0) throw crn::ParseError(1, 1, "--plot names an unknown species");
  std::vector<std::pair<double, double>> pts;
  const double t_cut = traj.t_front() + args.transient * (traj.t_back() - traj.t_front());
  for (std::size_t i = 0; i < traj.size(); ++i)
    if (traj.times()[i] >= t_cut) pts.push_back({traj.state(i)[a], traj.state(i)[b]});
  write_file(out_path(args.svg_out),
             crn::svg_polyline_plot(pts, args.plot.substr(0, colon), args.plot.substr(colon + 1)));
}

int cmd_simulate(const SimArgs& args) {
  crn::MassActionSystem sys({{}, {}}, {});
  crn::Trajectory traj = run_simulation(args, sys);
  if (!args.csv_out.empty()) write_file(out_path(args.csv_out), trajectory_csv(traj, sys.network()));
  emit_plot(args, traj, sys.network());
  std::cout << "integrated to t=" << traj.t_back() << " in " << traj.stats().accepted << " steps ("
            << traj.stats().rejected << " rejected)\n";
  return 0;
}

int cmd_orbit(const SimArgs& args) {
  crn::MassActionSystem sys({{}, {}}, {});
  crn::Trajectory traj = run_simulation(args, sys);
  if (!args.csv_out.empty()) write_file(out_path(args.csv_out), trajectory_csv(traj, sys.network()));
  emit_plot(args, traj, sys.network());

  crn::DetectOptions detect;
  detect.transient_fraction = args.transient;
  const crn::RoughOrbit rough = crn::detect_periodic_orbit(traj, detect);
  nlohmann::json out;
  if (!rough.found) {
    out["orbit"] = nullptr;
    out["diagnostic"] = rough.diagnostic;
    std::cout << "no orbit detected (" << rough.diagnostic << ")\n";
  } else {
    crn::ReducedBasis basis(sys.network());
    crn::ShootingOptions shooting;
    shooting.integrator.rtol = args.rtol;
    shooting.integrator.atol = args.atol;
    const crn::LimitSetReport report = crn::refine_orbit(sys, rough, basis, {}, shooting);
    out["orbit"] = crn::report_to_json(report);
    std::cout << "periodic orbit: period " << report.period << ", residual " << report.residual << ", "
              << crn::to_string(report.classification) << "\n";
  }
  if (!args.json_out.empty()) write_file(out_path(args.json_out), out.dump(2) + "\n");
  return 0;
}

int cmd_verify(const std::string& task_path, const std::string& json_out) {
  const crn::InheritanceTask task = crn::load_task(task_path);
  const crn::InheritanceCertificate cert = crn::run_inheritance(task);
  cert.print_summary(std::cout);
  if (!json_out.empty()) write_file(out_path(json_out), cert.to_json().dump(2) + "\n");
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"crnkit: mass-action reaction networks, enlargements, and limit-set inheritance"};
  app.require_subcommand(1);

  std::string network_path, script_path, out, provenance, task_path, json_out;

  auto* info = app.add_subcommand("info", "structure report: counts, exact rank, conservation laws");
  info->add_option("network", network_path, "network file")->required();

  auto* enlarge = app.add_subcommand("enlarge", "apply an enlargement script");
  enlarge->add_option("network", network_path, "network file")->required();
  enlarge->add_option("script", script_path, "JSON script")->required();
  enlarge->add_option("-o,--out", out, "output network file (stdout if omitted)");
  enlarge->add_option("--prov", provenance, "provenance JSON output");

  SimArgs sim;
  auto add_sim_options = [&](CLI::App* cmd) {
    cmd->add_option("network", sim.system.network_path, "network file")->required();
    cmd->add_option("--k", sim.system.k_csv, "rate constants, comma separated");
    cmd->add_option("--rates", sim.system.rates_path, "rate key-value file");
    cmd->add_option("--eps", sim.system.eps, "value binding eps-scheduled rates");
    cmd->add_option("--x0", sim.x0_csv, "initial concentrations, comma separated")->required();
    cmd->add_option("--t", sim.t_end, "integration horizon");
    cmd->add_option("--rtol", sim.rtol, "relative tolerance");
    cmd->add_option("--atol", sim.atol, "absolute tolerance");
    cmd->add_option("--csv", sim.csv_out, "trajectory CSV output");
    cmd->add_option("--plot", sim.plot, "projection SPECIES:SPECIES for --svg");
    cmd->add_option("--svg", sim.svg_out, "SVG output for --plot");
    cmd->add_option("--transient", sim.transient, "fraction of the run discarded as transient");
  };

  auto* simulate = app.add_subcommand("simulate", "integrate and export a trajectory");
  add_sim_options(simulate);
  auto* orbit = app.add_subcommand("orbit", "detect and refine a periodic orbit");
  add_sim_options(orbit);
  orbit->add_option("--json", sim.json_out, "orbit report JSON output");

  auto* verify = app.add_subcommand("verify", "run an inheritance certification task");
  verify->add_option("task", task_path, "task JSON")->required();
  verify->add_option("--out", json_out, "certificate JSON output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (info->parsed()) return cmd_info(network_path);
    if (enlarge->parsed()) return cmd_enlarge(network_path, script_path, out, provenance);
    if (simulate->parsed()) return cmd_simulate(sim);
    if (orbit->parsed()) return cmd_orbit(sim);
    if (verify->parsed()) return cmd_verify(task_path, json_out);
  } catch (const crn::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const crn::EnlargeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (!e.certificate().empty()) std::cerr << "certificate: " << e.certificate() << "\n";
    return kExitEnlarge;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return 0;
}
