#include "netsyn/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "netsyn/dits.hpp"
#include "netsyn/dot.hpp"
#include "netsyn/generator.hpp"
#include "netsyn/io.hpp"
#include "netsyn/synthesis.hpp"

namespace netsyn {
namespace {

namespace fs = std::filesystem;

void write_text(const std::string& text, const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << text;
}

SynthesisMode mode_from_string(const std::string& s) {
  for (SynthesisMode m : {SynthesisMode::Stability, SynthesisMode::Stabilizability,
                          SynthesisMode::Dissipativity, SynthesisMode::Dissipativation})
    if (s == to_string(m)) return m;
  throw ConfigError("unknown mode '" + s + "'");
}

std::vector<int> parse_order(const std::string& s, int n) {
  std::vector<int> order;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      order.push_back(std::stoi(item) - 1);
    } catch (const std::exception&) {
      throw ConfigError("bad processing order '" + s + "'");
    }
  }
  if (static_cast<int>(order.size()) != n)
    throw ConfigError("processing order must list all " + std::to_string(n) + " subsystems");
  return order;
}

MatrixXd load_costs(const std::string& flag, const std::optional<CostModel>& from_spec,
                    const Topology& initial) {
  if (flag.empty()) return cost_matrix(from_spec.value_or(CostModel::fixed_levels()), initial);
  if (flag == "fixed") return cost_matrix(CostModel::fixed_levels(), initial);
  if (flag == "distance") return cost_matrix(CostModel::graph_distance(), initial);
  if (flag.rfind("file:", 0) == 0) {
    const Json j = read_json_file(flag.substr(5));
    return cost_matrix(CostModel::explicit_matrix(matrix_from_json(j, "costs")), initial);
  }
  throw ConfigError("--costs must be fixed, distance or file:PATH");
}

QsrSpec load_qsr(const std::string& path, const std::vector<Index>& ydims,
                 const std::vector<Index>& udims) {
  if (path.empty()) throw ConfigError("this property needs --qsr");
  return qsr_from_json(read_json_file(path), ydims, udims);
}

struct Common {
  std::string system, spec, qsr, mode = "stability", costs, order, out;
};

NetworkedSystem load_with_warnings(const std::string& path, std::ostream& err) {
  std::vector<std::string> warnings;
  NetworkedSystem sys = load_system(path, &warnings);
  for (const std::string& w : warnings) err << "warning: " << w << '\n';
  return sys;
}

SynthesisResult run_mode(SynthesisMode mode, const NetworkedSystem& sys, const DesignSpec& spec,
                         const std::string& qsr_path, const MatrixXd& costs,
                         const SynthesisOptions& opt) {
  switch (mode) {
    case SynthesisMode::Stability:
      return synthesize_stability(sys, spec, costs, opt);
    case SynthesisMode::Stabilizability:
      return synthesize_stabilizability(sys, spec, costs, opt);
    case SynthesisMode::Dissipativity:
      return synthesize_dissipativity(sys, spec, load_qsr(qsr_path, sys.ny, sys.nu), costs, opt);
    default:
      return synthesize_dissipativation(sys, spec, load_qsr(qsr_path, sys.ny, sys.nw), costs,
                                        opt);
  }
}

void print_steps(const SynthesisResult& r, std::ostream& out) {
  for (const StepRecord& s : r.steps)
    out << "step " << s.step + 1 << " subsystem " << s.subsystem + 1 << ": "
        << (s.accepted ? "ok" : "failed") << ", min eig Wt_ii = " << s.wt_min_eigenvalue
        << '\n';
}

int analyze(const Common& c, const std::string& property, const std::string& matrix,
            bool decentralized, std::ostream& out, std::ostream& err) {
  if (!matrix.empty()) {
    const BlockMatrixd w = block_matrix_from_json(read_json_file(matrix));
    const PdTestResult r = test_positive_definite(w);
    for (int k = 0; k < r.archive.size(); ++k)
      out << "step " << k + 1 << ": min eig Wt_ii = "
          << Eigen::SelfAdjointEigenSolver<MatrixXd>(r.archive.row(k).blocks.back())
                 .eigenvalues()(0)
          << '\n';
    if (r.verdict) {
      out << "positive definite\n";
      return kExitOk;
    }
    out << "not positive definite: fails at subsystem " << *r.failing_subsystem + 1 << '\n';
    return kExitInconclusive;
  }
  if (c.system.empty()) throw ConfigError("analyze needs --system or --matrix");
  const NetworkedSystem sys = load_with_warnings(c.system, err);
  const bool stability = property == "stability";
  if (!stability && property != "dissipativity")
    throw ConfigError("--property must be stability or dissipativity");

  if (decentralized) {
    SynthesisOptions opt;
    opt.raise = false;
    const DesignSpec spec = DesignSpec::all_fixed(sys.size());
    const MatrixXd costs = MatrixXd::Zero(sys.size(), sys.size());
    SynthesisResult r;
    try {
      r = stability ? synthesize_stability(sys, spec, costs, opt)
                    : synthesize_dissipativity(sys, spec, load_qsr(c.qsr, sys.ny, sys.nu),
                                               costs, opt);
    } catch (const DiagnosticError& e) {
      out << "inconclusive: " << e.what() << "\nfailing subsystem " << e.subsystem() + 1 << '\n';
      return kExitInconclusive;
    }
    print_steps(r, out);
    if (r.success) {
      out << (stability ? "stable" : "dissipative") << " (decentralized certificate)\n";
      return kExitOk;
    }
    out << "inconclusive: " << r.message << '\n';
    if (r.failing_subsystem) out << "failing subsystem " << *r.failing_subsystem + 1 << '\n';
    return kExitInconclusive;
  }

  if (stability) {
    const Certificate cert = check_stability_centralized(sys.A.dense());
    const StabilityVerdict v = eigen_stability_oracle(sys.A.dense());
    out << (cert.feasible ? "stable" : "not certified stable")
        << " (max Re lambda = " << v.max_real << ")\n";
    return cert.feasible ? kExitOk : kExitInconclusive;
  }
  const Certificate cert =
      check_dissipativity_centralized(sys, load_qsr(c.qsr, sys.ny, sys.nu));
  out << (cert.feasible ? "dissipative" : "not certified dissipative") << '\n';
  return cert.feasible ? kExitOk : kExitInconclusive;
}

/// Without a file every pair is open: non-edges toward zero, existing edges
/// refinable toward their current blocks.
DesignSpec default_spec(const NetworkedSystem& sys) {
  DesignSpec spec = DesignSpec::free_non_edges(sys);
  for (int i = 0; i < sys.size(); ++i)
    for (int j : sys.topology.in_neighbors(i)) spec = mark_refinable(spec, sys, i, j);
  return spec;
}

DesignSpec load_spec(const std::string& path, const NetworkedSystem& sys,
                     std::optional<CostModel>* costs) {
  if (path.empty()) return default_spec(sys);
  SpecFile f = spec_from_json(read_json_file(path), sys);
  if (costs) *costs = f.costs;
  return f.spec;
}

int synthesize(const Common& c, std::ostream& out, std::ostream& err) {
  const NetworkedSystem sys = load_with_warnings(c.system, err);
  std::optional<CostModel> model;
  const DesignSpec spec = load_spec(c.spec, sys, &model);
  const MatrixXd costs = load_costs(c.costs, model, sys.topology);
  SynthesisOptions opt;
  opt.raise = false;
  if (!c.order.empty()) opt.order = parse_order(c.order, sys.size());
  const SynthesisMode mode = mode_from_string(c.mode);
  SynthesisResult r;
  try {
    r = run_mode(mode, sys, spec, c.qsr, costs, opt);
  } catch (const DiagnosticError& e) {
    out << "inconclusive: " << e.what() << '\n';
    return kExitInconclusive;
  }
  print_steps(r, out);
  const fs::path dir(c.out);
  fs::create_directories(dir);
  write_json_file(synthesis_report(r), (dir / "report.json").string());
  if (r.success) {
    save_system(r.system, (dir / "result.json").string());
    write_text(to_dot(r.system, diff_topology(sys.topology, r.system.topology), r.cost),
               dir / "graph.dot");
    out << "success: J_Dev = " << r.cost.deviation << ", J_Nom = " << r.cost.nominal << '\n';
    return kExitOk;
  }
  out << "inconclusive: " << r.message << '\n';
  return kExitInconclusive;
}

int generate(int n, Index dims, double density, const std::string& target, std::uint64_t seed,
             const std::string& path, std::ostream& out) {
  GeneratorOptions opt;
  opt.subsystems = n;
  opt.dim = dims;
  opt.density = density;
  opt.target = generation_target_from_string(target);
  opt.seed = seed;
  const GeneratedSystem g = generate_system(opt);
  save_system(g.system, path);
  out << "generated " << target << " system with " << g.system.topology.edge_count()
      << " edges after " << g.attempts << " draw(s)\n";
  return kExitOk;
}

int compare(const Common& c, const std::string& methods_flag, std::ostream& out,
            std::ostream& err) {
  const NetworkedSystem sys = load_with_warnings(c.system, err);
  const DesignSpec spec = load_spec(c.spec, sys, nullptr);
  std::vector<Method> methods;
  std::stringstream in(methods_flag);
  std::string item;
  while (std::getline(in, item, ',')) methods.push_back(method_from_string(item));
  const std::vector<std::pair<std::string, MatrixXd>> costs{
      {"C_f", cost_matrix(CostModel::fixed_levels(), sys.topology)},
      {"C_d", cost_matrix(CostModel::graph_distance(), sys.topology)}};
  const std::vector<ComparisonRow> rows = compare_methods(sys, spec, costs, methods);

  const fs::path dir(c.out);
  fs::create_directories(dir);
  Json report = {{"feedthrough", ComparisonOptions{}.feedthrough},
                 {"rows", comparison_to_json(rows)}};
  write_json_file(report, (dir / "report.json").string());
  write_text(comparison_csv(rows), dir / "summary.csv");
  for (const ComparisonRow& r : rows) {
    out << to_string(r.method) << " / " << r.costs << ": ";
    if (r.system) {
      write_text(r.dot, dir / (std::string(to_string(r.method)) + "_" + r.costs + ".dot"));
      out << "J_Dev = " << r.cost.deviation << ", J_Nom = " << r.cost.nominal << '\n';
    } else {
      out << "failed: " << r.message << '\n';
    }
  }
  return kExitOk;
}

int trace(const Common& c, std::ostream& out, std::ostream& err) {
  const NetworkedSystem sys = load_with_warnings(c.system, err);
  std::optional<CostModel> model;
  const DesignSpec spec = load_spec(c.spec, sys, &model);
  const MatrixXd costs = load_costs(c.costs, model, sys.topology);
  SynthesisOptions opt;
  opt.raise = false;
  if (!c.order.empty()) opt.order = parse_order(c.order, sys.size());
  SynthesisResult r;
  try {
    r = run_mode(mode_from_string(c.mode), sys, spec, c.qsr, costs, opt);
  } catch (const DiagnosticError& e) {
    out << "inconclusive: " << e.what() << '\n';
    return kExitInconclusive;
  }
  write_json_file(trace_to_json(r.archive), c.out);
  out << r.archive.size() << " message(s) written\n";
  return r.success ? kExitOk : kExitInconclusive;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Decentralized interconnection topology synthesis", "netsyn"};
  app.require_subcommand(1);
  Common c;

  CLI::App* an = app.add_subcommand("analyze", "Certify stability or dissipativity");
  std::string property = "stability", matrix;
  bool decentralized = false;
  an->add_option("--system", c.system, "System JSON")->check(CLI::ExistingFile);
  an->add_option("--matrix", matrix, "Block matrix JSON to test for definiteness")
      ->check(CLI::ExistingFile);
  an->add_option("--property", property, "stability | dissipativity");
  an->add_option("--qsr", c.qsr, "Supply rate JSON")->check(CLI::ExistingFile);
  an->add_flag("--decentralized", decentralized, "Sequential per-subsystem certificate");

  CLI::App* sy = app.add_subcommand("synthesize", "Synthesize an interconnection topology");
  sy->add_option("--system", c.system, "System JSON")->required()->check(CLI::ExistingFile);
  sy->add_option("--spec", c.spec, "Design spec JSON")->check(CLI::ExistingFile);
  sy->add_option("--mode", c.mode,
                 "stability | stabilizability | dissipativity | dissipativation");
  sy->add_option("--qsr", c.qsr, "Supply rate JSON")->check(CLI::ExistingFile);
  sy->add_option("--costs", c.costs, "fixed | distance | file:PATH");
  sy->add_option("--order", c.order, "Processing order, e.g. 3,1,2");
  sy->add_option("--out", c.out, "Output directory")->required();

  CLI::App* ge = app.add_subcommand("generate", "Generate a random networked system");
  int n = 5;
  Index dims = 3;
  double density = 0.4;
  std::string target = "stable", gen_out;
  std::uint64_t seed = 1;
  ge->add_option("--n", n, "Number of subsystems");
  ge->add_option("--dims", dims, "States per subsystem");
  ge->add_option("--density", density, "Edge probability");
  ge->add_option("--target", target,
                 "stable | unstable | stabilizable | dissipative | dissipativatable");
  ge->add_option("--seed", seed, "RNG seed");
  ge->add_option("--out", gen_out, "Output system JSON")->required();

  CLI::App* co = app.add_subcommand("compare", "Compare synthesis methods");
  std::string methods = "dets,dits-weak,dits-strong";
  co->add_option("--system", c.system, "System JSON")->required()->check(CLI::ExistingFile);
  co->add_option("--spec", c.spec, "Design spec JSON")->check(CLI::ExistingFile);
  co->add_option("--methods", methods, "Comma separated: dets, dits-weak, dits-strong");
  co->add_option("--out", c.out, "Output directory")->required();

  CLI::App* tr = app.add_subcommand("trace", "Write the message log of a synthesis run");
  tr->add_option("--system", c.system, "System JSON")->required()->check(CLI::ExistingFile);
  tr->add_option("--spec", c.spec, "Design spec JSON")->check(CLI::ExistingFile);
  tr->add_option("--mode", c.mode, "Synthesis mode");
  tr->add_option("--qsr", c.qsr, "Supply rate JSON")->check(CLI::ExistingFile);
  tr->add_option("--costs", c.costs, "fixed | distance | file:PATH");
  tr->add_option("--order", c.order, "Processing order");
  tr->add_option("--out", c.out, "Output trace JSON")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitError;
  }

  try {
    if (*an) return analyze(c, property, matrix, decentralized, out, err);
    if (*sy) return synthesize(c, out, err);
    if (*ge) return generate(n, dims, density, target, seed, gen_out, out);
    if (*co) return compare(c, methods, out, err);
    if (*tr) return trace(c, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace netsyn
