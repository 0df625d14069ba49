#include "qn/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "qn/bench.hpp"
#include "qn/checks.hpp"
#include "qn/config.hpp"
#include "qn/fibril.hpp"

namespace qn {

namespace {

std::uint64_t default_seed(std::uint64_t fallback) {
  const char* env = std::getenv("QN_SEED");
  if (env == nullptr || *env == '\0') return fallback;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0') throw DomainError(std::string("QN_SEED is not an integer: ") + env);
  return v;
}

std::string num(double v, const char* f = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void report(std::ostream& out, const SolveResult& r) {
  out << "status " << to_string(r.trace.reason) << "\n";
  out << "iterations " << r.trace.iterations() << "\n";
  out << "f " << num(r.f, "%.10g") << "\n";
  out << "gnorm " << num(r.trace.final_gnorm, "%.3e") << "\n";
}

Point mdgp_start(const MdgpProblem& prob, std::uint64_t seed) {
  double scale = 0.0;
  for (const auto& c : prob.constraints())
    scale += c.kind == ConstraintKind::exact ? c.d : 0.5 * (c.l + c.u);
  scale = prob.constraints().empty() ? 1.0 : scale / static_cast<double>(prob.constraints().size());
  const double side = scale * std::cbrt(static_cast<double>(prob.atom_count()));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, side);
  Point x(prob.free_dimension());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = u(rng);
  return x;
}

int cmd_solve(const std::string& file, const std::string& config_path, const std::string& trace_path,
              std::optional<std::uint64_t> seed, std::ostream& out) {
  RunConfig rc;
  if (!config_path.empty()) rc = read_config_file(config_path);
  MdgpProblem prob = read_mdgp_file(file);
  prob.set_uniform_perturbation(rc.eps.value_or(0.05));
  if (prob.free_dimension() == 0) throw DomainError("instance has no free atoms");
  const Point x0 = mdgp_start(prob, seed.value_or(default_seed(rc.anneal.seed)));
  const ObjectiveProblem obj = make_mdgp_objective(prob);

  Point start = x0;
  if (rc.use_sa) start = anneal(obj, x0, rc.anneal, rc.solver).x_best;
  const SolveResult r = solve(obj, start, rc.solver);

  report(out, r);
  const std::vector<double> full = prob.expand(r.x.values());
  for (std::size_t a = 0; a < prob.atom_count(); ++a)
    out << "atom " << a << ' ' << num(full[3 * a]) << ' ' << num(full[3 * a + 1]) << ' '
        << num(full[3 * a + 2]) << (prob.is_fixed(a) ? " fixed" : "") << "\n";
  if (!trace_path.empty()) {
    std::ofstream t(trace_path);
    if (!t) throw IoError("cannot write trace: " + trace_path);
    write_trace_csv(t, r.trace);
  }
  return r.converged() ? exit_ok : exit_failure;
}

int cmd_lj(std::size_t atoms, std::optional<std::uint64_t> seed, bool use_sa, std::ostream& out) {
  if (atoms < 2) throw DomainError("--atoms must be at least 2");
  const std::uint64_t s = seed.value_or(default_seed(1));
  const BenchProblem bp = lj_instance(atoms, s);
  Point start = bp.x0;
  SolverConfig cfg;
  if (use_sa) {
    AnnealConfig acfg;
    acfg.seed = s;
    start = anneal(bp.objective, bp.x0, acfg, cfg).x_best;
  }
  const SolveResult r = solve(bp.objective, start, cfg);
  report(out, r);
  out << "energy " << num(r.f, "%.8f") << "\n";
  return r.converged() ? exit_ok : exit_failure;
}

void print_zipper(std::ostream& out, const ZipperSolution& s) {
  const ZipperInstance z = zipper_instance(s.id);
  out << "zipper " << static_cast<int>(s.id) << "\n";
  out << "iterations " << s.trace.iterations() << "\n";
  out << "gnorm " << num(s.gnorm, "%.3e") << "\n";
  for (std::size_t v = 0; v < z.variable_labels.size(); ++v)
    out << z.variable_labels[v] << ' ' << num(s.x[3 * v], "%.4f") << ' '
        << num(s.x[3 * v + 1], "%.4f") << ' ' << num(s.x[3 * v + 2], "%.4f") << "\n";
  const ContactPattern contacts = zipper_contacts();
  for (std::size_t c = 0; c < contacts.size(); ++c)
    out << "distance " << z.variable_labels[contacts[c].first] << ' '
        << z.anchors[contacts[c].second].label << ' ' << num(s.distances[c], "%.4f") << "\n";
  out << "feasible " << (s.feasible ? "yes" : "no") << "\n";
}

AnnealConfig seeded_anneal(std::optional<std::uint64_t> seed) {
  AnnealConfig acfg;
  acfg.seed = seed.value_or(default_seed(acfg.seed));
  return acfg;
}

int cmd_zipper(int which, bool use_sa, std::optional<std::uint64_t> seed, std::ostream& out) {
  const ZipperId id = which == 1 ? ZipperId::one : ZipperId::two;
  const ZipperSolution s = solve_zipper(id, zipper_solver_config(), use_sa, seeded_anneal(seed));
  print_zipper(out, s);
  return s.feasible ? exit_ok : exit_failure;
}

int cmd_fibril(const std::string& path, const std::string& tmpl_path, const std::string& format,
               bool use_sa, std::optional<std::uint64_t> seed, std::ostream& out) {
  const StructureFormat fmt = format == "xyz" ? StructureFormat::xyz : StructureFormat::pdb;
  const ChainSet tmpl =
      tmpl_path.empty() ? skeleton_template() : template_from_pdb(read_pdb_file(tmpl_path));
  const std::vector<ZipperSolution> zippers =
      solve_zippers(zipper_solver_config(), use_sa, seeded_anneal(seed));
  const FibrilModel model = assemble_model(tmpl, zippers);
  write_structure(model, fmt, path);
  std::size_t atoms = 0;
  for (const auto& [id, chain] : model.chains) atoms += chain.size();
  out << "wrote " << path << " (" << model.chains.size() << " chains, " << atoms << " atoms)\n";
  for (const auto& s : zippers)
    if (!s.feasible) return exit_failure;
  return exit_ok;
}

std::vector<std::size_t> parse_dims(const std::string& spec) {
  std::vector<std::size_t> dims;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != item.size() || v == 0 || v % 4 != 0)
      throw DomainError("--dims entries must be positive multiples of 4: '" + item + "'");
    dims.push_back(v);
  }
  if (dims.empty()) throw DomainError("--dims is empty");
  return dims;
}

int cmd_bench(const std::string& path, const std::string& metric, const std::string& dims_spec,
              const std::string& curve_path, std::size_t budget, bool smoke, bool grid,
              std::ostream& out) {
  const ProfileMetric m = metric == "cpu" ? ProfileMetric::cpu_time : ProfileMetric::iterations;
  const std::vector<std::size_t> dims = parse_dims(dims_spec);
  std::vector<BenchProblem> problems = corpus(dims);
  if (smoke) problems.push_back(extended_rosenbrock(10000));
  for (const auto& p : problems) {
    const double e = gradient_gate(p, p.x0);
    if (e > 1e-4) throw EvaluationError(p.name + " fails the gradient gate: " + num(e, "%.3g"));
  }
  const std::vector<NamedSolver> solvers = grid ? solver_grid(budget) : default_solver_pair(budget);
  const ProfileTable table = compare(solvers, problems, m);

  std::ofstream f(path);
  if (!f) throw IoError("cannot write profile: " + path);
  write_profile_csv(f, table);
  if (!curve_path.empty()) {
    std::ofstream c(curve_path);
    if (!c) throw IoError("cannot write profile curve: " + curve_path);
    static constexpr double taus[] = {1, 1.25, 1.5, 2, 3, 4, 6, 8, 12, 16, 32, 64};
    write_profile_curve_csv(c, table, taus);
  }
  out << "problems " << problems.size() << "\n";
  for (std::size_t s = 0; s < table.solvers.size(); ++s)
    out << table.solvers[s] << " converged " << num(100.0 * table.converged_fraction(s), "%.1f")
        << "% P(1) " << num(table.profile(s, 1.0), "%.3f") << "\n";
  return exit_ok;
}

int cmd_check(std::ostream& out) {
  bool all = true;
  for (const auto& r : run_checks()) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
    all = all && r.passed;
  }
  return all ? exit_ok : exit_failure;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Limited-memory quasi-Newton optimizer for distance-geometry and cluster problems",
               "qnopt"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  bool use_sa = false;

  std::string solve_file, config_path, trace_path;
  auto* solve_cmd = app.add_subcommand("solve", "Solve a distance-geometry instance file");
  solve_cmd->add_option("file", solve_file, "Instance file")->required();
  solve_cmd->add_option("--config", config_path, "key = value settings file");
  solve_cmd->add_option("--trace", trace_path, "Write the iteration trace CSV here");
  solve_cmd->add_option("--seed", seed, "Seed for the random start");

  std::size_t atoms = 0;
  auto* lj_cmd = app.add_subcommand("lj", "Minimize a Lennard-Jones cluster");
  lj_cmd->add_option("--atoms", atoms, "Number of atoms")->required();
  lj_cmd->add_option("--seed", seed, "Seed for the random start");
  lj_cmd->add_flag("--sa", use_sa, "Anneal before the local solve");

  int which = 0;
  auto* zip_cmd = app.add_subcommand("zipper", "Solve one steric-zipper instance");
  zip_cmd->add_option("id", which, "Zipper 1 or 2")->required()->check(CLI::IsMember({1, 2}));
  zip_cmd->add_flag("--sa", use_sa, "Anneal before the local solve");
  zip_cmd->add_option("--seed", seed, "Annealing seed");

  std::string fibril_out, tmpl_path, format = "pdb";
  auto* fib_cmd = app.add_subcommand("fibril", "Assemble the ten-chain model");
  fib_cmd->add_option("--out", fibril_out, "Output path")->required();
  fib_cmd->add_option("--template", tmpl_path, "PDB template for chains A and B");
  fib_cmd->add_option("--format", format, "pdb or xyz")->check(CLI::IsMember({"pdb", "xyz"}));
  fib_cmd->add_flag("--sa", use_sa, "Anneal before the zipper solves");
  fib_cmd->add_option("--seed", seed, "Annealing seed");

  std::string bench_out, metric = "iterations", dims = "100,500,1000", curve_out;
  std::size_t budget = 10000;
  bool smoke = false;
  auto* bench_cmd = app.add_subcommand("bench", "Run the solver comparison over the test corpus");
  bench_cmd->add_option("--out", bench_out, "Profile CSV path")->required();
  bench_cmd->add_option("--metric", metric, "iterations or cpu")
      ->check(CLI::IsMember({"iterations", "cpu"}));
  bench_cmd->add_option("--dims", dims, "Comma-separated dimensions");
  bench_cmd->add_option("--profile-out", curve_out, "Write P(tau) curves here");
  bench_cmd->add_option("--budget", budget, "Iteration budget per run")->check(CLI::PositiveNumber);
  bench_cmd->add_flag("--smoke", smoke, "Add the n = 10000 Rosenbrock run");
  bool grid = false;
  bench_cmd->add_flag("--grid", grid, "Compare the full variant grid instead of the default pair");

  auto* check_cmd = app.add_subcommand("check", "Run the verification suite");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return exit_usage;
  }

  try {
    if (*solve_cmd) return cmd_solve(solve_file, config_path, trace_path, seed, out);
    if (*lj_cmd) return cmd_lj(atoms, seed, use_sa, out);
    if (*zip_cmd) return cmd_zipper(which, use_sa, seed, out);
    if (*fib_cmd) return cmd_fibril(fibril_out, tmpl_path, format, use_sa, seed, out);
    if (*bench_cmd) return cmd_bench(bench_out, metric, dims, curve_out, budget, smoke, grid, out);
    if (*check_cmd) return cmd_check(out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const SolverError& e) {
    err << "solver failure: " << e.what() << "\n";
    return exit_failure;
  } catch (const ZipperSolveError& e) {
    err << "solver failure: " << e.what() << "\n";
    return exit_failure;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_usage;
  }
  return exit_usage;
}

}  // namespace qn
