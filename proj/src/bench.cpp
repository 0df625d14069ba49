#include "qn/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>

#include "qn/objectives.hpp"

namespace qn {

namespace {

BenchProblem make(std::string family, std::size_t n, ObjectiveProblem::EvalFn fn, Point x0,
                  std::optional<double> f_star) {
  BenchProblem p;
  p.name = family + "-" + std::to_string(n);
  p.family = std::move(family);
  p.n = n;
  p.objective = ObjectiveProblem(n, std::move(fn));
  p.x0 = std::move(x0);
  p.f_star = f_star;
  return p;
}

void require_multiple(std::size_t n, std::size_t k, const char* name) {
  if (n == 0 || n % k != 0)
    throw DimensionError(std::string(name) + " needs n to be a positive multiple of " +
                         std::to_string(k));
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

BenchProblem extended_rosenbrock(std::size_t n) {
  require_multiple(n, 2, "extended Rosenbrock");
  Point x0(n);
  for (std::size_t i = 0; i < n; i += 2) {
    x0[i] = -1.2;
    x0[i + 1] = 1.0;
  }
  return make(
      "rosenbrock", n,
      [](std::span<const double> x, std::span<double> g) {
        double f = 0.0;
        for (std::size_t i = 0; i < x.size(); i += 2) {
          const double t1 = x[i + 1] - x[i] * x[i];
          const double t2 = 1.0 - x[i];
          f += 100.0 * t1 * t1 + t2 * t2;
          if (!g.empty()) {
            g[i] = -400.0 * t1 * x[i] - 2.0 * t2;
            g[i + 1] = 200.0 * t1;
          }
        }
        return f;
      },
      std::move(x0), 0.0);
}

BenchProblem extended_powell(std::size_t n) {
  require_multiple(n, 4, "extended Powell");
  Point x0(n);
  for (std::size_t i = 0; i < n; i += 4) {
    x0[i] = 3.0;
    x0[i + 1] = -1.0;
    x0[i + 2] = 0.0;
    x0[i + 3] = 1.0;
  }
  return make(
      "powell", n,
      [](std::span<const double> x, std::span<double> g) {
        double f = 0.0;
        for (std::size_t i = 0; i < x.size(); i += 4) {
          const double a = x[i] + 10.0 * x[i + 1];
          const double b = x[i + 2] - x[i + 3];
          const double c = x[i + 1] - 2.0 * x[i + 2];
          const double d = x[i] - x[i + 3];
          f += a * a + 5.0 * b * b + c * c * c * c + 10.0 * d * d * d * d;
          if (!g.empty()) {
            g[i] = 2.0 * a + 40.0 * d * d * d;
            g[i + 1] = 20.0 * a + 4.0 * c * c * c;
            g[i + 2] = 10.0 * b - 8.0 * c * c * c;
            g[i + 3] = -10.0 * b - 40.0 * d * d * d;
          }
        }
        return f;
      },
      std::move(x0), 0.0);
}

BenchProblem trigonometric(std::size_t n) {
  if (n == 0) throw DimensionError("trigonometric needs n > 0");
  return make(
      "trigonometric", n,
      [](std::span<const double> x, std::span<double> g) {
        const std::size_t m = x.size();
        double cos_sum = 0.0;
        for (double v : x) cos_sum += std::cos(v);
        std::vector<double> r(m);
        double f = 0.0;
        double r_sum = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          const double idx = static_cast<double>(i + 1);
          r[i] = static_cast<double>(m) - cos_sum + idx * (1.0 - std::cos(x[i])) - std::sin(x[i]);
          f += r[i] * r[i];
          r_sum += r[i];
        }
        if (!g.empty()) {
          for (std::size_t j = 0; j < m; ++j) {
            const double idx = static_cast<double>(j + 1);
            g[j] = 2.0 * std::sin(x[j]) * r_sum +
                   2.0 * r[j] * (idx * std::sin(x[j]) - std::cos(x[j]));
          }
        }
        return f;
      },
      Point(n, 1.0 / static_cast<double>(n)), 0.0);
}

BenchProblem broyden_tridiagonal(std::size_t n) {
  if (n < 2) throw DimensionError("Broyden tridiagonal needs n >= 2");
  return make(
      "broyden-tridiagonal", n,
      [](std::span<const double> x, std::span<double> g) {
        const std::size_t m = x.size();
        auto at = [&](std::ptrdiff_t i) {
          return (i < 0 || i >= static_cast<std::ptrdiff_t>(m)) ? 0.0 : x[i];
        };
        std::vector<double> r(m);
        double f = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          const auto si = static_cast<std::ptrdiff_t>(i);
          r[i] = (3.0 - 2.0 * x[i]) * x[i] - at(si - 1) - 2.0 * at(si + 1) + 1.0;
          f += r[i] * r[i];
        }
        if (!g.empty()) {
          for (std::size_t j = 0; j < m; ++j) {
            double v = r[j] * (3.0 - 4.0 * x[j]);
            if (j + 1 < m) v -= r[j + 1];
            if (j > 0) v -= 2.0 * r[j - 1];
            g[j] = 2.0 * v;
          }
        }
        return f;
      },
      Point(n, -1.0), 0.0);
}

BenchProblem penalty_one(std::size_t n) {
  if (n == 0) throw DimensionError("penalty I needs n > 0");
  Point x0(n);
  for (std::size_t i = 0; i < n; ++i) x0[i] = static_cast<double>(i + 1);
  return make(
      "penalty-i", n,
      [](std::span<const double> x, std::span<double> g) {
        constexpr double a = 1e-5;
        double sq = 0.0;
        double lin = 0.0;
        for (double v : x) {
          sq += v * v;
          lin += (v - 1.0) * (v - 1.0);
        }
        const double t = sq - 0.25;
        if (!g.empty())
          for (std::size_t i = 0; i < x.size(); ++i) g[i] = 2.0 * a * (x[i] - 1.0) + 4.0 * t * x[i];
        return a * lin + t * t;
      },
      std::move(x0), std::nullopt);
}

BenchProblem diagonal_quadratic(std::size_t n, double condition) {
  if (n == 0) throw DimensionError("diagonal quadratic needs n > 0");
  if (!(condition >= 1.0)) throw DomainError("condition number must be >= 1");
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    c[i] = std::pow(condition, t);
  }
  char tag[32];
  std::snprintf(tag, sizeof tag, "quadratic-c1e%d", static_cast<int>(std::lround(std::log10(condition))));
  BenchProblem p = make(
      tag, n,
      [c](std::span<const double> x, std::span<double> g) {
        double f = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
          f += 0.5 * c[i] * x[i] * x[i];
          if (!g.empty()) g[i] = c[i] * x[i];
        }
        return f;
      },
      Point(n, 1.0), 0.0);
  p.strongly_convex = true;
  return p;
}

BenchProblem extended_beale(std::size_t n) {
  require_multiple(n, 2, "extended Beale");
  Point x0(n);
  for (std::size_t i = 0; i < n; i += 2) {
    x0[i] = 1.0;
    x0[i + 1] = 0.8;
  }
  return make(
      "beale", n,
      [](std::span<const double> x, std::span<double> g) {
        static constexpr double y[3] = {1.5, 2.25, 2.625};
        double f = 0.0;
        for (std::size_t i = 0; i < x.size(); i += 2) {
          const double a = x[i];
          const double b = x[i + 1];
          double ga = 0.0;
          double gb = 0.0;
          double bp = 1.0;  // b^k
          for (int k = 1; k <= 3; ++k) {
            const double dbp = static_cast<double>(k) * bp;  // d(b^k)/db
            bp *= b;
            const double r = y[k - 1] - a * (1.0 - bp);
            f += r * r;
            ga += 2.0 * r * -(1.0 - bp);
            gb += 2.0 * r * a * dbp;
          }
          if (!g.empty()) {
            g[i] = ga;
            g[i + 1] = gb;
          }
        }
        return f;
      },
      std::move(x0), 0.0);
}

BenchProblem lj_instance(std::size_t atoms, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  // Random start in a cube sized for roughly unit density, rejecting close contacts.
  const double side = 1.2 * std::cbrt(static_cast<double>(atoms));
  Point x0(3 * atoms);
  for (std::size_t a = 0; a < atoms; ++a) {
    for (int attempt = 0;; ++attempt) {
      for (int k = 0; k < 3; ++k) x0[3 * a + k] = side * uniform01(rng);
      bool ok = true;
      for (std::size_t b = 0; b < a && ok; ++b) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) {
          const double d = x0[3 * a + k] - x0[3 * b + k];
          s += d * d;
        }
        ok = s > 0.7 * 0.7;
      }
      if (ok || attempt > 1000) break;
    }
  }
  BenchProblem p;
  p.family = "lj-cluster";
  p.name = "lj-cluster-" + std::to_string(atoms);
  p.n = 3 * atoms;
  p.objective = make_lj_cluster(atoms);
  p.x0 = std::move(x0);
  return p;
}

BenchProblem helix_mdgp_instance(std::size_t atoms, std::uint64_t seed) {
  if (atoms < 4) throw DomainError("helix instance needs at least four atoms");
  // Reference geometry: an alpha-helix-like trace (radius 2.3, rise 1.5, 100 deg/atom).
  std::vector<Vec3> ref(atoms);
  for (std::size_t i = 0; i < atoms; ++i) {
    const double t = static_cast<double>(i) * 100.0 * M_PI / 180.0;
    ref[i] = {2.3 * std::cos(t), 2.3 * std::sin(t), 1.5 * static_cast<double>(i)};
  }
  auto dist = [&](std::size_t i, std::size_t j) {
    double s = 0.0;
    for (int k = 0; k < 3; ++k) s += (ref[i][k] - ref[j][k]) * (ref[i][k] - ref[j][k]);
    return std::sqrt(s);
  };
  MdgpProblem prob(atoms);
  for (std::size_t i = 0; i + 1 < atoms; ++i) {
    prob.add_constraint(DistanceConstraint::exact(i, i + 1, dist(i, i + 1)));
    if (i + 2 < atoms) prob.add_constraint(DistanceConstraint::exact(i, i + 2, dist(i, i + 2)));
    if (i + 3 < atoms) {
      const double d = dist(i, i + 3);
      prob.add_constraint(DistanceConstraint::interval(i, i + 3, 0.95 * d, 1.05 * d));
    }
  }
  // Pin three atoms to remove rigid motions.
  for (std::size_t a = 0; a < 3; ++a) prob.fix_atom(a, ref[a]);

  std::mt19937_64 rng(seed);
  Point x0(prob.free_dimension());
  const auto& free = prob.free_atoms();
  for (std::size_t b = 0; b < free.size(); ++b)
    for (int k = 0; k < 3; ++k) x0[3 * b + k] = ref[free[b]][k] + 0.6 * (uniform01(rng) - 0.5);

  BenchProblem p;
  p.family = "mdgp-helix";
  p.name = "mdgp-helix-" + std::to_string(atoms);
  p.n = prob.free_dimension();
  p.objective = make_mdgp_objective(std::move(prob));
  p.x0 = std::move(x0);
  p.f_star = 0.0;
  return p;
}

std::vector<BenchProblem> corpus(std::span<const std::size_t> dims) {
  std::vector<BenchProblem> out;
  for (std::size_t n : dims) {
    out.push_back(extended_rosenbrock(n));
    out.push_back(extended_powell(n));
    out.push_back(trigonometric(n));
    out.push_back(broyden_tridiagonal(n));
    out.push_back(penalty_one(n));
    out.push_back(extended_beale(n));
    for (double cond : {1.0, 1e2, 1e4, 1e6}) out.push_back(diagonal_quadratic(n, cond));
  }
  for (std::size_t atoms : {5, 8, 13}) out.push_back(lj_instance(atoms, 1000 + atoms));
  for (std::size_t atoms : {20, 50}) out.push_back(helix_mdgp_instance(atoms, 2000 + atoms));
  return out;
}

std::vector<BenchProblem> corpus() {
  static constexpr std::size_t dims[] = {100, 500, 1000};
  return corpus(dims);
}

double gradient_gate(const BenchProblem& p, std::span<const double> x) {
  const Point analytic = p.objective.gradient(x);
  const Point numeric = fd_gradient(p.objective, x, scaled_step(x));
  return gradient_mismatch(analytic, numeric);
}

std::vector<NamedSolver> default_solver_pair(std::size_t budget) {
  SolverConfig improved;
  improved.max_iters = budget;
  SolverConfig plain = improved;
  plain.update = SecantUpdate::plain;
  return {{"improved-lbfgs", improved}, {"plain-lbfgs", plain}};
}

std::vector<NamedSolver> solver_grid(std::size_t budget) {
  std::vector<NamedSolver> out;
  for (const auto& base : default_solver_pair(budget)) {
    out.push_back(base);
    NamedSolver nm = base;
    nm.name += "-nonmonotone";
    nm.config.line_search.mode = LineSearchMode::nonmonotone;
    out.push_back(nm);
    NamedSolver fixed = base;
    fixed.name += "-identity-h0";
    fixed.config.h0_mode = H0Mode::fixed_identity;
    out.push_back(fixed);
  }
  return out;
}

const RunRecord& ProfileTable::run(std::size_t problem, std::size_t solver) const {
  return runs.at(problem * solvers.size() + solver);
}

double ProfileTable::profile(std::size_t solver, double tau) const {
  if (problems.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t p = 0; p < problems.size(); ++p)
    if (run(p, solver).ratio <= tau) ++hits;
  return static_cast<double>(hits) / static_cast<double>(problems.size());
}

double ProfileTable::converged_fraction(std::size_t solver) const {
  if (problems.empty()) return 0.0;
  std::size_t ok = 0;
  for (std::size_t p = 0; p < problems.size(); ++p)
    if (run(p, solver).converged) ++ok;
  return static_cast<double>(ok) / static_cast<double>(problems.size());
}

namespace {

double metric_value(const RunRecord& r, ProfileMetric m) {
  // Floors keep zero-cost runs (start already stationary) from dividing by zero.
  if (m == ProfileMetric::iterations) return std::max<double>(1.0, static_cast<double>(r.iterations));
  return std::max(1e-9, r.cpu_time);
}

}  // namespace

void compute_ratios(ProfileTable& table) {
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < table.problems.size(); ++p) {
    double best = inf;
    for (std::size_t s = 0; s < table.solvers.size(); ++s) {
      const RunRecord& r = table.run(p, s);
      if (r.converged) best = std::min(best, metric_value(r, table.metric));
    }
    for (std::size_t s = 0; s < table.solvers.size(); ++s) {
      RunRecord& r = table.runs[p * table.solvers.size() + s];
      r.ratio = r.converged ? metric_value(r, table.metric) / best : inf;
    }
  }
}

ProfileTable compare(std::span<const NamedSolver> solvers, std::span<const BenchProblem> problems,
                     ProfileMetric metric) {
  ProfileTable table;
  table.metric = metric;
  for (const auto& s : solvers) table.solvers.push_back(s.name);
  for (const auto& p : problems) table.problems.push_back(p.name);

  for (const auto& p : problems) {
    for (const auto& s : solvers) {
      RunRecord r;
      r.problem = p.name;
      r.solver = s.name;
      try {
        const SolveResult res = solve(p.objective, p.x0, s.config);
        r.cpu_time = res.trace.cpu_seconds;
        r.iterations = res.trace.iterations();
        r.evaluations = res.trace.evaluations;
        r.converged = res.converged();
        r.reason = res.trace.reason;
        r.final_f = res.f;
      } catch (const Error&) {
        r.converged = false;
        r.reason = Termination::line_search_failure;
      }
      table.runs.push_back(r);
    }
  }
  compute_ratios(table);
  return table;
}

void write_profile_csv(std::ostream& out, const ProfileTable& table) {
  out << "problem,solver,time,iters,evals,ratio\n";
  char buf[64];
  for (const auto& r : table.runs) {
    out << r.problem << ',' << r.solver << ',';
    if (table.metric == ProfileMetric::cpu_time) {
      std::snprintf(buf, sizeof buf, "%.6f", r.cpu_time);
      out << buf;
    } else {
      out << "NA";
    }
    out << ',' << r.iterations << ',' << r.evaluations << ',';
    if (std::isinf(r.ratio)) {
      out << "inf";
    } else {
      std::snprintf(buf, sizeof buf, "%.6f", r.ratio);
      out << buf;
    }
    out << '\n';
  }
}

void write_profile_curve_csv(std::ostream& out, const ProfileTable& table,
                             std::span<const double> taus) {
  out << "solver,tau,P\n";
  char buf[64];
  for (std::size_t s = 0; s < table.solvers.size(); ++s) {
    for (double tau : taus) {
      std::snprintf(buf, sizeof buf, "%.6g,%.6f", tau, table.profile(s, tau));
      out << table.solvers[s] << ',' << buf << '\n';
    }
  }
}

}  // namespace qn
