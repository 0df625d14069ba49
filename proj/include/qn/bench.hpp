#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qn/numeric.hpp"
#include "qn/solver.hpp"

namespace qn {

struct BenchProblem {
  std::string name;
  std::string family;
  std::size_t n = 0;
  ObjectiveProblem objective;
  Point x0;
  std::optional<double> f_star;
  /// Strongly convex (diagonal quadratics): eligible for the R-linear fit.
  bool strongly_convex = false;
};

/// Smooth unconstrained test problems. Each of the ten analytic families is
/// instantiated at every dimension in `dims`; the LJ and distance-geometry
/// instances are appended at their own small sizes.
std::vector<BenchProblem> corpus(std::span<const std::size_t> dims);
std::vector<BenchProblem> corpus();  // dims {100, 500, 1000}

BenchProblem extended_rosenbrock(std::size_t n);
BenchProblem extended_powell(std::size_t n);
BenchProblem trigonometric(std::size_t n);
BenchProblem broyden_tridiagonal(std::size_t n);
BenchProblem penalty_one(std::size_t n);
BenchProblem diagonal_quadratic(std::size_t n, double condition);
BenchProblem extended_beale(std::size_t n);
BenchProblem lj_instance(std::size_t atoms, std::uint64_t seed);
BenchProblem helix_mdgp_instance(std::size_t atoms, std::uint64_t seed);

/// Finite-difference gate at `x`: returns the mismatch (see gradient_mismatch).
double gradient_gate(const BenchProblem& p, std::span<const double> x);

struct NamedSolver {
  std::string name;
  SolverConfig config;
};

/// improved (y*) and plain (y) L-BFGS, both monotone Wolfe, m1 = 5.
std::vector<NamedSolver> default_solver_pair(std::size_t budget = 10000);
/// The pair above plus nonmonotone and fixed-identity variants of each.
std::vector<NamedSolver> solver_grid(std::size_t budget = 10000);

enum class ProfileMetric { iterations, cpu_time };

struct RunRecord {
  std::string problem;
  std::string solver;
  double cpu_time = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool converged = false;
  Termination reason = Termination::max_iters;
  double final_f = 0.0;
  double ratio = 0.0;  // +inf on failure
};

struct ProfileTable {
  ProfileMetric metric = ProfileMetric::iterations;
  std::vector<std::string> solvers;
  std::vector<std::string> problems;
  std::vector<RunRecord> runs;  // problem-major, solver-minor

  const RunRecord& run(std::size_t problem, std::size_t solver) const;
  /// P_s(tau) = |{p : r_{p,s} <= tau}| / |problems|
  double profile(std::size_t solver, double tau) const;
  double converged_fraction(std::size_t solver) const;
};

/// Fills ratio fields in place from the chosen metric.
void compute_ratios(ProfileTable& table);

/// Runs every (problem, solver) cell sequentially; a failing run never aborts the table.
ProfileTable compare(std::span<const NamedSolver> solvers, std::span<const BenchProblem> problems,
                     ProfileMetric metric = ProfileMetric::iterations);

/// problem,solver,time,iters,evals,ratio. The time column is "NA" unless
/// the table uses the CPU-time metric, so iteration-metric output is deterministic.
void write_profile_csv(std::ostream& out, const ProfileTable& table);
/// solver,tau,P over the supplied tau grid.
void write_profile_curve_csv(std::ostream& out, const ProfileTable& table,
                             std::span<const double> taus);

}  // namespace qn
