#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "qn/bench.hpp"

using namespace qn;

TEST_CASE("corpus covers the required families and sizes") {
  const std::vector<BenchProblem> c = corpus();
  CHECK(c.size() >= 30);
  std::set<std::string> names, families;
  std::set<std::size_t> dims;
  for (const auto& p : c) {
    names.insert(p.name);
    families.insert(p.family);
    dims.insert(p.n);
    CHECK(p.objective.dimension() == p.n);
    CHECK(p.x0.size() == p.n);
  }
  CHECK(names.size() == c.size());
  for (const char* f : {"rosenbrock", "powell", "trigonometric", "broyden-tridiagonal", "penalty-i",
                        "quadratic-c1e0", "quadratic-c1e6", "lj-cluster", "mdgp-helix"})
    CHECK(families.count(f) == 1);
  for (std::size_t n : {100u, 500u, 1000u}) CHECK(dims.count(n) == 1);
}

TEST_CASE("every corpus problem passes the gradient gate") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (const auto& p : corpus()) {
    CHECK_MESSAGE(gradient_gate(p, p.x0) <= 1e-4, p.name);
    Point x = p.x0;
    for (auto& v : x) v += u(rng);
    CHECK_MESSAGE(gradient_gate(p, x) <= 1e-4, p.name);
  }
}

TEST_CASE("known minimizers are stationary with the recorded optimum") {
  auto at = [](const BenchProblem& p, const Point& x) {
    CHECK(p.f_star.has_value());
    CHECK(p.objective.value(x) == doctest::Approx(*p.f_star).scale(1.0));
    CHECK(norm_inf(p.objective.gradient(x)) <= 1e-12);
  };
  at(extended_rosenbrock(100), Point(100, 1.0));
  at(extended_powell(100), Point(100, 0.0));
  at(diagonal_quadratic(100, 1e6), Point(100, 0.0));
  Point beale(10);
  for (std::size_t i = 0; i < 10; i += 2) {
    beale[i] = 3.0;
    beale[i + 1] = 0.5;
  }
  at(extended_beale(10), beale);
}

TEST_CASE("standard starting points") {
  const BenchProblem r = extended_rosenbrock(4);
  CHECK(r.x0 == Point{-1.2, 1.0, -1.2, 1.0});
  CHECK(extended_powell(4).x0 == Point{3.0, -1.0, 0.0, 1.0});
  CHECK(penalty_one(3).x0 == Point{1.0, 2.0, 3.0});
  CHECK(broyden_tridiagonal(3).x0 == Point(3, -1.0));
  CHECK(trigonometric(4).x0 == Point(4, 0.25));
  CHECK(r.objective.value(r.x0) == doctest::Approx(2 * 24.2));
}

TEST_CASE("dimension preconditions") {
  CHECK_THROWS_AS(extended_rosenbrock(3), DimensionError);
  CHECK_THROWS_AS(extended_powell(6), DimensionError);
  CHECK_THROWS_AS(extended_beale(0), DimensionError);
  CHECK_THROWS_AS(diagonal_quadratic(4, 0.5), DomainError);
  CHECK_THROWS_AS(helix_mdgp_instance(3, 1), DomainError);
}

TEST_CASE("helix instance is consistent at its generating geometry") {
  const BenchProblem p = helix_mdgp_instance(20, 5);
  SolverConfig cfg;
  const SolveResult r = solve(p.objective, p.x0, cfg);
  CHECK(r.converged());
  CHECK(r.f < 1e-8);
}

namespace {

ProfileTable synthetic(std::vector<std::vector<double>> iters, std::vector<std::vector<bool>> ok) {
  ProfileTable t;
  t.metric = ProfileMetric::iterations;
  for (std::size_t s = 0; s < iters[0].size(); ++s) t.solvers.push_back("s" + std::to_string(s));
  for (std::size_t p = 0; p < iters.size(); ++p) {
    t.problems.push_back("p" + std::to_string(p));
    for (std::size_t s = 0; s < iters[p].size(); ++s) {
      RunRecord r;
      r.problem = t.problems.back();
      r.solver = t.solvers[s];
      r.iterations = static_cast<std::size_t>(iters[p][s]);
      r.converged = ok[p][s];
      t.runs.push_back(r);
    }
  }
  compute_ratios(t);
  return t;
}

}  // namespace

TEST_CASE("ratios divide by the best converged solver and failures are infinite") {
  const ProfileTable t = synthetic({{10, 20}, {30, 15}, {5, 7}, {0, 4}},
                                   {{true, true}, {true, true}, {false, true}, {true, false}});
  CHECK(t.run(0, 0).ratio == 1.0);
  CHECK(t.run(0, 1).ratio == 2.0);
  CHECK(t.run(1, 0).ratio == 2.0);
  CHECK(std::isinf(t.run(2, 0).ratio));
  CHECK(t.run(2, 1).ratio == 1.0);
  CHECK(t.run(3, 0).ratio == 1.0);  // zero iterations counts as one
  CHECK(std::isinf(t.run(3, 1).ratio));
  CHECK(t.profile(0, 1.0) == 0.5);
  CHECK(t.profile(0, 2.0) == 0.75);
  CHECK(t.profile(1, 1e9) == 0.75);
  CHECK(t.converged_fraction(1) == 0.75);
}

TEST_CASE("profiles are monotone and bounded on random tables") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t np = 1 + rng() % 20, ns = 1 + rng() % 4;
    std::vector<std::vector<double>> it(np, std::vector<double>(ns));
    std::vector<std::vector<bool>> ok(np, std::vector<bool>(ns));
    for (std::size_t p = 0; p < np; ++p)
      for (std::size_t s = 0; s < ns; ++s) {
        it[p][s] = 1 + rng() % 100;
        ok[p][s] = rng() % 5 != 0;
      }
    const ProfileTable t = synthetic(it, ok);
    for (std::size_t s = 0; s < ns; ++s) {
      double prev = 0.0;
      for (double tau = 1.0; tau < 200.0; tau *= 1.3) {
        const double v = t.profile(s, tau);
        CHECK(v >= prev);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        prev = v;
      }
    }
    // P(1) summed over solvers covers every problem some solver finished.
    double sum = 0.0;
    for (std::size_t s = 0; s < ns; ++s) sum += t.profile(s, 1.0);
    std::size_t solvable = 0;
    for (std::size_t p = 0; p < np; ++p)
      for (std::size_t s = 0; s < ns; ++s)
        if (ok[p][s]) {
          ++solvable;
          break;
        }
    CHECK(sum * np >= solvable - 1e-9);
  }
}

TEST_CASE("single solver profile is one everywhere") {
  static constexpr std::size_t dims[] = {8};
  const std::vector<BenchProblem> problems = corpus(dims);
  const std::vector<NamedSolver> one{default_solver_pair().front()};
  const ProfileTable t = compare(one, problems);
  for (double tau : {1.0, 2.0, 100.0}) CHECK(t.profile(0, tau) == 1.0);
}

TEST_CASE("identical solvers give identical ratios") {
  static constexpr std::size_t dims[] = {8};
  const std::vector<BenchProblem> problems = corpus(dims);
  const NamedSolver a = default_solver_pair().front();
  NamedSolver b = a;
  b.name = "copy";
  const std::vector<NamedSolver> both{a, b};
  const ProfileTable t = compare(both, problems);
  for (std::size_t p = 0; p < problems.size(); ++p) {
    CHECK(t.run(p, 0).iterations == t.run(p, 1).iterations);
    CHECK(t.run(p, 0).ratio == 1.0);
  }
}

TEST_CASE("failing runs are recorded rather than aborting the table") {
  std::vector<BenchProblem> problems;
  problems.push_back(diagonal_quadratic(4, 10.0));
  BenchProblem broken;
  broken.name = "broken";
  broken.n = 2;
  broken.objective = ObjectiveProblem(2, [](std::span<const double>, std::span<double>) -> double {
    throw EvaluationError("always fails");
  });
  broken.x0 = Point(2, 1.0);
  problems.push_back(broken);
  const std::vector<NamedSolver> solvers = default_solver_pair();
  const ProfileTable t = compare(solvers, problems);
  CHECK(t.run(0, 0).converged);
  CHECK_FALSE(t.run(1, 0).converged);
  CHECK(std::isinf(t.run(1, 1).ratio));
}

TEST_CASE("iteration-metric CSV is byte-identical across runs") {
  static constexpr std::size_t dims[] = {12};
  const std::vector<BenchProblem> problems = corpus(dims);
  const std::vector<NamedSolver> solvers = default_solver_pair();
  std::ostringstream a, b;
  write_profile_csv(a, compare(solvers, problems));
  write_profile_csv(b, compare(solvers, problems));
  CHECK(a.str() == b.str());
  std::istringstream in(a.str());
  std::string header;
  std::getline(in, header);
  CHECK(header == "problem,solver,time,iters,evals,ratio");
  std::string row;
  std::getline(in, row);
  CHECK(row.find(",NA,") != std::string::npos);
}

TEST_CASE("profile curve CSV") {
  const ProfileTable t = synthetic({{1, 2}}, {{true, true}});
  std::ostringstream out;
  static constexpr double taus[] = {1.0, 2.0};
  write_profile_curve_csv(out, t, taus);
  CHECK(out.str() == "solver,tau,P\ns0,1,1.000000\ns0,2,1.000000\ns1,1,0.000000\ns1,2,1.000000\n");
}

TEST_CASE("variant grid labels every cell") {
  const std::vector<NamedSolver> grid = solver_grid(50);
  CHECK(grid.size() == 6);
  std::set<std::string> names;
  for (const auto& s : grid) {
    names.insert(s.name);
    CHECK(s.config.max_iters == 50);
  }
  CHECK(names.size() == 6);
}
