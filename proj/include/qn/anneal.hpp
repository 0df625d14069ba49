#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "qn/numeric.hpp"
#include "qn/solver.hpp"

namespace qn {

struct AnnealConfig {
  /// Initial temperature; <= 0 selects the sample standard deviation of f
  /// over `calibration_samples` random perturbations of x0.
  double T0 = 0.0;
  double cooling = 0.95;
  std::size_t steps_per_T = 20;
  /// Side of the uniform displacement cube per coordinate.
  double perturb_scale = 0.5;
  double T_min = 1e-3;
  std::uint64_t seed = 1;
  /// Refine with the quasi-Newton solver after this many accepted moves.
  std::size_t local_every = 10;
  std::size_t calibration_samples = 50;

  void validate() const;
};

struct AnnealStep {
  double T = 0.0;
  double f_current = 0.0;
  double f_best = 0.0;
  bool accepted = false;
  bool uphill = false;
  bool refined = false;
};

struct AnnealResult {
  Point x_best;
  double f_best = 0.0;
  /// Chain state when the schedule ended (before the final refinement).
  Point x_last;
  double f_last = 0.0;
  double T0 = 0.0;
  std::size_t local_solves = 0;
  std::vector<AnnealStep> trace;
};

/// Metropolis rule: downhill always, uphill with probability exp(-delta/T).
bool metropolis_accept(double delta, double T, std::mt19937_64& rng);

/// Sample standard deviation of f over random cube perturbations of x0.
double calibrate_temperature(const ObjectiveProblem& p, const Point& x0, const AnnealConfig& cfg,
                             std::mt19937_64& rng);

/// Simulated annealing with periodic quasi-Newton refinement. Deterministic for a given seed.
AnnealResult anneal(const ObjectiveProblem& p, const Point& x0, const AnnealConfig& acfg,
                    const SolverConfig& scfg = {});

}  // namespace qn
