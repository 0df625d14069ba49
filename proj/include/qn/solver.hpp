#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "qn/line_search.hpp"
#include "qn/numeric.hpp"

namespace qn {

enum class H0Mode { scaled_identity, fixed_identity };

/// How the secant vector entering the memory is formed.
enum class SecantUpdate {
  modified,  // y* = y + ||g_k|| s
  plain,     // y* = y (classic L-BFGS, for comparison runs)
};

/// One correction pair (s, y*, omega* = 1 / s^T y*).
struct MemoryPair {
  Point s;
  Point y_star;
  double omega_star = 0.0;
};

struct StepEvent;

struct SolverConfig {
  std::size_t m1 = 5;
  double grad_tol = 1e-6;
  /// When set, the stopping threshold is grad_tol * max(1, ||g_0||).
  bool grad_tol_relative = true;
  std::size_t max_iters = 10000;
  LineSearchConfig line_search{};
  H0Mode h0_mode = H0Mode::scaled_identity;
  SecantUpdate update = SecantUpdate::modified;
  /// Optional cap on gamma_k = ||g_k||.
  double gamma_max = std::numeric_limits<double>::infinity();
  double curvature_floor = 1e-12;
  /// Consecutive line-search failures tolerated before the memory is dropped.
  std::size_t max_ls_failures = 3;
  /// Called once per iteration after the step is taken.
  std::function<void(const StepEvent&)> observer;

  void validate() const;
};

enum class Termination { converged, max_iters, line_search_failure };

std::string to_string(Termination t);

/// An objective failure inside the iteration, tagged with the iteration index.
class SolverError : public Error {
 public:
  SolverError(std::size_t k, const std::string& what)
      : Error("iteration " + std::to_string(k) + ": " + what), iteration(k) {}

  std::size_t iteration;
};

struct IterationRecord {
  std::size_t k = 0;
  double f = 0.0;      // f(x_k)
  double gnorm = 0.0;  // ||g(x_k)||
  double lambda = 0.0;
  std::size_t trials = 0;
  bool skipped = false;     // no pair stored this iteration
  bool ls_failed = false;   // step taken from the line-search fallback
  bool reset = false;       // memory dropped before this step
};

struct SolverTrace {
  std::vector<IterationRecord> records;
  Termination reason = Termination::max_iters;
  double elapsed_seconds = 0.0;
  double cpu_seconds = 0.0;
  std::size_t evaluations = 0;
  double final_f = 0.0;
  double final_gnorm = 0.0;
  double tolerance = 0.0;

  std::size_t iterations() const { return records.size(); }
};

/// Snapshot handed to SolverConfig::observer after each accepted step.
struct StepEvent {
  std::size_t k;
  std::span<const double> x;  // x_k
  std::span<const double> d;  // d_k
  double f;                   // f(x_k)
  std::span<const double> g;  // g(x_k)
  std::span<const double> history;  // values used for the nonmonotone reference
  const LineSearchResult& step;
  const MemoryPair* stored;   // pair appended this iteration, or nullptr
};

struct SolveResult {
  Point x;
  double f = 0.0;
  SolverTrace trace;
  bool converged() const { return trace.reason == Termination::converged; }
};

/// H g for the limited-memory operator built from `pairs` (oldest first) over
/// the initial matrix h0_scale * I, by the two-loop recursion.
Point apply_inverse_hessian(std::span<const MemoryPair> pairs, double h0_scale,
                            std::span<const double> g);

enum class UpdateOutcome { stored, skipped };

/// Forms y* = y + gamma s and appends (s, y*) when s^T y* exceeds
/// curvature_floor * ||s|| ||y*||; evicts the oldest pair beyond m1.
UpdateOutcome update_memory(std::vector<MemoryPair>& pairs, std::span<const double> s,
                            std::span<const double> y, double gamma, std::size_t m1,
                            double curvature_floor = 1e-12);

/// Limited-memory quasi-Newton minimization with the modified secant vector.
SolveResult solve(const ObjectiveProblem& p, const Point& x0, const SolverConfig& cfg = {});

struct RateFit {
  double rate = 0.0;   // t = exp(slope)
  double slope = 0.0;  // of log(f_k - f*) against k
  std::size_t points = 0;
  bool pass() const { return rate < 1.0; }
};

/// Least-squares fit of log(f_k - f_star) against k over the tail half of the trace.
RateFit check_rlinear(const SolverTrace& trace, double f_star);
RateFit check_rlinear(const SolverTrace& trace);

/// CSV with columns k,f,gnorm,lambda,trials,skipped.
void write_trace_csv(std::ostream& out, const SolverTrace& trace);

}  // namespace qn
