#pragma once

#include <cstddef>
#include <span>

#include "qn/numeric.hpp"

namespace qn {

enum class LineSearchMode { monotone, nonmonotone };

struct LineSearchConfig {
  double sigma1 = 1e-4;  // sufficient decrease
  double sigma2 = 0.9;   // curvature
  LineSearchMode mode = LineSearchMode::monotone;
  std::size_t M0 = 5;    // nonmonotone history window
  double p = 0.5;        // nonmonotone curvature exponent, p < 1
  std::size_t max_trials = 60;
  double lambda_max = 1e10;
  double initial_step = 1.0;

  void validate() const;
};

enum class LineSearchStatus { accepted, failed };

struct LineSearchResult {
  LineSearchStatus status = LineSearchStatus::failed;
  double lambda = 0.0;
  double f_new = 0.0;
  Point x_new;
  Point g_new;
  std::size_t trials = 0;
  bool sufficient_decrease = false;
  bool curvature = false;

  bool ok() const { return status == LineSearchStatus::accepted; }
  /// On failure: whether the carried trial at least satisfies sufficient decrease.
  bool has_fallback() const { return sufficient_decrease; }
};

/// Reference value for the sufficient-decrease test: f_x in monotone mode,
/// otherwise the max over the newest min(M0+1, history.size()) entries of `history`.
double reference_value(double f_x, std::span<const double> history, const LineSearchConfig& cfg);

/// Curvature multiplier applied to g_x^T d at step lambda:
/// sigma2 (monotone) or max{sigma2, 1 - (lambda ||d||)^p} (nonmonotone).
double curvature_factor(double lambda, double d_norm, const LineSearchConfig& cfg);

/// Finds lambda satisfying the Wolfe-type conditions along d by bracketing and
/// safeguarded interpolation. `history` holds recent objective values (newest
/// last) and is only read in nonmonotone mode. On failure the result carries
/// the lowest trial that passed sufficient decrease, if there was one.
LineSearchResult wolfe_search(const ObjectiveProblem& p, std::span<const double> x,
                              std::span<const double> d, double f_x,
                              std::span<const double> g_x, const LineSearchConfig& cfg,
                              std::span<const double> history = {});

}  // namespace qn
