#include "qn/line_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qn {

void LineSearchConfig::validate() const {
  if (!(0.0 < sigma1 && sigma1 < sigma2 && sigma2 < 1.0))
    throw DomainError("line search requires 0 < sigma1 < sigma2 < 1");
  if (!(p < 1.0)) throw DomainError("nonmonotone exponent p must be < 1");
  if (max_trials == 0) throw DomainError("max_trials must be positive");
  if (!(lambda_max > 0.0)) throw DomainError("lambda_max must be positive");
  if (!(initial_step > 0.0)) throw DomainError("initial_step must be positive");
}

double reference_value(double f_x, std::span<const double> history, const LineSearchConfig& cfg) {
  if (cfg.mode == LineSearchMode::monotone) return f_x;
  const std::size_t window = std::min(cfg.M0 + 1, history.size());
  double ref = f_x;
  for (std::size_t i = history.size() - window; i < history.size(); ++i)
    ref = std::max(ref, history[i]);
  return ref;
}

double curvature_factor(double lambda, double d_norm, const LineSearchConfig& cfg) {
  if (cfg.mode == LineSearchMode::monotone) return cfg.sigma2;
  const double relaxed = 1.0 - std::pow(lambda * d_norm, cfg.p);
  // pow may overflow to +inf for very negative p; max() then keeps sigma2.
  return std::isnan(relaxed) ? cfg.sigma2 : std::max(cfg.sigma2, relaxed);
}

namespace {

/// Minimizer of the cubic (or quadratic) interpolant on [lo, hi], safeguarded
/// to the interior [lo + 0.1 w, lo + 0.9 w].
double interpolate(double lo, double f_lo, double dg_lo, double hi, double f_hi, double dg_hi) {
  const double w = hi - lo;
  const double lower = lo + 0.1 * w;
  const double upper = lo + 0.9 * w;
  double t = std::numeric_limits<double>::quiet_NaN();

  if (std::isfinite(f_hi) && std::isfinite(dg_hi)) {
    const double d1 = dg_lo + dg_hi - 3.0 * (f_lo - f_hi) / (lo - hi);
    const double disc = d1 * d1 - dg_lo * dg_hi;
    if (disc >= 0.0) {
      const double d2 = std::sqrt(disc);
      const double denom = dg_hi - dg_lo + 2.0 * d2;
      if (denom != 0.0) t = hi - w * (dg_hi + d2 - d1) / denom;
    }
  }
  if (!std::isfinite(t) && std::isfinite(f_hi)) {
    const double curv = f_hi - f_lo - dg_lo * w;
    if (curv > 0.0) t = lo - dg_lo * w * w / (2.0 * curv);
  }
  if (!std::isfinite(t)) return lower;
  return std::clamp(t, lower, upper);
}

}  // namespace

LineSearchResult wolfe_search(const ObjectiveProblem& p, std::span<const double> x,
                              std::span<const double> d, double f_x,
                              std::span<const double> g_x, const LineSearchConfig& cfg,
                              std::span<const double> history) {
  cfg.validate();
  const std::size_t n = p.dimension();
  if (x.size() != n || d.size() != n || g_x.size() != n)
    throw DimensionError("line search vectors must match the problem dimension");
  const double dg0 = dot(g_x, d);
  if (!(dg0 < 0.0)) throw ContractViolation("line search direction is not a descent direction");
  if (cfg.mode == LineSearchMode::nonmonotone && history.empty())
    throw ContractViolation("nonmonotone line search needs objective history");

  const double f_ref = reference_value(f_x, history, cfg);
  const double d_norm = norm2(d);

  Point xt(n);
  Point gt(n);
  LineSearchResult best;  // lowest trial with sufficient decrease
  LineSearchResult last;

  double lo = 0.0;
  double f_lo = f_x;
  double dg_lo = dg0;
  bool bracketed = false;
  double hi = 0.0;
  double f_hi = 0.0;
  double dg_hi = 0.0;

  double lambda = std::min(cfg.initial_step, cfg.lambda_max);
  for (std::size_t trial = 1; trial <= cfg.max_trials; ++trial) {
    for (std::size_t i = 0; i < n; ++i) xt[i] = x[i] + lambda * d[i];
    const double ft = p.evaluate(xt.span(), gt.span());
    const double dg = dot(gt, d);

    const bool decrease = std::isfinite(ft) && ft <= f_ref + cfg.sigma1 * lambda * dg0;
    const bool curvature = dg >= curvature_factor(lambda, d_norm, cfg) * dg0;

    last.lambda = lambda;
    last.f_new = ft;
    last.trials = trial;
    last.sufficient_decrease = decrease;
    last.curvature = curvature;

    if (decrease && curvature) {
      LineSearchResult r;
      r.status = LineSearchStatus::accepted;
      r.lambda = lambda;
      r.f_new = ft;
      r.x_new = xt;
      r.g_new = gt;
      r.trials = trial;
      r.sufficient_decrease = true;
      r.curvature = true;
      return r;
    }

    if (!decrease) {
      bracketed = true;
      hi = lambda;
      f_hi = ft;
      dg_hi = dg;
    } else {
      if (!best.sufficient_decrease || ft < best.f_new) {
        best.lambda = lambda;
        best.f_new = ft;
        best.x_new = xt;
        best.g_new = gt;
        best.sufficient_decrease = true;
      }
      lo = lambda;
      f_lo = ft;
      dg_lo = dg;
    }

    if (!bracketed) {
      if (lambda >= cfg.lambda_max) break;
      lambda = std::min(2.0 * lambda, cfg.lambda_max);
    } else {
      if (hi - lo <= std::numeric_limits<double>::epsilon() * std::max(1.0, hi)) break;
      lambda = interpolate(lo, f_lo, dg_lo, hi, f_hi, dg_hi);
    }
  }

  if (best.sufficient_decrease) {
    best.status = LineSearchStatus::failed;
    best.trials = last.trials;
    best.curvature = false;
    return best;
  }
  last.status = LineSearchStatus::failed;
  last.x_new = xt;
  last.g_new = gt;
  return last;
}

}  // namespace qn
