#include "qn/anneal.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace qn {

namespace {

/// 53-bit uniform in [0,1); avoids the implementation-defined std distributions
/// so that a seed reproduces the same trajectory across standard libraries.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Point propose(const Point& x, double side, std::mt19937_64& rng) {
  Point y = x;
  for (double& v : y) v += side * (uniform01(rng) - 0.5);
  return y;
}

/// Objective value, or +inf when the proposal hits a singular configuration.
double try_value(const ObjectiveProblem& p, const Point& x) {
  try {
    const double f = p.value(x);
    return std::isfinite(f) ? f : std::numeric_limits<double>::infinity();
  } catch (const DomainError&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

void AnnealConfig::validate() const {
  if (!(cooling > 0.0 && cooling < 1.0)) throw DomainError("cooling factor must lie in (0,1)");
  if (!(perturb_scale > 0.0)) throw DomainError("perturb_scale must be positive");
  if (T0 > 0.0 && !(T_min <= T0)) throw DomainError("T_min must not exceed T0");
  if (!(T_min >= 0.0)) throw DomainError("T_min must be nonnegative");
  if (steps_per_T == 0) throw DomainError("steps_per_T must be positive");
  if (local_every == 0) throw DomainError("local_every must be positive");
}

bool metropolis_accept(double delta, double T, std::mt19937_64& rng) {
  if (delta <= 0.0) return true;
  if (!(T > 0.0) || !std::isfinite(delta)) return false;
  return uniform01(rng) < std::exp(-delta / T);
}

double calibrate_temperature(const ObjectiveProblem& p, const Point& x0, const AnnealConfig& cfg,
                             std::mt19937_64& rng) {
  std::vector<double> samples;
  samples.reserve(cfg.calibration_samples);
  for (std::size_t i = 0; i < cfg.calibration_samples; ++i) {
    const double f = try_value(p, propose(x0, cfg.perturb_scale, rng));
    if (std::isfinite(f)) samples.push_back(f);
  }
  if (samples.size() < 2) return 0.0;
  double mean = 0.0;
  for (double f : samples) mean += f;
  mean /= static_cast<double>(samples.size());
  double var = 0.0;
  for (double f : samples) var += (f - mean) * (f - mean);
  var /= static_cast<double>(samples.size() - 1);
  return std::sqrt(var);
}

AnnealResult anneal(const ObjectiveProblem& p, const Point& x0, const AnnealConfig& acfg,
                    const SolverConfig& scfg) {
  acfg.validate();
  if (x0.size() != p.dimension()) throw DimensionError("anneal: x0 length differs from dimension");
  if (!x0.all_finite()) throw DomainError("anneal: x0 must be finite");

  std::mt19937_64 rng(acfg.seed);
  AnnealResult out;
  out.T0 = acfg.T0 > 0.0 ? acfg.T0 : calibrate_temperature(p, x0, acfg, rng);

  Point x = x0;
  double fx = p.value(x);
  out.x_best = x;
  out.f_best = fx;

  std::size_t step_index = 0;
  auto refine = [&](const Point& from) {
    ++out.local_solves;
    try {
      return solve(p, from, scfg);
    } catch (const Error& e) {
      throw SolverError(step_index, std::string("annealing refinement: ") + e.what());
    }
  };
  auto note_best = [&](const Point& y, double fy) {
    if (fy < out.f_best) {
      out.f_best = fy;
      out.x_best = y;
    }
  };

  std::size_t accepted_count = 0;
  for (double T = out.T0; T > acfg.T_min; T *= acfg.cooling) {
    for (std::size_t s = 0; s < acfg.steps_per_T; ++s, ++step_index) {
      AnnealStep rec;
      rec.T = T;
      Point y = propose(x, acfg.perturb_scale, rng);
      const double fy = try_value(p, y);
      const double delta = fy - fx;
      rec.uphill = delta > 0.0;
      if (metropolis_accept(delta, T, rng)) {
        rec.accepted = true;
        x = std::move(y);
        fx = fy;
        note_best(x, fx);
        if (++accepted_count % acfg.local_every == 0) {
          SolveResult r = refine(x);
          rec.refined = true;
          if (r.f < fx) {
            x = std::move(r.x);
            fx = r.f;
            note_best(x, fx);
          }
        }
      }
      rec.f_current = fx;
      rec.f_best = out.f_best;
      out.trace.push_back(rec);
    }
  }

  out.x_last = x;
  out.f_last = fx;
  SolveResult final_refine = refine(out.x_best);
  if (final_refine.f <= out.f_best) {
    out.f_best = final_refine.f;
    out.x_best = std::move(final_refine.x);
  }
  return out;
}

}  // namespace qn
