#pragma once

#include <array>
#include <string>
#include <vector>

#include "qn/fibril.hpp"

namespace qn {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Published starting-point constants for one zipper: gradient, the
/// nonzero Hessian pattern (row-major 6x6) and the eigenvalues.
struct ZipperReference {
  std::array<double, 6> gradient;
  std::array<double, 36> hessian;
  std::array<double, 6> eigenvalues;
};

const ZipperReference& zipper_reference(ZipperId id);

/// Full verification suite: published-constant regressions, reported
/// solution feasibility, two-loop vs explicit product form, gradient gates
/// and both zipper solves.
std::vector<CheckResult> run_checks();

}  // namespace qn
