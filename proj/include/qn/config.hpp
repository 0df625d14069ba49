#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "qn/anneal.hpp"
#include "qn/solver.hpp"

namespace qn {

/// Settings read from a `key = value` file. Keys mirror the SolverConfig,
/// LineSearchConfig and AnnealConfig field names; `eps` sets the MDGP
/// perturbation and `use_sa` enables annealing before the final solve.
struct RunConfig {
  SolverConfig solver;
  AnnealConfig anneal;
  bool use_sa = false;
  std::optional<double> eps;
};

/// Blank lines and `#` comments are ignored. Unknown keys and malformed
/// values raise ParseError with the offending line number.
RunConfig parse_config(std::istream& in, RunConfig base = {});
RunConfig read_config_file(const std::string& path, RunConfig base = {});

}  // namespace qn
