#include "qn/config.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <map>

#include "qn/errors.hpp"

namespace qn {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v) {
  if (v == "inf") return std::numeric_limits<double>::infinity();
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) throw DomainError("not a number: " + v);
  return out;
}

std::uint64_t to_unsigned(const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw DomainError("not a non-negative integer: " + v);
  return out;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw DomainError("not a boolean: " + v);
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"m1", [](RunConfig& c, const std::string& v) { c.solver.m1 = to_unsigned(v); }},
      {"grad_tol", [](RunConfig& c, const std::string& v) { c.solver.grad_tol = to_double(v); }},
      {"grad_tol_relative",
       [](RunConfig& c, const std::string& v) { c.solver.grad_tol_relative = to_bool(v); }},
      {"max_iters", [](RunConfig& c, const std::string& v) { c.solver.max_iters = to_unsigned(v); }},
      {"gamma_max", [](RunConfig& c, const std::string& v) { c.solver.gamma_max = to_double(v); }},
      {"curvature_floor",
       [](RunConfig& c, const std::string& v) { c.solver.curvature_floor = to_double(v); }},
      {"max_ls_failures",
       [](RunConfig& c, const std::string& v) { c.solver.max_ls_failures = to_unsigned(v); }},
      {"h0_mode",
       [](RunConfig& c, const std::string& v) {
         if (v == "scaled_identity") c.solver.h0_mode = H0Mode::scaled_identity;
         else if (v == "fixed_identity") c.solver.h0_mode = H0Mode::fixed_identity;
         else throw DomainError("h0_mode must be scaled_identity or fixed_identity");
       }},
      {"update",
       [](RunConfig& c, const std::string& v) {
         if (v == "modified") c.solver.update = SecantUpdate::modified;
         else if (v == "plain") c.solver.update = SecantUpdate::plain;
         else throw DomainError("update must be modified or plain");
       }},
      {"sigma1", [](RunConfig& c, const std::string& v) { c.solver.line_search.sigma1 = to_double(v); }},
      {"sigma2", [](RunConfig& c, const std::string& v) { c.solver.line_search.sigma2 = to_double(v); }},
      {"mode",
       [](RunConfig& c, const std::string& v) {
         if (v == "monotone") c.solver.line_search.mode = LineSearchMode::monotone;
         else if (v == "nonmonotone") c.solver.line_search.mode = LineSearchMode::nonmonotone;
         else throw DomainError("mode must be monotone or nonmonotone");
       }},
      {"M0", [](RunConfig& c, const std::string& v) { c.solver.line_search.M0 = to_unsigned(v); }},
      {"p", [](RunConfig& c, const std::string& v) { c.solver.line_search.p = to_double(v); }},
      {"max_trials",
       [](RunConfig& c, const std::string& v) { c.solver.line_search.max_trials = to_unsigned(v); }},
      {"lambda_max",
       [](RunConfig& c, const std::string& v) { c.solver.line_search.lambda_max = to_double(v); }},
      {"initial_step",
       [](RunConfig& c, const std::string& v) { c.solver.line_search.initial_step = to_double(v); }},
      {"T0", [](RunConfig& c, const std::string& v) { c.anneal.T0 = to_double(v); }},
      {"cooling", [](RunConfig& c, const std::string& v) { c.anneal.cooling = to_double(v); }},
      {"steps_per_T", [](RunConfig& c, const std::string& v) { c.anneal.steps_per_T = to_unsigned(v); }},
      {"perturb_scale", [](RunConfig& c, const std::string& v) { c.anneal.perturb_scale = to_double(v); }},
      {"T_min", [](RunConfig& c, const std::string& v) { c.anneal.T_min = to_double(v); }},
      {"seed", [](RunConfig& c, const std::string& v) { c.anneal.seed = to_unsigned(v); }},
      {"local_every", [](RunConfig& c, const std::string& v) { c.anneal.local_every = to_unsigned(v); }},
      {"calibration_samples",
       [](RunConfig& c, const std::string& v) { c.anneal.calibration_samples = to_unsigned(v); }},
      {"use_sa", [](RunConfig& c, const std::string& v) { c.use_sa = to_bool(v); }},
      {"eps", [](RunConfig& c, const std::string& v) { c.eps = to_double(v); }},
  };
  return table;
}

}  // namespace

RunConfig parse_config(std::istream& in, RunConfig base) {
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (value.empty()) throw ParseError(line_no, "missing value for '" + key + "'");
    const auto it = setters().find(key);
    if (it == setters().end()) throw ParseError(line_no, "unknown key '" + key + "'");
    try {
      it->second(base, value);
    } catch (const DomainError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  try {
    base.solver.validate();
    base.anneal.validate();
  } catch (const Error& e) {
    throw ParseError(line_no, e.what());
  }
  return base;
}

RunConfig read_config_file(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  return parse_config(in, std::move(base));
}

}  // namespace qn
