#pragma once

#include <istream>
#include <string>

#include "imoc/model.hpp"

namespace imoc {

/// A problem description loaded from a structured text file.
struct NamedProblem {
  std::string name;
  ImpulsiveOCP ocp;
};

/// Parses the line-oriented problem format:
///
///   # comment
///   name <identifier>
///   states <n>                  controls <m>          horizon <T>
///   range <i> <lo> <hi>         declared scaling range of state i (1-based)
///   f  <i> <coeff> <e_t> <e_x1> ... <e_xn>   adds a term to state i's dynamics
///   G  <i> <c> <coeff> <e_t> 0...            control matrix entry (t only)
///   h  <coeff> <exponents...>                running cost term
///   H  <c> <coeff> <e_t> 0...                control cost term (t only)
///   hT <coeff> <exponents...>                terminal cost term
///   X  <k> <coeff> <exponents...>            state-set inequality k, a_k >= 0
///   initial  dirac <x1...xn> | box <lo...> <hi...> | free
///   terminal dirac <x1...xn> | box <lo...> <hi...> | free
///   X0 <k> <coeff> <exponents...>            initial-set inequality (free boundary)
///   XT <k> <coeff> <exponents...>            terminal-set inequality
///   tv_bound <value>
///   tv_cost on|off
///   control_mode signed|discrete
///   control_value <u_1> ... <u_m>            one admissible row of U (discrete)
///   free_final_time on|off                   horizon then reads as T_max
///
/// Numbers may be decimal or rational (p/q). Unknown keys are rejected.
/// Throws std::runtime_error with a line reference on malformed input.
NamedProblem parse_problem(std::istream& in);
NamedProblem load_problem(const std::string& path);

}  // namespace imoc
