#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "imoc/relax.hpp"

namespace imoc {

/// SDPA sparse problem: min c'x s.t. sum_i x_i F_i - F_0 in the PSD cone with
/// the given block structure (negative sizes denote diagonal blocks).
struct SdpaProblem {
  struct Entry {
    int matno;  // 0 for F_0, 1..n for F_i
    int block;  // 1-based
    int row, col;  // 1-based, row <= col
    double value;
  };
  int n_vars = 0;
  std::vector<int> block_struct;
  std::vector<double> c;
  std::vector<Entry> entries;
};

/// Renders the conic program in SDPA sparse form: the PSD blocks first, then
/// one diagonal block carrying the scalar cone entries and the equality rows
/// as +/- pairs. Values print with enough digits to round-trip exactly.
SdpaProblem to_sdpa(const ConicProgram& cp);

void write_sdpa(std::ostream& os, const SdpaProblem& p, const std::string& comment = {});

void export_sdpa(std::ostream& os, const ConicProgram& cp, const std::string& comment = {});

SdpaProblem parse_sdpa(std::istream& is);

}  // namespace imoc
