#include "imoc/sdpa_io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace imoc {

SdpaProblem to_sdpa(const ConicProgram& cp) {
  SdpaProblem p;
  p.n_vars = cp.n_vars();
  p.c.assign(p.n_vars, 0.0);
  for (const auto& t : cp.objective) p.c[t.var] += t.coeff;

  for (const auto& ms : cp.psd) p.block_struct.push_back(ms.side);
  const int diag_size =
      static_cast<int>(cp.nonneg.size()) + 2 * static_cast<int>(cp.equalities.size());
  const int diag_block = static_cast<int>(cp.psd.size()) + 1;
  if (diag_size > 0) p.block_struct.push_back(-diag_size);

  auto add = [&](int matno, int block, int r, int c, double v) {
    if (v == 0.0) return;
    p.entries.push_back({matno, block, r + 1, c + 1, v});
  };

  for (size_t bi = 0; bi < cp.psd.size(); ++bi) {
    const auto& ms = cp.psd[bi];
    const int blk = static_cast<int>(bi) + 1;
    for (int r = 0; r < ms.side; ++r)
      for (int c = r; c < ms.side; ++c) {
        const EntryForm& e = ms.at(r, c);
        add(0, blk, r, c, -e.constant);
        for (const auto& t : e.terms) add(t.var + 1, blk, r, c, t.coeff);
      }
  }

  int slot = 0;
  for (const auto& e : cp.nonneg) {
    add(0, diag_block, slot, slot, -e.constant);
    for (const auto& t : e.terms) add(t.var + 1, diag_block, slot, slot, t.coeff);
    ++slot;
  }
  for (const auto& row : cp.equalities) {
    // a'x >= rhs and -a'x >= -rhs
    add(0, diag_block, slot, slot, row.rhs);
    for (const auto& t : row.terms) add(t.var + 1, diag_block, slot, slot, t.coeff);
    ++slot;
    add(0, diag_block, slot, slot, -row.rhs);
    for (const auto& t : row.terms) add(t.var + 1, diag_block, slot, slot, -t.coeff);
    ++slot;
  }
  return p;
}

void write_sdpa(std::ostream& os, const SdpaProblem& p, const std::string& comment) {
  char buf[64];
  if (!comment.empty()) os << "\"" << comment << "\"\n";
  os << p.n_vars << " = mDIM\n";
  os << p.block_struct.size() << " = nBLOCK\n";
  for (size_t i = 0; i < p.block_struct.size(); ++i)
    os << p.block_struct[i] << (i + 1 < p.block_struct.size() ? " " : " = bLOCKsTRUCT\n");
  for (size_t i = 0; i < p.c.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", p.c[i]);
    os << buf << (i + 1 < p.c.size() ? " " : "");
  }
  os << "\n";
  for (const auto& e : p.entries) {
    std::snprintf(buf, sizeof buf, "%.17g", e.value);
    os << e.matno << " " << e.block << " " << e.row << " " << e.col << " " << buf << "\n";
  }
}

void export_sdpa(std::ostream& os, const ConicProgram& cp, const std::string& comment) {
  write_sdpa(os, to_sdpa(cp), comment);
}

SdpaProblem parse_sdpa(std::istream& is) {
  SdpaProblem p;
  std::string line;
  int stage = 0;  // 0: mDIM, 1: nBLOCK, 2: blockstruct, 3: c, 4: entries
  int nblock = 0;
  while (std::getline(is, line)) {
    std::string stripped = line;
    auto pos = stripped.find_first_not_of(" \t\r");
    if (pos == std::string::npos) continue;
    if (stripped[pos] == '"' || stripped[pos] == '*') continue;
    // the header lines may carry trailing annotations like "= mDIM"
    std::string numeric;
    for (char ch : stripped) {
      if ((ch >= '0' && ch <= '9') || ch == '+' || ch == '-' || ch == '.' || ch == 'e' ||
          ch == 'E' || ch == ' ' || ch == '\t' || ch == ',' || ch == '(' || ch == ')' ||
          ch == '{' || ch == '}')
        numeric.push_back(ch == ',' || ch == '(' || ch == ')' || ch == '{' || ch == '}'
                              ? ' '
                              : ch);
      else
        break;
    }
    std::istringstream ss(numeric);
    if (stage == 0) {
      if (!(ss >> p.n_vars)) throw std::runtime_error("sdpa: bad mDIM line");
      stage = 1;
    } else if (stage == 1) {
      if (!(ss >> nblock)) throw std::runtime_error("sdpa: bad nBLOCK line");
      stage = 2;
    } else if (stage == 2) {
      int v;
      while (ss >> v) p.block_struct.push_back(v);
      if (static_cast<int>(p.block_struct.size()) != nblock)
        throw std::runtime_error("sdpa: bad bLOCKsTRUCT line");
      stage = 3;
    } else if (stage == 3) {
      double v;
      while (ss >> v) p.c.push_back(v);
      if (static_cast<int>(p.c.size()) != p.n_vars)
        throw std::runtime_error("sdpa: bad objective line");
      stage = 4;
    } else {
      SdpaProblem::Entry e;
      if (!(ss >> e.matno >> e.block >> e.row >> e.col >> e.value))
        throw std::runtime_error("sdpa: bad entry line");
      p.entries.push_back(e);
    }
  }
  if (stage != 4) throw std::runtime_error("sdpa: truncated file");
  return p;
}

}  // namespace imoc
