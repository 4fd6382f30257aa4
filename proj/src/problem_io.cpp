#include "imoc/problem_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace imoc {

namespace {

[[noreturn]] void fail(int line, const std::string& msg) {
  throw std::runtime_error("problem file, line " + std::to_string(line) + ": " + msg);
}

/// Decimal or rational (p/q) literal.
double parse_number(const std::string& tok, int line) {
  try {
    size_t pos = 0;
    auto slash = tok.find('/');
    if (slash != std::string::npos) {
      double num = std::stod(tok.substr(0, slash), &pos);
      if (pos != slash) fail(line, "malformed rational '" + tok + "'");
      double den = std::stod(tok.substr(slash + 1), &pos);
      if (pos != tok.size() - slash - 1) fail(line, "malformed rational '" + tok + "'");
      if (den == 0.0) fail(line, "zero denominator in '" + tok + "'");
      return num / den;
    }
    double v = std::stod(tok, &pos);
    if (pos != tok.size()) fail(line, "malformed number '" + tok + "'");
    return v;
  } catch (const std::invalid_argument&) {
    fail(line, "malformed number '" + tok + "'");
  } catch (const std::out_of_range&) {
    fail(line, "number out of range '" + tok + "'");
  }
}

int parse_int(const std::string& tok, int line) {
  double v = parse_number(tok, line);
  int i = static_cast<int>(v);
  if (static_cast<double>(i) != v) fail(line, "expected an integer, got '" + tok + "'");
  return i;
}

struct Parser {
  NamedProblem np;
  bool dims_known = false;
  int line = 0;

  ImpulsiveOCP& ocp() { return np.ocp; }

  void need_dims() {
    if (!dims_known) fail(line, "states/controls must be declared first");
  }

  /// coeff followed by one exponent per variable (t, x_1..x_n).
  void add_poly_term(Polynomial& p, const std::vector<std::string>& toks, size_t from) {
    need_dims();
    const int nv = ocp().n_vars();
    if (static_cast<int>(toks.size() - from) != nv + 1)
      fail(line, "expected a coefficient and " + std::to_string(nv) + " exponents");
    double coeff = parse_number(toks[from], line);
    MultiIndex k = MultiIndex::zero(nv);
    for (int i = 0; i < nv; ++i) {
      k.exponents[i] = parse_int(toks[from + 1 + i], line);
      if (k.exponents[i] < 0) fail(line, "negative exponent");
    }
    p.add_term(k, coeff);
  }

  void set_inequality(std::vector<Polynomial>& set, int k, const std::vector<std::string>& toks,
                      size_t from) {
    need_dims();
    if (k < 1) fail(line, "inequality index must be positive");
    while (static_cast<int>(set.size()) < k) set.emplace_back(ocp().n_vars());
    add_poly_term(set[k - 1], toks, from);
  }

  void parse_boundary(BoundaryCondition& bc, const std::vector<std::string>& toks) {
    need_dims();
    const int n = ocp().n_states;
    if (toks.size() < 2) fail(line, "boundary needs a kind: dirac | box | free");
    const std::string& kind = toks[1];
    if (kind == "dirac") {
      if (static_cast<int>(toks.size()) != 2 + n) fail(line, "dirac needs the state vector");
      bc.kind = BoundaryCondition::Kind::Dirac;
      bc.point.clear();
      for (int i = 0; i < n; ++i) bc.point.push_back(parse_number(toks[2 + i], line));
    } else if (kind == "box") {
      if (static_cast<int>(toks.size()) != 2 + 2 * n) fail(line, "box needs lo and hi vectors");
      bc.kind = BoundaryCondition::Kind::UniformBox;
      bc.lo.clear();
      bc.hi.clear();
      for (int i = 0; i < n; ++i) bc.lo.push_back(parse_number(toks[2 + i], line));
      for (int i = 0; i < n; ++i) bc.hi.push_back(parse_number(toks[2 + n + i], line));
    } else if (kind == "free") {
      if (toks.size() != 2) fail(line, "free takes no arguments");
      bc.kind = BoundaryCondition::Kind::Free;
      bc.set.n_vars = ocp().n_vars();
    } else {
      fail(line, "unknown boundary kind '" + kind + "'");
    }
  }

  bool parse_switch(const std::string& tok) {
    if (tok == "on") return true;
    if (tok == "off") return false;
    fail(line, "expected on|off, got '" + tok + "'");
  }

  void handle(const std::vector<std::string>& t) {
    const std::string& key = t[0];
    auto arity = [&](size_t k) {
      if (t.size() != k + 1)
        fail(line, "'" + key + "' takes " + std::to_string(k) + " arguments");
    };
    if (key == "name") {
      arity(1);
      np.name = t[1];
    } else if (key == "states") {
      arity(1);
      if (dims_known && ocp().m_controls > 0) fail(line, "dimensions already fixed");
      ocp().n_states = parse_int(t[1], line);
      if (ocp().n_states < 1) fail(line, "states must be positive");
      finish_dims();
    } else if (key == "controls") {
      arity(1);
      ocp().m_controls = parse_int(t[1], line);
      if (ocp().m_controls < 1) fail(line, "controls must be positive");
      finish_dims();
    } else if (key == "horizon") {
      arity(1);
      ocp().horizon = parse_number(t[1], line);
    } else if (key == "state_name") {
      arity(2);
      need_dims();
      int i = parse_int(t[1], line);
      if (i < 1 || i > ocp().n_states) fail(line, "state index out of range");
      ocp().state_names[i - 1] = t[2];
    } else if (key == "range") {
      arity(3);
      need_dims();
      int i = parse_int(t[1], line);
      if (i < 1 || i > ocp().n_states) fail(line, "state index out of range");
      ocp().state_lo[i - 1] = parse_number(t[2], line);
      ocp().state_hi[i - 1] = parse_number(t[3], line);
    } else if (key == "f") {
      need_dims();
      if (t.size() < 2) fail(line, "'f' needs a state index");
      int i = parse_int(t[1], line);
      if (i < 1 || i > ocp().n_states) fail(line, "state index out of range");
      add_poly_term(ocp().dynamics[i - 1], t, 2);
    } else if (key == "G") {
      need_dims();
      if (t.size() < 3) fail(line, "'G' needs state and control indices");
      int i = parse_int(t[1], line);
      int c = parse_int(t[2], line);
      if (i < 1 || i > ocp().n_states) fail(line, "state index out of range");
      if (c < 1 || c > ocp().m_controls) fail(line, "control index out of range");
      add_poly_term(ocp().control_matrix[i - 1][c - 1], t, 3);
    } else if (key == "h") {
      add_poly_term(ocp().running_cost, t, 1);
    } else if (key == "H") {
      need_dims();
      if (t.size() < 2) fail(line, "'H' needs a control index");
      int c = parse_int(t[1], line);
      if (c < 1 || c > ocp().m_controls) fail(line, "control index out of range");
      add_poly_term(ocp().control_cost[c - 1], t, 2);
    } else if (key == "hT") {
      add_poly_term(ocp().terminal_cost, t, 1);
    } else if (key == "X") {
      if (t.size() < 2) fail(line, "'X' needs an inequality index");
      set_inequality(ocp().state_set.inequalities, parse_int(t[1], line), t, 2);
    } else if (key == "X0") {
      if (t.size() < 2) fail(line, "'X0' needs an inequality index");
      set_inequality(ocp().initial_set.inequalities, parse_int(t[1], line), t, 2);
    } else if (key == "XT") {
      if (t.size() < 2) fail(line, "'XT' needs an inequality index");
      set_inequality(ocp().terminal_set.inequalities, parse_int(t[1], line), t, 2);
    } else if (key == "initial") {
      parse_boundary(ocp().initial, t);
    } else if (key == "terminal") {
      parse_boundary(ocp().terminal, t);
    } else if (key == "tv_bound") {
      arity(1);
      ocp().tv_bound = parse_number(t[1], line);
    } else if (key == "tv_cost") {
      arity(1);
      ocp().tv_cost = parse_switch(t[1]);
    } else if (key == "control_mode") {
      arity(1);
      if (t[1] == "signed")
        ocp().control_mode = ControlMode::SignedMeasure;
      else if (t[1] == "discrete")
        ocp().control_mode = ControlMode::DiscreteSet;
      else
        fail(line, "control_mode must be signed|discrete");
    } else if (key == "control_value") {
      need_dims();
      if (static_cast<int>(t.size()) != 1 + ocp().m_controls)
        fail(line, "'control_value' needs one value per control channel");
      std::vector<double> row;
      for (int c = 0; c < ocp().m_controls; ++c) row.push_back(parse_number(t[1 + c], line));
      ocp().control_values.push_back(std::move(row));
    } else if (key == "free_final_time") {
      arity(1);
      ocp().free_final_time = parse_switch(t[1]);
    } else {
      fail(line, "unknown key '" + key + "'");
    }
  }

  void finish_dims() {
    if (dims_known || ocp().n_states < 1 || ocp().m_controls < 1) return;
    dims_known = true;
    const int nv = ocp().n_vars();
    ocp().dynamics.assign(ocp().n_states, Polynomial(nv));
    ocp().control_matrix.assign(ocp().n_states,
                                std::vector<Polynomial>(ocp().m_controls, Polynomial(nv)));
    ocp().running_cost = Polynomial(nv);
    ocp().control_cost.assign(ocp().m_controls, Polynomial(nv));
    ocp().terminal_cost = Polynomial(nv);
    ocp().state_set.n_vars = nv;
    ocp().initial_set.n_vars = nv;
    ocp().terminal_set.n_vars = nv;
    ocp().state_lo.assign(ocp().n_states, -1.0);
    ocp().state_hi.assign(ocp().n_states, 1.0);
    ocp().state_names.assign(ocp().n_states, "");
  }
};

}  // namespace

NamedProblem parse_problem(std::istream& in) {
  Parser p;
  std::string raw;
  while (std::getline(in, raw)) {
    ++p.line;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::vector<std::string> toks;
    std::string tok;
    while (ls >> tok) toks.push_back(tok);
    if (toks.empty()) continue;
    p.handle(toks);
  }
  if (!p.dims_known) throw std::runtime_error("problem file: missing states/controls");
  auto diags = validate(p.np.ocp);
  if (has_errors(diags)) {
    std::string msg = "problem file: invalid problem:";
    for (const auto& d : diags)
      if (d.severity == Diagnostic::Severity::Error) msg += " [" + d.message + "]";
    throw std::runtime_error(msg);
  }
  return p.np;
}

NamedProblem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open problem file '" + path + "'");
  return parse_problem(in);
}

}  // namespace imoc
