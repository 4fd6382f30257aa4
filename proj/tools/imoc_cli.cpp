// Command-line driver: load problem files, run the moment-SDP hierarchy,
// extract and validate impulse plans, export SDPA artifacts, and solve the
// direct rendezvous LP.
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "imoc/extract.hpp"
#include "imoc/hierarchy.hpp"
#include "imoc/problem_io.hpp"
#include "imoc/sdpa_io.hpp"
#include "imoc/validate.hpp"

using json = nlohmann::ordered_json;
using namespace imoc;

namespace {

constexpr const char* kVersion = "1.0.0";

/// Human renderings use 6 significant digits; machine renderings keep full
/// precision.
std::string human(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

json provenance(const std::string& cmd) {
  json j;
  j["tool"] = "imoc";
  j["version"] = kVersion;
  j["command"] = cmd;
  return j;
}

json order_record(const RelaxationResult& r) {
  json j;
  j["order"] = r.order;
  j["status"] = to_string(r.status);
  j["bound"] = r.bound;
  j["iterations"] = r.iterations;
  j["solve_seconds"] = r.solve_seconds;
  j["residual_primal"] = r.residual_primal;
  j["residual_dual"] = r.residual_dual;
  j["residual_gap"] = r.residual_gap;
  return j;
}

json plan_record(const ImpulsePlan& plan) {
  json j;
  j["non_atomic"] = plan.non_atomic;
  j["channels"] = json::array();
  for (const auto& ch : plan.channels) {
    json c = json::array();
    for (const auto& im : ch) c.push_back({{"time", im.time}, {"amplitude", im.amplitude}});
    j["channels"].push_back(std::move(c));
  }
  j["notes"] = plan.notes;
  return j;
}

void print_plan(const ImpulsePlan& plan) {
  for (size_t c = 0; c < plan.channels.size(); ++c) {
    if (plan.channels[c].empty()) {
      std::printf("  channel %zu: no impulses\n", c + 1);
      continue;
    }
    for (const auto& im : plan.channels[c])
      std::printf("  channel %zu: t = %s, amplitude = %s\n", c + 1, human(im.time).c_str(),
                  human(im.amplitude).c_str());
  }
  for (const auto& n : plan.notes) std::printf("  note: %s\n", n.c_str());
}

void write_json(const std::string& path, const json& j) {
  if (path.empty()) return;
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write '" + path + "'");
  os << j.dump(2) << "\n";
}

ImpulsePlan load_plan(const std::string& path, int m_controls) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open plan file '" + path + "'");
  ImpulsePlan plan;
  plan.channels.resize(m_controls);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::string key;
    if (!(ls >> key)) continue;
    int channel;
    double time, amplitude;
    if (key != "impulse" || !(ls >> channel >> time >> amplitude))
      throw std::runtime_error("plan file line " + std::to_string(line) +
                               ": expected 'impulse <channel> <time> <amplitude>'");
    if (channel < 1 || channel > m_controls)
      throw std::runtime_error("plan file line " + std::to_string(line) +
                               ": channel out of range");
    plan.channels[channel - 1].push_back({time, amplitude});
  }
  return plan;
}

struct Loaded {
  NamedProblem np;
  ImpulsiveOCP scaled;
  ScalingMap map;
};

Loaded load(const std::string& file) {
  Loaded l;
  l.np = load_problem(file);
  auto [scaled, map] = scale(l.np.ocp);
  l.scaled = std::move(scaled);
  l.map = std::move(map);
  return l;
}

int cmd_relax(const std::string& file, int d_min, int d_max, double tol,
              const std::string& json_out) {
  auto l = load(file);
  HierarchyOptions opts;
  opts.solver.tol_feas = tol;
  opts.solver.tol_gap = tol;
  json report = provenance("relax");
  report["problem"] = l.np.name;
  report["orders"] = json::array();
  std::printf("problem %s\n", l.np.name.c_str());
  std::printf("%5s  %-12s  %-12s  %5s  %9s\n", "order", "status", "bound", "iters", "seconds");
  for (int d = d_min; d <= d_max; ++d) {
    auto r = solve_order(l.scaled, d, opts);
    std::printf("%5d  %-12s  %-12s  %5d  %9s\n", d, to_string(r.status).c_str(),
                human(r.bound).c_str(), r.iterations, human(r.solve_seconds).c_str());
    std::fflush(stdout);
    report["orders"].push_back(order_record(r));
  }
  write_json(json_out, report);
  return 0;
}

int cmd_extract(const std::string& file, int d, double tol, const std::string& json_out) {
  auto l = load(file);
  HierarchyOptions opts;
  opts.solver.tol_feas = tol;
  opts.solver.tol_gap = tol;
  auto mp = build(l.scaled, d, opts.transcribe);
  auto cp = assemble(mp, d);
  auto r = solve_program(mp, cp, opts.solver);
  std::printf("problem %s, order %d: status %s, bound %s\n", l.np.name.c_str(), d,
              to_string(r.status).c_str(), human(r.bound).c_str());
  json report = provenance("extract");
  report["problem"] = l.np.name;
  report["relaxation"] = order_record(r);
  if (r.status == RelaxStatus::PrimalInfeasible || r.status == RelaxStatus::DualInfeasible) {
    std::printf("no extraction: relaxation is %s\n", to_string(r.status).c_str());
    write_json(json_out, report);
    return 0;
  }
  auto plan = identify_controls(r, mp, l.scaled, l.map, {});
  if (plan.non_atomic)
    std::printf("warning: control measures are not atomic at this order\n");
  print_plan(plan);
  report["plan"] = plan_record(plan);
  write_json(json_out, report);
  return 0;
}

int cmd_certify(const std::string& file, int d, const std::string& plan_file, int steps,
                double epsilon, const std::string& json_out) {
  auto l = load(file);
  auto mp = build(l.scaled, d, {});
  auto cp = assemble(mp, d);
  auto r = solve_program(mp, cp, {});
  ImpulsePlan plan;
  if (!plan_file.empty()) {
    plan = load_plan(plan_file, l.np.ocp.m_controls);
  } else {
    plan = identify_controls(r, mp, l.scaled, l.map, {});
    if (plan.non_atomic) {
      std::printf("cannot certify: extracted control measures are not atomic\n");
      return 0;
    }
  }
  auto traj = simulate(l.np.ocp, plan, steps);
  std::printf("problem %s, order %d: bound %s, simulated cost %s\n", l.np.name.c_str(), d,
              human(r.bound).c_str(), human(traj.cost).c_str());
  json report = provenance("certify");
  report["problem"] = l.np.name;
  report["relaxation"] = order_record(r);
  report["plan"] = plan_record(plan);
  report["simulated_cost"] = traj.cost;
  report["max_violation"] = traj.max_violation;
  if (traj.violated) {
    std::printf("plan is infeasible: state-set violation %s\n",
                human(traj.max_violation).c_str());
    write_json(json_out, report);
    return 2;
  }
  auto gap = certify(r, traj, epsilon);
  std::printf("gap = %s (%s)\n", human(gap.gap).c_str(), gap.verdict.c_str());
  report["gap"] = gap.gap;
  report["relative_gap"] = gap.relative_gap;
  report["verdict"] = gap.verdict;
  write_json(json_out, report);
  return 0;
}

int cmd_export(const std::string& file, int d, const std::string& out) {
  auto l = load(file);
  auto mp = build(l.scaled, d, {});
  auto cp = assemble(mp, d);
  std::ofstream os(out);
  if (!os) throw std::runtime_error("cannot write '" + out + "'");
  export_sdpa(os, cp, l.np.name + " order " + std::to_string(d));
  std::printf("wrote %s (%d variables, %zu blocks)\n", out.c_str(), cp.n_vars(),
              cp.psd.size() + 1);
  return 0;
}

int cmd_rdv(int case_id, int grid, const std::string& traj_csv, const std::string& json_out) {
  HcwModel model;
  model.x0 << 1, 0, 0, 0;
  if (case_id == 1)
    model.xf << 0, 0, 0, 0;
  else if (case_id == 3)
    model.xf << 0, 0, 0, 0.427;
  else
    throw std::runtime_error("rdv: only cases 1 and 3 are available");
  auto lp = solve_rendezvous_lp(model, grid);
  json report = provenance("rdv");
  report["case"] = case_id;
  report["grid"] = grid;
  report["feasible"] = lp.feasible;
  if (!lp.feasible) {
    std::printf("case %d: LP infeasible on a %d-point grid\n", case_id, grid);
    write_json(json_out, report);
    return 0;
  }
  std::printf("case %d: V_LP = %s with %zu impulses (N = %d)\n", case_id,
              human(lp.cost).c_str(), lp.impulses.size(), grid);
  report["cost"] = lp.cost;
  report["impulses"] = json::array();
  for (const auto& [theta, u] : lp.impulses) {
    std::printf("  theta = %s: u = [%s, %s]\n", human(theta).c_str(), human(u[0]).c_str(),
                human(u[1]).c_str());
    report["impulses"].push_back({{"theta", theta}, {"u", {u[0], u[1]}}});
  }
  write_json(json_out, report);
  if (!traj_csv.empty()) {
    std::ofstream os(traj_csv);
    if (!os) throw std::runtime_error("cannot write '" + traj_csv + "'");
    os << "theta,z1,z2,z3,z4\n";
    const int samples = 1000;
    for (int k = 0; k <= samples; ++k) {
      double theta = model.theta_f * k / samples;
      Eigen::Vector4d x = hcw_transition(model, theta, 0.0) * model.x0;
      for (const auto& [ti, u] : lp.impulses)
        if (ti <= theta + 1e-12) x += hcw_transition(model, theta, ti) * model.B * u;
      os << theta << "," << x[0] << "," << x[1] << "," << x[2] << "," << x[3] << "\n";
    }
    std::printf("wrote trajectory samples to %s\n", traj_csv.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified bounds and impulse extraction for impulsive optimal control"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string file, json_out, plan_file, out;
  int order = 1, order_max = -1, steps = 1000, grid = 50, case_id = 1;
  double tol = 1e-8, epsilon = 1e-4;

  auto* relax_cmd = app.add_subcommand("relax", "solve the hierarchy over a range of orders");
  relax_cmd->add_option("file", file, "problem file")->required();
  relax_cmd->add_option("--order", order, "first relaxation order");
  relax_cmd->add_option("--order-max", order_max, "last relaxation order (default: --order)");
  relax_cmd->add_option("--tol", tol, "solver feasibility/gap tolerance");
  relax_cmd->add_option("--json", json_out, "write the machine-readable report here");

  auto* extract_cmd = app.add_subcommand("extract", "solve one order and extract impulses");
  extract_cmd->add_option("file", file, "problem file")->required();
  extract_cmd->add_option("--order", order, "relaxation order")->required();
  extract_cmd->add_option("--tol", tol, "solver feasibility/gap tolerance");
  extract_cmd->add_option("--json", json_out, "write the machine-readable report here");

  auto* certify_cmd = app.add_subcommand("certify", "simulate a plan against the bound");
  certify_cmd->add_option("file", file, "problem file")->required();
  certify_cmd->add_option("--order", order, "relaxation order")->required();
  certify_cmd->add_option("--plan", plan_file, "plan file (default: extract at --order)");
  certify_cmd->add_option("--steps", steps, "integration steps");
  certify_cmd->add_option("--epsilon", epsilon, "optimality-gap acceptance threshold");
  certify_cmd->add_option("--json", json_out, "write the machine-readable report here");

  auto* export_cmd = app.add_subcommand("export", "write the truncated SDP in SDPA format");
  export_cmd->add_option("file", file, "problem file")->required();
  export_cmd->add_option("--order", order, "relaxation order")->required();
  export_cmd->add_option("--out", out, "output .dat-s path")->required();

  auto* rdv_cmd = app.add_subcommand("rdv", "direct rendezvous LP on a uniform grid");
  rdv_cmd->add_option("--case", case_id, "rendezvous case (1 or 3)")->required();
  rdv_cmd->add_option("--grid", grid, "number of grid points");
  rdv_cmd->add_option("--traj", out, "write sampled trajectory CSV here");
  rdv_cmd->add_option("--json", json_out, "write the machine-readable report here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (relax_cmd->parsed())
      return cmd_relax(file, order, order_max < 0 ? order : order_max, tol, json_out);
    if (extract_cmd->parsed()) return cmd_extract(file, order, tol, json_out);
    if (certify_cmd->parsed())
      return cmd_certify(file, order, plan_file, steps, epsilon, json_out);
    if (export_cmd->parsed()) return cmd_export(file, order, out);
    if (rdv_cmd->parsed()) return cmd_rdv(case_id, grid, out, json_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
