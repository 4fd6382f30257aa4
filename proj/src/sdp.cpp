#include "imoc/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace imoc {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::PrimalInfeasible: return "primal_infeasible";
    case SolveStatus::DualInfeasible: return "dual_infeasible";
    case SolveStatus::Inaccurate: return "inaccurate";
    case SolveStatus::IterationLimit: return "iteration_limit";
  }
  return "unknown";
}

struct FEntry {
  int r, c;  // r <= c
  double coeff;
};

struct BlockData {
  int side = 0;
  int group = 0;
  MatrixXd C;                               // constant part
  std::vector<int> vars;                    // global variable ids
  std::vector<std::vector<FEntry>> fmats;   // per local var
};

struct NonnegData {
  double constant = 0.0;
  std::vector<LinearTerm> terms;
  int group = 0;
};

/// Value in the cone space: nonnegative scalars then symmetric blocks.
struct ConeVec {
  VectorXd nn;
  std::vector<MatrixXd> mats;
};

double cone_dot(const ConeVec& a, const ConeVec& b) {
  double v = a.nn.size() ? a.nn.dot(b.nn) : 0.0;
  for (size_t j = 0; j < a.mats.size(); ++j)
    v += (a.mats[j].array() * b.mats[j].array()).sum();
  return v;
}

double cone_norm(const ConeVec& a) { return std::sqrt(std::max(0.0, cone_dot(a, a))); }

void cone_axpy(ConeVec& y, double alpha, const ConeVec& x) {
  if (y.nn.size()) y.nn += alpha * x.nn;
  for (size_t j = 0; j < y.mats.size(); ++j) y.mats[j] += alpha * x.mats[j];
}

struct ProblemData {
  int n = 0, m = 0;
  VectorXd c, b;
  std::vector<SparseRow> eq;
  std::vector<NonnegData> nonneg;
  std::vector<BlockData> blocks;
  std::vector<std::pair<int, int>> groups;
  std::vector<MatrixXd> Ag;  // dense equality slice per group (m x n_g)
  double cone_degree = 0.0;

  ConeVec cone_zero() const {
    ConeVec v;
    v.nn = VectorXd::Zero(nonneg.size());
    for (const auto& blk : blocks) v.mats.push_back(MatrixXd::Zero(blk.side, blk.side));
    return v;
  }

  ConeVec cone_identity() const {
    ConeVec v;
    v.nn = VectorXd::Ones(nonneg.size());
    for (const auto& blk : blocks) v.mats.push_back(MatrixXd::Identity(blk.side, blk.side));
    return v;
  }

  ConeVec cone_constants() const {  // the vector h
    ConeVec v;
    v.nn.resize(nonneg.size());
    for (size_t i = 0; i < nonneg.size(); ++i) v.nn[i] = nonneg[i].constant;
    for (const auto& blk : blocks) v.mats.push_back(blk.C);
    return v;
  }

  // linear pencil s_lin(x) (without constants)
  ConeVec applyL(const VectorXd& x) const {
    ConeVec v = cone_zero();
    for (size_t i = 0; i < nonneg.size(); ++i) {
      double acc = 0.0;
      for (const auto& t : nonneg[i].terms) acc += t.coeff * x[t.var];
      v.nn[i] = acc;
    }
    for (size_t j = 0; j < blocks.size(); ++j) {
      const auto& blk = blocks[j];
      MatrixXd& M = v.mats[j];
      for (size_t lv = 0; lv < blk.vars.size(); ++lv) {
        double xv = x[blk.vars[lv]];
        if (xv == 0.0) continue;
        for (const auto& e : blk.fmats[lv]) {
          M(e.r, e.c) += e.coeff * xv;
          if (e.r != e.c) M(e.c, e.r) += e.coeff * xv;
        }
      }
    }
    return v;
  }

  VectorXd applyLT(const ConeVec& z) const {
    VectorXd out = VectorXd::Zero(n);
    for (size_t i = 0; i < nonneg.size(); ++i) {
      double zi = z.nn[i];
      if (zi == 0.0) continue;
      for (const auto& t : nonneg[i].terms) out[t.var] += t.coeff * zi;
    }
    for (size_t j = 0; j < blocks.size(); ++j) {
      const auto& blk = blocks[j];
      const MatrixXd& Z = z.mats[j];
      for (size_t lv = 0; lv < blk.vars.size(); ++lv) {
        double acc = 0.0;
        for (const auto& e : blk.fmats[lv])
          acc += e.coeff * (e.r == e.c ? Z(e.r, e.r) : 2.0 * Z(e.r, e.c));
        out[blk.vars[lv]] += acc;
      }
    }
    return out;
  }

  VectorXd applyA(const VectorXd& x) const {
    VectorXd out = VectorXd::Zero(m);
    for (int i = 0; i < m; ++i) {
      double acc = 0.0;
      for (const auto& t : eq[i].terms) acc += t.coeff * x[t.var];
      out[i] = acc;
    }
    return out;
  }

  VectorXd applyAT(const VectorXd& y) const {
    VectorXd out = VectorXd::Zero(n);
    for (int i = 0; i < m; ++i)
      for (const auto& t : eq[i].terms) out[t.var] += t.coeff * y[i];
    return out;
  }
};

int group_of_var(const std::vector<std::pair<int, int>>& groups, int var) {
  for (size_t g = 0; g < groups.size(); ++g)
    if (var >= groups[g].first && var < groups[g].first + groups[g].second)
      return static_cast<int>(g);
  return -1;
}

ProblemData build_problem(const ConicProgram& cp) {
  ProblemData pd;
  pd.n = cp.n_vars();
  pd.m = static_cast<int>(cp.equalities.size());
  pd.eq = cp.equalities;
  pd.b.resize(pd.m);
  for (int i = 0; i < pd.m; ++i) pd.b[i] = cp.equalities[i].rhs;
  pd.c = VectorXd::Zero(pd.n);
  for (const auto& t : cp.objective) pd.c[t.var] += t.coeff;

  pd.groups = cp.groups;
  if (pd.groups.empty()) pd.groups.emplace_back(0, pd.n);

  bool single_group_ok = true;
  auto entry_group = [&](const std::vector<LinearTerm>& terms) {
    int g = -1;
    for (const auto& t : terms) {
      int tg = group_of_var(pd.groups, t.var);
      if (g == -1) g = tg;
      if (tg != g) return -2;
    }
    return g;
  };

  for (const auto& e : cp.nonneg) {
    NonnegData nd;
    nd.constant = e.constant;
    nd.terms = e.terms;
    nd.group = entry_group(e.terms);
    if (nd.group == -2) single_group_ok = false;
    pd.nonneg.push_back(std::move(nd));
  }
  for (const auto& ms : cp.psd) {
    BlockData blk;
    blk.side = ms.side;
    blk.C = MatrixXd::Zero(ms.side, ms.side);
    std::map<int, int> local;
    int g = -1;
    for (int r = 0; r < ms.side; ++r)
      for (int col = r; col < ms.side; ++col) {
        const EntryForm& e = ms.at(r, col);
        if (e.constant != 0.0) {
          blk.C(r, col) = e.constant;
          blk.C(col, r) = e.constant;
        }
        for (const auto& t : e.terms) {
          auto it = local.find(t.var);
          int lv;
          if (it == local.end()) {
            lv = static_cast<int>(blk.vars.size());
            local.emplace(t.var, lv);
            blk.vars.push_back(t.var);
            blk.fmats.emplace_back();
            int tg = group_of_var(pd.groups, t.var);
            if (g == -1) g = tg;
            if (tg != g) single_group_ok = false;
          } else {
            lv = it->second;
          }
          blk.fmats[lv].push_back({r, col, t.coeff});
        }
      }
    blk.group = std::max(0, g);
    pd.blocks.push_back(std::move(blk));
  }
  if (!single_group_ok) {
    pd.groups.clear();
    pd.groups.emplace_back(0, pd.n);
    for (auto& nd : pd.nonneg) nd.group = 0;
    for (auto& blk : pd.blocks) blk.group = 0;
  }

  pd.Ag.resize(pd.groups.size());
  for (size_t g = 0; g < pd.groups.size(); ++g)
    pd.Ag[g] = MatrixXd::Zero(pd.m, pd.groups[g].second);
  for (int i = 0; i < pd.m; ++i)
    for (const auto& t : pd.eq[i].terms) {
      int g = group_of_var(pd.groups, t.var);
      pd.Ag[g](i, t.var - pd.groups[g].first) += t.coeff;
    }

  pd.cone_degree = static_cast<double>(pd.nonneg.size());
  for (const auto& blk : pd.blocks) pd.cone_degree += blk.side;
  return pd;
}

/// Nesterov-Todd scaling point between the current s and z.
struct Scaling {
  VectorXd w, lam_nn;
  std::vector<MatrixXd> R, Rinv, P, Pinv;
  std::vector<VectorXd> lam;

  // W z (into the scaled space)
  ConeVec scale_z(const ProblemData& pd, const ConeVec& z) const {
    ConeVec out = z;
    out.nn = w.cwiseProduct(z.nn);
    for (size_t j = 0; j < pd.blocks.size(); ++j)
      out.mats[j] = R[j].transpose() * z.mats[j] * R[j];
    return out;
  }
  // W^{-T} s (into the scaled space)
  ConeVec scale_s(const ProblemData& pd, const ConeVec& s) const {
    ConeVec out = s;
    out.nn = s.nn.cwiseQuotient(w);
    for (size_t j = 0; j < pd.blocks.size(); ++j)
      out.mats[j] = Rinv[j] * s.mats[j] * Rinv[j].transpose();
    return out;
  }
  // W^T d (back from the scaled space on the s side)
  ConeVec unscale_s(const ProblemData& pd, const ConeVec& d) const {
    ConeVec out = d;
    out.nn = w.cwiseProduct(d.nn);
    for (size_t j = 0; j < pd.blocks.size(); ++j)
      out.mats[j] = R[j] * d.mats[j] * R[j].transpose();
    return out;
  }
  // (W^T W)^{-1} u
  ConeVec wtw_inv(const ProblemData& pd, const ConeVec& u) const {
    ConeVec out = u;
    out.nn = u.nn.cwiseQuotient(w.cwiseProduct(w));
    for (size_t j = 0; j < pd.blocks.size(); ++j)
      out.mats[j] = Pinv[j] * u.mats[j] * Pinv[j];
    return out;
  }
  // W^T W u
  ConeVec wtw(const ProblemData& pd, const ConeVec& u) const {
    ConeVec out = u;
    out.nn = u.nn.cwiseProduct(w.cwiseProduct(w));
    for (size_t j = 0; j < pd.blocks.size(); ++j)
      out.mats[j] = P[j] * u.mats[j] * P[j];
    return out;
  }
};

Eigen::LLT<MatrixXd> robust_llt(MatrixXd M) {
  Eigen::LLT<MatrixXd> llt(M);
  double jitter = 1e-13 * (1.0 + M.diagonal().cwiseAbs().maxCoeff());
  int tries = 0;
  while (llt.info() != Eigen::Success && tries < 12) {
    M.diagonal().array() += jitter;
    jitter *= 10.0;
    llt.compute(M);
    ++tries;
  }
  if (llt.info() != Eigen::Success) throw std::runtime_error("sdp: factorization failed");
  return llt;
}

bool compute_scaling(const ProblemData& pd, const ConeVec& s, const ConeVec& z, Scaling& sc) {
  sc.w = (s.nn.cwiseQuotient(z.nn)).cwiseSqrt();
  sc.lam_nn = (s.nn.cwiseProduct(z.nn)).cwiseSqrt();
  if (s.nn.size() && (!(s.nn.minCoeff() > 0.0) || !(z.nn.minCoeff() > 0.0))) return false;
  sc.R.clear();
  sc.Rinv.clear();
  sc.P.clear();
  sc.Pinv.clear();
  sc.lam.clear();
  // any factor F with F F^T = M works here; fall back to an eigenvalue
  // square root with a relative floor when the iterate grazes the boundary
  auto factor = [](const MatrixXd& M, MatrixXd& F) -> bool {
    Eigen::LLT<MatrixXd> llt(M);
    if (llt.info() == Eigen::Success) {
      F = llt.matrixL();
      return true;
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(M);
    if (es.info() != Eigen::Success) return false;
    double top = es.eigenvalues().maxCoeff();
    if (!(top > 0.0)) return false;
    VectorXd ev = es.eigenvalues().cwiseMax(1e-14 * top);
    F = es.eigenvectors() * ev.cwiseSqrt().asDiagonal();
    return true;
  };
  for (size_t j = 0; j < pd.blocks.size(); ++j) {
    MatrixXd Ls, Lz;
    if (!factor(s.mats[j], Ls) || !factor(z.mats[j], Lz)) return false;
    MatrixXd M = Lz.transpose() * Ls;
    Eigen::BDCSVD<MatrixXd> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    VectorXd sig = svd.singularValues();
    if (!(sig.minCoeff() > 0.0)) sig = sig.cwiseMax(1e-14 * std::max(sig.maxCoeff(), 1e-300));
    if (!(sig.minCoeff() > 0.0)) return false;
    VectorXd isqrt = sig.cwiseSqrt().cwiseInverse();
    MatrixXd R = Ls * svd.matrixV() * isqrt.asDiagonal();
    MatrixXd Rinv = isqrt.asDiagonal() * svd.matrixU().transpose() * Lz.transpose();
    sc.R.push_back(R);
    sc.Rinv.push_back(Rinv);
    sc.P.push_back(R * R.transpose());
    sc.Pinv.push_back(Rinv.transpose() * Rinv);
    sc.lam.push_back(sig);
  }
  return true;
}

struct KKTFactor {
  std::vector<Eigen::LLT<MatrixXd>> Hllt;
  Eigen::LLT<MatrixXd> Mllt;
  bool has_eq = false;
};

KKTFactor factor_kkt(const ProblemData& pd, const Scaling& sc) {
  KKTFactor f;
  std::vector<MatrixXd> H(pd.groups.size());
  for (size_t g = 0; g < pd.groups.size(); ++g)
    H[g] = MatrixXd::Zero(pd.groups[g].second, pd.groups[g].second);

  for (size_t i = 0; i < pd.nonneg.size(); ++i) {
    const auto& nd = pd.nonneg[i];
    double wi2 = sc.w[i] * sc.w[i];
    MatrixXd& Hg = H[nd.group];
    int off = pd.groups[nd.group].first;
    for (const auto& ta : nd.terms)
      for (const auto& tb : nd.terms)
        Hg(ta.var - off, tb.var - off) += ta.coeff * tb.coeff / wi2;
  }

  for (size_t j = 0; j < pd.blocks.size(); ++j) {
    const auto& blk = pd.blocks[j];
    const MatrixXd& Pinv = sc.Pinv[j];
    MatrixXd& Hg = H[blk.group];
    int off = pd.groups[blk.group].first;
    MatrixXd U(blk.side, blk.side);
    for (size_t lv = 0; lv < blk.vars.size(); ++lv) {
      U.setZero();
      for (const auto& e : blk.fmats[lv]) {
        U.noalias() += e.coeff * (Pinv.col(e.r) * Pinv.col(e.c).transpose());
        if (e.r != e.c) U.noalias() += e.coeff * (Pinv.col(e.c) * Pinv.col(e.r).transpose());
      }
      int iv = blk.vars[lv] - off;
      for (size_t lw = 0; lw < blk.vars.size(); ++lw) {
        int iw = blk.vars[lw] - off;
        if (iw < iv) continue;
        double acc = 0.0;
        for (const auto& e : blk.fmats[lw])
          acc += e.coeff * (e.r == e.c ? U(e.r, e.r) : U(e.r, e.c) + U(e.c, e.r));
        Hg(iv, iw) += acc;
        if (iw != iv) Hg(iw, iv) += acc;
      }
    }
  }

  f.Hllt.reserve(H.size());
  for (auto& Hg : H) f.Hllt.push_back(robust_llt(std::move(Hg)));

  if (pd.m > 0) {
    f.has_eq = true;
    MatrixXd M = MatrixXd::Zero(pd.m, pd.m);
    for (size_t g = 0; g < pd.groups.size(); ++g) {
      if (pd.groups[g].second == 0) continue;
      MatrixXd X = f.Hllt[g].solve(pd.Ag[g].transpose());
      M.noalias() += pd.Ag[g] * X;
    }
    f.Mllt = robust_llt(std::move(M));
  }
  return f;
}

VectorXd solve_H(const ProblemData& pd, const KKTFactor& f, const VectorXd& r) {
  VectorXd out(pd.n);
  for (size_t g = 0; g < pd.groups.size(); ++g) {
    auto seg = r.segment(pd.groups[g].first, pd.groups[g].second);
    out.segment(pd.groups[g].first, pd.groups[g].second) = f.Hllt[g].solve(seg);
  }
  return out;
}

struct KKTSol {
  VectorXd dx, dy;
  ConeVec dz;
};

// Solves  A' dy + G' dz = rx,  A dx = ry,  G dx - W'W dz = rz  (G = -L).
KKTSol kkt_solve(const ProblemData& pd, const Scaling& sc, const KKTFactor& f,
                 const VectorXd& rx, const VectorXd& ry, const ConeVec& rz) {
  auto solve_once = [&](const VectorXd& rx_, const VectorXd& ry_, const ConeVec& rz_) {
    KKTSol out;
    VectorXd rhat = rx_ - pd.applyLT(sc.wtw_inv(pd, rz_));
    if (f.has_eq) {
      VectorXd t = solve_H(pd, f, rhat);
      VectorXd rhs_eq = pd.applyA(t) - ry_;
      out.dy = f.Mllt.solve(rhs_eq);
      out.dx = solve_H(pd, f, rhat - pd.applyAT(out.dy));
    } else {
      out.dy = VectorXd::Zero(0);
      out.dx = solve_H(pd, f, rhat);
    }
    ConeVec tmp = pd.applyL(out.dx);
    ConeVec arg = rz_;
    cone_axpy(arg, 1.0, tmp);  // rz_ + L dx
    out.dz = sc.wtw_inv(pd, arg);
    // dz = (W'W)^{-1} (G dx - rz_) = -(W'W)^{-1}(L dx + rz_)
    out.dz.nn = -out.dz.nn;
    for (auto& m : out.dz.mats) m = -m;
    return out;
  };

  KKTSol sol = solve_once(rx, ry, rz);
  // iterative refinement against the unreduced KKT system
  for (int pass = 0; pass < 3; ++pass) {
    VectorXd e1 = rx - (f.has_eq ? pd.applyAT(sol.dy) : VectorXd::Zero(pd.n).eval()) +
                  pd.applyLT(sol.dz);
    VectorXd e2 = f.has_eq ? (ry - pd.applyA(sol.dx)).eval() : VectorXd::Zero(0).eval();
    // e3 = rz - (G dx - W'W dz) = rz + L dx + W'W dz
    ConeVec e3 = rz;
    ConeVec lx = pd.applyL(sol.dx);
    cone_axpy(e3, 1.0, lx);
    ConeVec wtwdz = sc.wtw(pd, sol.dz);
    cone_axpy(e3, 1.0, wtwdz);
    double err = std::max({e1.norm(), e2.size() ? e2.norm() : 0.0, cone_norm(e3)});
    double rhs = std::max({rx.norm(), ry.size() ? ry.norm() : 0.0, cone_norm(rz), 1.0});
    if (err < 1e-14 * rhs) break;
    KKTSol corr = solve_once(e1, e2, e3);
    sol.dx += corr.dx;
    if (f.has_eq) sol.dy += corr.dy;
    cone_axpy(sol.dz, 1.0, corr.dz);
  }
  return sol;
}

// Largest step <= cap keeping s + alpha ds and z + alpha dz in the cone,
// evaluated in the scaled space where the current point is lambda.
double max_step(const ProblemData& pd, const Scaling& sc, const ConeVec& ds_scaled,
                const ConeVec& dz_scaled, double tau, double dtau, double kappa, double dkappa,
                double cap) {
  double limit = cap;
  for (int i = 0; i < ds_scaled.nn.size(); ++i) {
    double rho_s = ds_scaled.nn[i] / sc.lam_nn[i];
    double rho_z = dz_scaled.nn[i] / sc.lam_nn[i];
    if (rho_s < 0.0) limit = std::min(limit, -1.0 / rho_s);
    if (rho_z < 0.0) limit = std::min(limit, -1.0 / rho_z);
  }
  for (size_t j = 0; j < pd.blocks.size(); ++j) {
    VectorXd isq = sc.lam[j].cwiseSqrt().cwiseInverse();
    auto bound = [&](const MatrixXd& D) {
      MatrixXd Mn = isq.asDiagonal() * D * isq.asDiagonal();
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(Mn, Eigen::EigenvaluesOnly);
      double lmin = es.eigenvalues().minCoeff();
      if (lmin < 0.0) limit = std::min(limit, -1.0 / lmin);
    };
    bound(ds_scaled.mats[j]);
    bound(dz_scaled.mats[j]);
  }
  if (dtau < 0.0) limit = std::min(limit, -tau / dtau);
  if (dkappa < 0.0) limit = std::min(limit, -kappa / dkappa);
  return limit;
}

// inverse Jordan product (lambda o)^{-1} applied entrywise in scaled space
ConeVec jordan_inverse_apply(const ProblemData& pd, const Scaling& sc, const ConeVec& u) {
  ConeVec out = u;
  out.nn = u.nn.cwiseQuotient(sc.lam_nn);
  for (size_t j = 0; j < pd.blocks.size(); ++j) {
    const VectorXd& lam = sc.lam[j];
    for (int r = 0; r < out.mats[j].rows(); ++r)
      for (int c = 0; c < out.mats[j].cols(); ++c)
        out.mats[j](r, c) = 2.0 * u.mats[j](r, c) / (lam[r] + lam[c]);
  }
  return out;
}

ConeVec jordan_product(const ProblemData& pd, const ConeVec& a, const ConeVec& b) {
  ConeVec out = a;
  out.nn = a.nn.cwiseProduct(b.nn);
  for (size_t j = 0; j < pd.blocks.size(); ++j)
    out.mats[j] = 0.5 * (a.mats[j] * b.mats[j] + b.mats[j] * a.mats[j]);
  return out;
}

}  // namespace

std::string to_string(SolveStatus s) { return status_name(s); }

SolveResult solve(const ConicProgram& cp, const SolverOptions& opts) {
  ProblemData pd = build_problem(cp);
  if (pd.nonneg.empty() && pd.blocks.empty())
    throw std::invalid_argument("solve: program has no cone constraints");

  SolveResult res;
  const ConeVec h = pd.cone_constants();
  const double norm_b = std::max(1.0, pd.b.size() ? pd.b.norm() : 0.0);
  const double norm_h = std::max(1.0, cone_norm(h));
  const double norm_c = std::max(1.0, pd.c.norm());

  VectorXd x = VectorXd::Zero(pd.n);
  VectorXd y = VectorXd::Zero(pd.m);
  ConeVec s = pd.cone_identity();
  ConeVec z = pd.cone_identity();
  double tau = 1.0, kappa = 1.0;

  const double STEP = 0.99;
  double last_alpha = 1.0;
  int stall_count = 0;

  // best iterate seen so far, by worst-case residual score
  struct Snapshot {
    VectorXd x, y;
    ConeVec s, z;
    double tau = 1.0, kappa = 1.0;
    double score = std::numeric_limits<double>::infinity();
  } best;

  auto classify = [&](double tolf, double tolg, SolveStatus optimal_status) -> bool {
    ConeVec Lx = pd.applyL(x);
    ConeVec rz = s;  // r_z = s - Lx - h*tau
    cone_axpy(rz, -1.0, Lx);
    cone_axpy(rz, -tau, h);
    VectorXd rx = (pd.m ? pd.applyAT(y) : VectorXd::Zero(pd.n).eval()) - pd.applyLT(z) +
                  tau * pd.c;
    VectorXd ry = pd.applyA(x) - tau * pd.b;
    double hz = cone_dot(h, z);
    double by = pd.m ? pd.b.dot(y) : 0.0;
    double cx = pd.c.dot(x);

    double pcost = cx / tau;
    double dcost = -(by + hz) / tau;
    double pres = std::max(pd.m ? ry.norm() / norm_b : 0.0, cone_norm(rz) / norm_h) / tau;
    double dres = rx.norm() / norm_c / tau;
    double gap = (cone_dot(s, z)) / (tau * tau);
    double relgap = gap / std::max({1.0, std::abs(pcost), std::abs(dcost)});

    res.res_primal = pres;
    res.res_dual = dres;
    res.res_gap = relgap;
    res.tau = tau;
    res.kappa = kappa;

    if (pres <= tolf && dres <= tolf && relgap <= tolg) {
      res.status = optimal_status;
      res.y = x / tau;
      res.eq_multipliers = y / tau;
      res.dual_nonneg = z.nn / tau;
      res.dual_psd.clear();
      for (const auto& mz : z.mats) res.dual_psd.push_back(mz / tau);
      res.objective = pcost + cp.objective_constant;
      return true;
    }
    // primal infeasibility: dual ray with A'y + G'z = 0 and h'z + b'y < 0
    if (by + hz < 0.0) {
      double scale_ray = -1.0 / (by + hz);
      double cert_res = (rx - tau * pd.c).norm() / norm_c * scale_ray;
      if (cert_res <= tolf) {
        res.status = SolveStatus::PrimalInfeasible;
        res.eq_multipliers = y * scale_ray;
        res.dual_nonneg = z.nn * scale_ray;
        res.dual_psd.clear();
        for (const auto& mz : z.mats) res.dual_psd.push_back(mz * scale_ray);
        res.objective = std::numeric_limits<double>::infinity();
        return true;
      }
    }
    // dual infeasibility: primal ray with A x = 0, G x + s = 0, c'x < 0
    if (cx < 0.0) {
      double scale_ray = -1.0 / cx;
      ConeVec gxs = s;
      cone_axpy(gxs, -1.0, Lx);
      VectorXd ax = pd.applyA(x);
      double cert_res =
          std::max(pd.m ? ax.norm() / norm_b : 0.0, cone_norm(gxs) / norm_h) * scale_ray;
      if (cert_res <= tolf) {
        res.status = SolveStatus::DualInfeasible;
        res.certificate_ray = x * scale_ray;
        res.objective = -std::numeric_limits<double>::infinity();
        return true;
      }
    }
    return false;
  };

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    res.iterations = iter;

    // residuals
    ConeVec Lx = pd.applyL(x);
    ConeVec r_z = s;
    cone_axpy(r_z, -1.0, Lx);
    cone_axpy(r_z, -tau, h);
    VectorXd r_x = (pd.m ? pd.applyAT(y) : VectorXd::Zero(pd.n).eval()) - pd.applyLT(z) +
                   tau * pd.c;
    VectorXd r_y = pd.applyA(x) - tau * pd.b;
    double hz = cone_dot(h, z);
    double by = pd.m ? pd.b.dot(y) : 0.0;
    double cx = pd.c.dot(x);
    double r_tau = kappa + cx + by + hz;
    double mu = (cone_dot(s, z) + tau * kappa) / (pd.cone_degree + 1.0);

    {
      IterateTrace tr;
      tr.primal_obj = cx / tau;
      tr.dual_obj = -(by + hz) / tau;
      tr.gap = cone_dot(s, z) / (tau * tau);
      tr.res_primal = std::max(pd.m ? r_y.norm() / norm_b : 0.0, cone_norm(r_z) / norm_h) / tau;
      tr.res_dual = r_x.norm() / norm_c / tau;
      tr.tau = tau;
      tr.kappa = kappa;
      tr.step = last_alpha;
      res.trace.push_back(tr);
      double relgap = tr.gap / std::max({1.0, std::abs(tr.primal_obj), std::abs(tr.dual_obj)});
      double score = std::max({tr.res_primal, tr.res_dual, relgap});
      if (score < best.score) {
        best = {x, y, s, z, tau, kappa, score};
      } else if (score > 100.0 * best.score && best.score < 1e-4) {
        break;  // numerical degradation past the attainable accuracy
      }
      if (opts.verbose)
        std::printf("it %3d  pobj % .6e  dobj % .6e  gap %.2e  pres %.2e  dres %.2e  "
                    "tau %.2e  kap %.2e\n",
                    iter, tr.primal_obj, tr.dual_obj, tr.gap, tr.res_primal, tr.res_dual, tau,
                    kappa);
    }

    if (classify(opts.tol_feas, opts.tol_gap, SolveStatus::Optimal)) return res;
    if (kappa / tau > opts.tau_kappa_ratio_threshold) {
      if (classify(1e-4, 1e-4, SolveStatus::Inaccurate)) return res;
    }

    Scaling sc;
    if (!compute_scaling(pd, s, z, sc)) {
      if (classify(1e-4, 1e-3, SolveStatus::Inaccurate)) return res;
      break;
    }
    KKTFactor f = factor_kkt(pd, sc);

    ConeVec hcone = h;
    KKTSol v = kkt_solve(pd, sc, f, -pd.c, pd.b, hcone);
    double denom = pd.c.dot(v.dx) + (pd.m ? pd.b.dot(v.dy) : 0.0) + cone_dot(h, v.dz) -
                   kappa / tau;

    ConeVec lam_cone;  // lambda as a cone vector
    lam_cone.nn = sc.lam_nn;
    for (size_t j = 0; j < pd.blocks.size(); ++j)
      lam_cone.mats.push_back(MatrixXd(sc.lam[j].asDiagonal()));

    auto newton = [&](const VectorXd& bx, const VectorXd& by_, const ConeVec& bz, double btau,
                      const ConeVec& d_s, double dkval, KKTSol& out, double& dtau,
                      double& dkappa, ConeVec& ds_out) {
      ConeVec bz_tilde = bz;
      ConeVec wtds = sc.unscale_s(pd, d_s);
      cone_axpy(bz_tilde, -1.0, wtds);
      KKTSol u = kkt_solve(pd, sc, f, bx, by_, bz_tilde);
      double num = btau - dkval / tau -
                   (pd.c.dot(u.dx) + (pd.m ? pd.b.dot(u.dy) : 0.0) + cone_dot(h, u.dz));
      dtau = num / denom;
      out.dx = u.dx + dtau * v.dx;
      if (pd.m) out.dy = u.dy + dtau * v.dy;
      else out.dy = VectorXd::Zero(0);
      out.dz = u.dz;
      cone_axpy(out.dz, dtau, v.dz);
      // ds = W'(d_s - W dz)
      ConeVec wdz = sc.scale_z(pd, out.dz);
      ConeVec arg = d_s;
      cone_axpy(arg, -1.0, wdz);
      ds_out = sc.unscale_s(pd, arg);
      dkappa = (dkval - kappa * dtau) / tau;
    };

    // affine (predictor) direction
    ConeVec d_s_aff = lam_cone;
    d_s_aff.nn = -d_s_aff.nn;
    for (auto& m : d_s_aff.mats) m = -m;
    KKTSol aff;
    double dtau_aff, dkappa_aff;
    ConeVec ds_aff;
    newton(-r_x, -r_y, [&] { ConeVec t = r_z; t.nn = -t.nn; for (auto& m : t.mats) m = -m; return t; }(),
           -r_tau, d_s_aff, -tau * kappa, aff, dtau_aff, dkappa_aff, ds_aff);

    ConeVec ds_aff_scaled = sc.scale_s(pd, ds_aff);
    ConeVec dz_aff_scaled = sc.scale_z(pd, aff.dz);
    double alpha_aff = max_step(pd, sc, ds_aff_scaled, dz_aff_scaled, tau, dtau_aff, kappa,
                                dkappa_aff, 1.0);
    double sigma = std::pow(1.0 - alpha_aff, 3);
    sigma = std::clamp(sigma, 0.0, 1.0);

    // combined (corrector) direction
    ConeVec eta = jordan_product(pd, ds_aff_scaled, dz_aff_scaled);
    ConeVec comp = jordan_product(pd, lam_cone, lam_cone);
    comp.nn = -comp.nn - eta.nn;
    for (size_t j = 0; j < comp.mats.size(); ++j) comp.mats[j] = -comp.mats[j] - eta.mats[j];
    ConeVec ident = pd.cone_identity();
    cone_axpy(comp, sigma * mu, ident);
    ConeVec d_s = jordan_inverse_apply(pd, sc, comp);
    double dkval = -tau * kappa + sigma * mu - dtau_aff * dkappa_aff;

    double damp = 1.0 - sigma;
    KKTSol dir;
    double dtau, dkappa;
    ConeVec ds;
    newton(-damp * r_x, -damp * r_y,
           [&] { ConeVec t = r_z; t.nn = -damp * t.nn; for (auto& m : t.mats) m = -damp * m; return t; }(),
           -damp * r_tau, d_s, dkval, dir, dtau, dkappa, ds);

    ConeVec ds_scaled = sc.scale_s(pd, ds);
    ConeVec dz_scaled = sc.scale_z(pd, dir.dz);
    double alpha = STEP * max_step(pd, sc, ds_scaled, dz_scaled, tau, dtau, kappa, dkappa,
                                   1.0 / STEP);
    alpha = std::min(alpha, 1.0);
    last_alpha = alpha;

    x += alpha * dir.dx;
    if (pd.m) y += alpha * dir.dy;
    cone_axpy(s, alpha, ds);
    cone_axpy(z, alpha, dir.dz);
    tau += alpha * dtau;
    kappa += alpha * dkappa;

    if (alpha < 1e-7) {
      ++stall_count;
      if (stall_count >= 3) break;
    } else {
      stall_count = 0;
    }
  }

  // ran out of iterations, stalled, or degraded: fall back to the best
  // iterate and accept with widened tolerances
  if (best.score < std::numeric_limits<double>::infinity()) {
    x = best.x;
    y = best.y;
    s = best.s;
    z = best.z;
    tau = best.tau;
    kappa = best.kappa;
  }
  if (classify(opts.tol_feas, opts.tol_gap, SolveStatus::Optimal)) return res;
  if (classify(1e-4, 1e-3, SolveStatus::Inaccurate)) return res;
  res.status = SolveStatus::IterationLimit;
  res.y = x / tau;
  res.eq_multipliers = y / tau;
  res.dual_nonneg = z.nn / tau;
  res.dual_psd.clear();
  for (const auto& mz : z.mats) res.dual_psd.push_back(mz / tau);
  res.objective = pd.c.dot(x) / tau + cp.objective_constant;
  return res;
}

}  // namespace imoc
