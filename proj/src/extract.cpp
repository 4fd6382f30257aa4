#include "imoc/extract.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace imoc {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

int svd_rank(const MatrixXd& M, double tol) {
  Eigen::JacobiSVD<MatrixXd> svd(M);
  const VectorXd& sig = svd.singularValues();
  if (sig.size() == 0 || !(sig[0] > 0.0)) return 0;
  int r = 0;
  for (int i = 0; i < sig.size(); ++i)
    if (sig[i] > tol * sig[0]) ++r;
  return r;
}

MatrixXd hankel(const std::vector<double>& m, int rows, int shift) {
  MatrixXd H(rows, rows);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < rows; ++j) H(i, j) = m[i + j + shift];
  return H;
}

}  // namespace

std::map<MultiIndex, double> marginal(const MomentVector& y, const std::vector<int>& keep) {
  std::map<MultiIndex, double> out;
  for (const auto& [k, v] : y.values) {
    bool pure = true;
    for (int i = 0; i < k.n_vars() && pure; ++i)
      if (k.exponents[i] != 0 &&
          std::find(keep.begin(), keep.end(), i) == keep.end())
        pure = false;
    if (pure) out.emplace(k, v);
  }
  return out;
}

std::vector<double> time_marginal(const MomentVector& y, int n_vars) {
  std::vector<double> out;
  if (n_vars < 1) return out;
  for (int k = 0;; ++k) {
    MultiIndex w = MultiIndex::zero(n_vars);
    w.exponents[0] = k;
    auto it = y.values.find(w);
    if (it == y.values.end()) break;
    out.push_back(it->second);
  }
  return out;
}

std::optional<int> flat_rank(const std::vector<double>& moments, double tol) {
  if (moments.size() < 3) return std::nullopt;
  int d = (static_cast<int>(moments.size()) - 1) / 2;  // H_d needs m_0..m_{2d}
  if (d < 1) return std::nullopt;
  int r_top = svd_rank(hankel(moments, d + 1, 0), tol);
  int r_prev = svd_rank(hankel(moments, d, 0), tol);
  if (r_top == r_prev) return r_top;
  return std::nullopt;
}

AtomicMeasure atoms_from_moments(const std::vector<double>& moments, int r) {
  AtomicMeasure out;
  if (r < 1 || 2 * r > static_cast<int>(moments.size())) {
    out.warnings.push_back("not enough moments for the requested rank");
    return out;
  }

  MatrixXd H0 = hankel(moments, r, 0);
  MatrixXd H1 = hankel(moments, r, 1);

  // locations: eigenvalues of the pencil (H1, H0); H0 is PSD for a
  // nonnegative measure, so reduce to a symmetric problem when possible
  std::vector<double> locs;
  Eigen::LLT<MatrixXd> llt(H0);
  if (llt.info() == Eigen::Success) {
    MatrixXd L = llt.matrixL();
    MatrixXd S = L.triangularView<Eigen::Lower>().solve(H1);
    S = L.triangularView<Eigen::Lower>().solve(S.transpose().eval());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (S + S.transpose()));
    for (int i = 0; i < r; ++i) locs.push_back(es.eigenvalues()[i]);
  } else {
    Eigen::GeneralizedEigenSolver<MatrixXd> ges(H1, H0);
    for (int i = 0; i < r; ++i) {
      std::complex<double> a = ges.alphas()[i];
      double b = ges.betas()[i];
      if (std::abs(b) < 1e-12 * std::abs(a) || std::abs(a.imag()) > 1e-6 * std::abs(a)) {
        out.warnings.push_back("ill-conditioned pencil: atom dropped");
        continue;
      }
      locs.push_back(a.real() / b);
    }
  }
  std::sort(locs.begin(), locs.end());

  if (locs.empty()) return out;
  // weights from the Vandermonde least-squares system over all moments
  int n_mom = static_cast<int>(moments.size());
  MatrixXd V(n_mom, static_cast<int>(locs.size()));
  VectorXd rhs(n_mom);
  for (int k = 0; k < n_mom; ++k) {
    rhs[k] = moments[k];
    for (size_t j = 0; j < locs.size(); ++j) V(k, j) = std::pow(locs[j], k);
  }
  VectorXd w = V.colPivHouseholderQr().solve(rhs);

  VectorXd err = V * w - rhs;
  out.residual = err.cwiseAbs().maxCoeff();
  for (size_t j = 0; j < locs.size(); ++j) out.atoms.push_back({locs[j], w[j]});
  return out;
}

ImpulsePlan identify_controls(const RelaxationResult& result, const MomentProblem& mp,
                              const ImpulsiveOCP& scaled, const ScalingMap& map,
                              const ExtractOptions& opts) {
  ImpulsePlan plan;
  plan.channels.resize(scaled.m_controls);
  plan.density_moments.resize(scaled.m_controls);

  auto t_moments = [&](MeasureId id) -> std::vector<double> {
    int mi = mp.find_measure(id);
    if (mi < 0 || mi >= static_cast<int>(result.moments.size())) return {};
    auto m = time_marginal(result.moments[mi], mp.measures[mi].n_vars);
    // the top even time moment of a control measure is only one-sidedly
    // constrained at a finite order; drop it before rank analysis
    if (m.size() >= 3 && m.size() % 2 == 1) m.pop_back();
    return m;
  };

  // signed parts of each channel's control measure (scaled time)
  std::vector<std::vector<std::vector<double>>> channel_parts(scaled.m_controls);
  std::vector<std::vector<double>> channel_signs(scaled.m_controls);
  for (int c = 0; c < scaled.m_controls; ++c) {
    auto& parts = channel_parts[c];
    auto& part_sign = channel_signs[c];
    if (scaled.control_mode == ControlMode::SignedMeasure) {
      parts.push_back(t_moments({MeasureId::Tag::NuPlus, c}));
      part_sign.push_back(1.0);
      parts.push_back(t_moments({MeasureId::Tag::NuMinus, c}));
      part_sign.push_back(-1.0);
    } else {
      // u-weighted combination of the choice measures, in native units
      std::vector<double> acc;
      for (size_t i = 0; i < scaled.control_values.size(); ++i) {
        auto mi = t_moments({MeasureId::Tag::NuDiscrete, static_cast<int>(i)});
        double u = scaled.control_values[i][c] / map.horizon;
        acc.resize(std::max(acc.size(), mi.size()), 0.0);
        for (size_t k = 0; k < mi.size(); ++k) acc[k] += u * mi[k];
      }
      parts.push_back(std::move(acc));
      part_sign.push_back(1.0);
    }
  }

  // prune against the total control effort so that idle channels do not
  // trip the atomicity analysis on numerical noise
  double total_mass = 0.0;
  for (const auto& parts : channel_parts)
    for (const auto& p : parts)
      if (!p.empty()) total_mass += std::abs(p[0]);

  for (int c = 0; c < scaled.m_controls; ++c) {
    const auto& parts = channel_parts[c];
    const auto& part_sign = channel_signs[c];

    std::vector<ImpulsePlan::Impulse> merged;
    bool channel_flat = true;
    for (size_t pi = 0; pi < parts.size(); ++pi) {
      const auto& m = parts[pi];
      if (m.empty()) continue;
      if (std::abs(m[0]) < opts.prune_ratio * std::max(total_mass, 1e-30)) continue;
      auto r = flat_rank(m, opts.rank_tol);
      if (!r) {
        channel_flat = false;
        break;
      }
      if (*r == 0) continue;
      AtomicMeasure am = atoms_from_moments(m, *r);
      for (const auto& w : am.warnings) plan.notes.push_back(w);
      for (const auto& a : am.atoms) {
        // the support is the scaled horizon; tiny excursions are numerical
        double loc = std::clamp(a.location, 0.0, 1.0);
        merged.push_back({map.time_to_native(loc), part_sign[pi] * a.weight});
      }
    }

    if (!channel_flat) {
      plan.non_atomic = true;
      // signed t-marginal reported for inspection
      std::vector<double> signed_m;
      for (size_t pi = 0; pi < parts.size(); ++pi) {
        signed_m.resize(std::max(signed_m.size(), parts[pi].size()), 0.0);
        for (size_t k = 0; k < parts[pi].size(); ++k)
          signed_m[k] += part_sign[pi] * parts[pi][k];
      }
      plan.density_moments[c] = std::move(signed_m);
      plan.notes.push_back("channel " + std::to_string(c + 1) +
                           ": non-atomic (possible chattering or density)");
      continue;
    }

    // prune small atoms
    std::vector<ImpulsePlan::Impulse> kept;
    for (const auto& im : merged)
      if (std::abs(im.amplitude) >= opts.prune_ratio * std::max(total_mass, 1e-30))
        kept.push_back(im);

    // cancel near-coincident opposite-sign atoms
    std::sort(kept.begin(), kept.end(),
              [](const auto& a, const auto& b) { return a.time < b.time; });
    std::vector<ImpulsePlan::Impulse> final_atoms;
    for (const auto& im : kept) {
      if (!final_atoms.empty() &&
          std::abs(final_atoms.back().time - im.time) <= opts.cancel_window &&
          final_atoms.back().amplitude * im.amplitude < 0.0) {
        double net = final_atoms.back().amplitude + im.amplitude;
        plan.notes.push_back("channel " + std::to_string(c + 1) +
                             ": cancelled opposite atoms near t=" +
                             std::to_string(im.time));
        if (std::abs(net) >= opts.prune_ratio * std::max(total_mass, 1e-30))
          final_atoms.back().amplitude = net;
        else
          final_atoms.pop_back();
        continue;
      }
      final_atoms.push_back(im);
    }
    plan.channels[c] = std::move(final_atoms);
  }
  return plan;
}

}  // namespace imoc
