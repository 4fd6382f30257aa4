#pragma once

#include <optional>
#include <string>
#include <vector>

#include "imoc/model.hpp"
#include "imoc/relax.hpp"
#include "imoc/transcribe.hpp"

namespace imoc {

/// Finite atomic measure on the line: sum_i weight_i * delta(location_i).
struct AtomicMeasure {
  struct Atom {
    double location = 0.0;
    double weight = 0.0;
  };
  std::vector<Atom> atoms;
  double residual = 0.0;  // worst moment-matching error
  std::vector<std::string> warnings;
};

/// Impulse sequence recovered from optimal moment vectors.
struct ImpulsePlan {
  struct Impulse {
    double time = 0.0;       // native units
    double amplitude = 0.0;  // signed, native units
  };
  std::vector<std::vector<Impulse>> channels;
  /// Set when a channel's t-marginal fails the flatness test (possible
  /// chattering or absolutely continuous density).
  bool non_atomic = false;
  /// Raw t-marginal moments (scaled time) of the signed control measure per
  /// channel, reported when non_atomic.
  std::vector<std::vector<double>> density_moments;
  std::vector<std::string> notes;
};

struct ExtractOptions {
  double rank_tol = 1e-3;       // relative singular-value cutoff for flatness
  double prune_ratio = 1e-4;    // drop atoms below ratio * total mass
  double cancel_window = 1e-3;  // native-time window for +/- cancellation
};

/// Marginal of a moment vector onto a variable subset: the entries whose
/// exponents vanish outside `keep`.
std::map<MultiIndex, double> marginal(const MomentVector& y, const std::vector<int>& keep);

/// Univariate t-marginal as a dense sequence [y_0, y_t, y_{t^2}, ...].
std::vector<double> time_marginal(const MomentVector& y, int n_vars);

/// Flatness test on the Hankel matrices of a univariate moment sequence
/// m_0..m_{2d}: the common rank of H_d and H_{d-1} when they agree under the
/// relative singular-value threshold, nothing otherwise.
std::optional<int> flat_rank(const std::vector<double>& moments, double tol = 1e-3);

/// Prony-type decomposition of a univariate moment sequence into r atoms:
/// locations from the shifted-vs-plain Hankel pencil, weights by Vandermonde
/// least squares. Ill-conditioned locations are dropped with a warning.
AtomicMeasure atoms_from_moments(const std::vector<double>& moments, int r);

/// Recovers the impulse plan from an optimal (or inaccurate) relaxation:
/// per channel, extracts atoms from the t-marginals of nu+ and nu- (signed
/// mode) or of the u-weighted nu_i (discrete mode), merges, prunes, and maps
/// times back to native units.
ImpulsePlan identify_controls(const RelaxationResult& result, const MomentProblem& mp,
                              const ImpulsiveOCP& scaled, const ScalingMap& map,
                              const ExtractOptions& opts = {});

}  // namespace imoc
