#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "vortex/beam.hpp"
#include "vortex/fisher_classical.hpp"

namespace vortex {

// All axial positions in this header are in units of the Rayleigh range;
// photon coordinates are physical lengths.

/// Poisson shot-noise Monte Carlo configuration.
struct EstimationConfig {
  double n_photons = 1e4;  ///< expected photons per frame
  int n_trials = 100;
  double z_true = 1.0;
  std::pair<double, double> search_range{1e-3, 4.0};
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument unless n_photons > 0, n_trials >= 1 and
  /// z_true lies in the interior of search_range.
  void validate() const;
};

struct PhotonHit {
  double r;
  double phi;
};

/// Draws K ~ Poisson(n_expected) photon positions from the intensity density
/// at detection plane z: inverse-CDF sampling on the radial marginal composed
/// with conditional azimuthal sampling, both on a fine grid of the exact
/// density. Deterministic given the seed.
std::vector<PhotonHit> sample_photons(const ModeSuperposition& state,
                                      const BeamGeometry& geom, double z_over_zr,
                                      double n_expected, std::uint64_t seed);

struct MLEstimate {
  double z_hat;
  bool at_boundary;  ///< maximum pinned to a search-range edge
};

/// Maximum-likelihood axial estimate: grid bracketing of the log-likelihood
/// over the search range followed by golden-section refinement to 1e-4 z_R.
/// Throws std::invalid_argument on an empty sample set.
MLEstimate ml_estimate(std::span<const PhotonHit> samples, const ModeSuperposition& state,
                       const BeamGeometry& geom,
                       std::pair<double, double> search_range);

/// Aggregate of a Monte Carlo estimation run.
struct EstimationRun {
  std::vector<double> estimates;  ///< per-trial z-hat; NaN for empty frames
  double mean_estimate;
  double empirical_variance;  ///< unbiased; NaN when fewer than 2 usable trials
  bool variance_defined;
  double crb_classical;  ///< 1 / (N F(z_true))
  double crb_quantum;    ///< 1 / (N Q)
  double efficiency;     ///< crb_classical / empirical_variance
  int n_boundary_flags;
  bool reliable;  ///< at most 5% of trials boundary-flagged
};

/// Runs n_trials independent frames with per-trial seeds derived from the
/// master seed by counter-based splitting; identical configs give
/// bit-identical results for any thread count (0 = automatic).
EstimationRun crb_study(const EstimationConfig& cfg, const ModeSuperposition& state,
                        const BeamGeometry& geom, unsigned n_threads = 0);

}  // namespace vortex
