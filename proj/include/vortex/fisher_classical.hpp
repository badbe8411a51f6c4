#pragma once

#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "vortex/beam.hpp"
#include "vortex/fisher_quantum.hpp"

namespace vortex {

/// Quadrature for the intensity Fisher integrals: Gauss-Legendre in r (after
/// the substitution u = r^2) on [0, r_max_factor * w(z)], tensored with a
/// uniform periodic rule in phi. Refinement doubles both directions until the
/// relative change drops below refine_tolerance.
struct QuadratureConfig {
  int n_radial = 256;
  int n_azimuthal = 256;
  double r_max_factor = 8.0;
  double density_floor = 1e-13;   ///< relative intensity below which points are excluded
  double refine_tolerance = 1e-6;

  /// Throws std::invalid_argument outside n_radial, n_azimuthal >= 8,
  /// r_max_factor >= 4, density_floor in (0, 1e-8], refine_tolerance in (0, 1e-3].
  void validate() const;
};

/// Raised when grid doubling exhausts its budget without two successive
/// estimates agreeing to the requested tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(double previous_estimate, double last_estimate);
  double previous_estimate() const { return previous_; }
  double last_estimate() const { return last_; }

 private:
  double previous_;
  double last_;
};

/// The three intensity Fisher integrals evaluated on one fixed grid, with no
/// refinement. Building block of the adaptive routines; exposed so the
/// refinement sequence itself can be inspected.
struct CfiEstimates {
  double total;
  double radial;
  double azimuthal;
};

CfiEstimates cfi_fixed_grid(const ModeSuperposition& state, const BeamGeometry& geom,
                            double z, int n_radial, int n_azimuthal,
                            double r_max_factor = 8.0, double density_floor = 1e-13);

/// Fisher information of an ideal transverse intensity scan at detection
/// plane z, per single detection, in units of 1/z_R^2. Refined until
/// converged; throws ConvergenceError when the refinement budget runs out.
double cfi_total(const ModeSuperposition& state, const BeamGeometry& geom, double z,
                 const QuadratureConfig& cfg = {});

/// Fisher information of the radial marginal of the intensity.
double cfi_radial(const ModeSuperposition& state, const BeamGeometry& geom, double z,
                  const QuadratureConfig& cfg = {});

/// Fisher information of the azimuthal marginal of the intensity.
double cfi_azimuthal(const ModeSuperposition& state, const BeamGeometry& geom, double z,
                     const QuadratureConfig& cfg = {});

/// Closed-form intensity Fisher information of a pure LG mode,
/// [2p(p+|l|) + 2p + |l| + 1] / (R(z)^2 / 4), in units of 1/z_R^2.
/// Evaluated through 1/R so z = 0 gives exactly 0.
double cfi_pure_closed(LGIndex idx, const BeamGeometry& geom, double z);

/// Integral of e^{-t} t^mu L_p^l(t) L_{p'}^{l'}(t) over [0, inf) by the finite
/// binomial sum of the generalized orthogonality relation. Requires mu > -1.
double laguerre_product_integral(double mu, int p, int l, int p_prime, int l_prime);

struct OptimalPlane {
  double z_opt;  ///< physical units, same as the input range
  double f_max;  ///< 1/z_R^2
};

/// Maximizes cfi_total over z_range (a subset of (0, 5 z_R]): 64-point coarse
/// scan, then golden-section refinement to 1e-4 z_R.
OptimalPlane find_optimal_plane(const ModeSuperposition& state, const BeamGeometry& geom,
                                std::pair<double, double> z_range,
                                const QuadratureConfig& cfg = {});

/// Scan of the classical Fisher informations against the oracle QFI.
/// Axial positions are stored in units of z_R; Fisher values in 1/z_R^2.
struct FisherReport {
  std::vector<double> z_grid;
  std::vector<double> f_total;
  std::vector<double> f_radial;
  std::vector<double> f_azimuthal;
  std::vector<char> converged;  ///< per-point flag; 1 = refinement converged
  FisherValue qfi_reference{0.0, FisherSource::variance_oracle};
};

/// Evaluates the three CFI quantities on the grid (given in z_R units).
/// Points that fail to converge are flagged, not fatal. Grid points are
/// evaluated in parallel; results are ordered by grid index.
FisherReport scan_report(const ModeSuperposition& state, const BeamGeometry& geom,
                         std::span<const double> z_grid_over_zr,
                         const QuadratureConfig& cfg = {});

}  // namespace vortex
