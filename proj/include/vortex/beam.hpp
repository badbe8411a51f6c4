#pragma once

#include <complex>
#include <vector>

namespace vortex {

using Complex = std::complex<double>;

/// Waist radius and wavenumber of the beam; fixes all physical units.
/// The Rayleigh range z_R = k w0^2 / 2 is the natural axial unit.
struct BeamGeometry {
  double w0;  ///< waist radius (length), > 0
  double k;   ///< wavenumber (1/length), > 0

  BeamGeometry(double waist_radius, double wavenumber);

  double rayleigh_range() const { return 0.5 * k * w0 * w0; }
};

/// Mode indices of a Laguerre-Gauss beam.
struct LGIndex {
  int p = 0;  ///< radial index, >= 0
  int l = 0;  ///< azimuthal index (orbital angular momentum per photon)

  friend bool operator==(const LGIndex&, const LGIndex&) = default;
};

struct ModeTerm {
  LGIndex idx;
  Complex coeff;
};

/// Complex-weighted superposition of LG modes. Always normalized
/// (sum |c|^2 = 1) and free of duplicate indices; term order is preserved.
class ModeSuperposition {
 public:
  ModeSuperposition() = default;

  /// Normalizes the coefficients. Throws std::invalid_argument on a
  /// duplicate LGIndex, a negative p, or an (all-)zero coefficient vector.
  explicit ModeSuperposition(std::vector<ModeTerm> terms);

  static ModeSuperposition single(LGIndex idx);
  /// Equal-weight (|a> + |b>)/sqrt(2).
  static ModeSuperposition equal_pair(LGIndex a, LGIndex b);

  const std::vector<ModeTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

 private:
  std::vector<ModeTerm> terms_;
};

/// Propagation parameters of a given LG mode at axial distance z from the waist.
struct PropagatedParams {
  double radius_of_curvature;  ///< R(z); +infinity sentinel at z = 0
  double inv_radius;           ///< 1/R = z/(z^2 + z_R^2), finite everywhere
  double beam_radius;          ///< w(z) = w0 sqrt(1 + (z/z_R)^2)
  double gouy;                 ///< (2p + |l| + 1) atan(z/z_R)
};

struct CylindricalPoint {
  double r;    ///< radial distance, >= 0
  double phi;  ///< azimuth, radians
  double z;    ///< axial distance from the waist, signed
};

/// Generalized Laguerre polynomial L_p^alpha(x) by the ascending three-term
/// recurrence; exact for polynomial degree p. Requires p >= 0, alpha >= 0.
double laguerre(int p, double alpha, double x);

PropagatedParams propagate_params(const BeamGeometry& geom, LGIndex idx, double z);

/// Complex field amplitude of the superposition at a point. The field is
/// L2-normalized over the transverse plane for every z.
Complex evaluate_field(const ModeSuperposition& state, const BeamGeometry& geom,
                       const CylindricalPoint& pt);

/// |Psi|^2; a probability density over the transverse plane (integrates to 1
/// against r dr dphi).
double intensity(const ModeSuperposition& state, const BeamGeometry& geom,
                 const CylindricalPoint& pt);

/// Analytic d(Psi)/dz via the chain rule through w(z), 1/R(z) and the Gouy
/// phase, with dL_p^a(t)/dt = -L_{p-1}^{a+1}(t) for the Laguerre factor.
Complex field_z_derivative(const ModeSuperposition& state, const BeamGeometry& geom,
                           const CylindricalPoint& pt);

/// Dimensionless field sample at rho = r/w0, zeta = z/z_R:
/// Psi = u / w0 and dPsi/dz = du_dzeta / (w0 z_R).
struct FieldSample {
  Complex u;
  Complex du_dzeta;
};

FieldSample evaluate_dimensionless(const ModeSuperposition& state, double rho,
                                   double phi, double zeta);

/// Single weighted term of a superposition. The phi dependence is exactly
/// e^{-i l phi}, which tensor-grid evaluators exploit.
FieldSample evaluate_term(const ModeTerm& term, double rho, double phi, double zeta);

}  // namespace vortex
