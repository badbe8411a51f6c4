#include "vortex/beam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace vortex {

namespace {

// log(n!) table; sized for mode orders far beyond anything the quadratures
// can resolve anyway.
constexpr int kLogFactorialSize = 4096;

double log_factorial(int n) {
  static const std::vector<double> table = [] {
    std::vector<double> t(kLogFactorialSize);
    t[0] = 0.0;
    for (int i = 1; i < kLogFactorialSize; ++i) t[i] = t[i - 1] + std::log(double(i));
    return t;
  }();
  if (n < kLogFactorialSize) return table[n];
  return std::lgamma(double(n) + 1.0);
}

// sqrt(2 p! / (pi (p+|l|)!)), evaluated in log space so large indices do not
// overflow the factorials.
double mode_norm(int p, int abs_l) {
  const double log_n = 0.5 * (std::log(2.0 / std::numbers::pi) +
                              log_factorial(p) - log_factorial(p + abs_l));
  return std::exp(log_n);
}

struct TermGeometry {
  double s2;      // 1 + zeta^2
  double s;       // sqrt(s2)
  double curv;    // zeta / s2 == z_R / R
  double atan_z;  // atan(zeta)
};

TermGeometry term_geometry(double zeta) {
  const double s2 = 1.0 + zeta * zeta;
  return {s2, std::sqrt(s2), zeta / s2, std::atan(zeta)};
}

// Field of one LG term at (rho, phi, zeta), together with its zeta-derivative.
FieldSample term_sample(const ModeTerm& term, const TermGeometry& g, double rho,
                        double phi, double zeta) {
  const int p = term.idx.p;
  const int al = std::abs(term.idx.l);
  const double x = std::numbers::sqrt2 * rho / g.s;
  const double t = x * x;
  const double order = 2 * p + al + 1;

  const double amp = mode_norm(p, al) / g.s * std::pow(x, al) * std::exp(-rho * rho / g.s2);
  const double lag = laguerre(p, al, t);
  const double lag_up = p > 0 ? laguerre(p - 1, al + 1, t) : 0.0;

  const double phase = rho * rho * g.curv - term.idx.l * phi - order * g.atan_z;
  const Complex carrier = term.coeff * amp * Complex{std::cos(phase), std::sin(phase)};

  const double re = zeta * (t - al - 1) / g.s2;
  const double im = rho * rho * (1.0 - zeta * zeta) / (g.s2 * g.s2) - order / g.s2;
  const Complex dlag = lag * Complex{re, im} + 2.0 * zeta * t / g.s2 * lag_up;

  return {carrier * lag, carrier * dlag};
}

}  // namespace

BeamGeometry::BeamGeometry(double waist_radius, double wavenumber)
    : w0(waist_radius), k(wavenumber) {
  if (!(w0 > 0.0)) throw std::invalid_argument("BeamGeometry: waist radius must be > 0");
  if (!(k > 0.0)) throw std::invalid_argument("BeamGeometry: wavenumber must be > 0");
}

ModeSuperposition::ModeSuperposition(std::vector<ModeTerm> terms) : terms_(std::move(terms)) {
  double norm2 = 0.0;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (terms_[i].idx.p < 0)
      throw std::invalid_argument("ModeSuperposition: radial index p must be >= 0");
    for (std::size_t j = 0; j < i; ++j)
      if (terms_[i].idx == terms_[j].idx)
        throw std::invalid_argument("ModeSuperposition: duplicate LG index (p=" +
                                    std::to_string(terms_[i].idx.p) +
                                    ", l=" + std::to_string(terms_[i].idx.l) + ")");
    norm2 += std::norm(terms_[i].coeff);
  }
  if (!terms_.empty()) {
    if (!(norm2 > 0.0))
      throw std::invalid_argument("ModeSuperposition: zero-norm coefficient vector");
    const double scale = 1.0 / std::sqrt(norm2);
    for (auto& t : terms_) t.coeff *= scale;
  }
}

ModeSuperposition ModeSuperposition::single(LGIndex idx) {
  return ModeSuperposition({{idx, Complex{1.0, 0.0}}});
}

ModeSuperposition ModeSuperposition::equal_pair(LGIndex a, LGIndex b) {
  return ModeSuperposition({{a, Complex{1.0, 0.0}}, {b, Complex{1.0, 0.0}}});
}

double laguerre(int p, double alpha, double x) {
  if (p < 0) throw std::invalid_argument("laguerre: p must be >= 0");
  if (p == 0) return 1.0;
  double prev = 1.0;
  double cur = 1.0 + alpha - x;
  for (int k = 1; k < p; ++k) {
    const double next = ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1);
    prev = cur;
    cur = next;
  }
  return cur;
}

PropagatedParams propagate_params(const BeamGeometry& geom, LGIndex idx, double z) {
  const double zr = geom.rayleigh_range();
  const double zeta = z / zr;
  const double inv_r = z / (z * z + zr * zr);
  PropagatedParams out;
  out.inv_radius = inv_r;
  out.radius_of_curvature =
      inv_r == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / inv_r;
  out.beam_radius = geom.w0 * std::sqrt(1.0 + zeta * zeta);
  out.gouy = (2 * idx.p + std::abs(idx.l) + 1) * std::atan(zeta);
  return out;
}

FieldSample evaluate_dimensionless(const ModeSuperposition& state, double rho,
                                   double phi, double zeta) {
  const TermGeometry g = term_geometry(zeta);
  FieldSample out{Complex{0.0, 0.0}, Complex{0.0, 0.0}};
  for (const auto& term : state.terms()) {
    const FieldSample s = term_sample(term, g, rho, phi, zeta);
    out.u += s.u;
    out.du_dzeta += s.du_dzeta;
  }
  return out;
}

FieldSample evaluate_term(const ModeTerm& term, double rho, double phi, double zeta) {
  return term_sample(term, term_geometry(zeta), rho, phi, zeta);
}

Complex evaluate_field(const ModeSuperposition& state, const BeamGeometry& geom,
                       const CylindricalPoint& pt) {
  const FieldSample s = evaluate_dimensionless(state, pt.r / geom.w0, pt.phi,
                                               pt.z / geom.rayleigh_range());
  return s.u / geom.w0;
}

double intensity(const ModeSuperposition& state, const BeamGeometry& geom,
                 const CylindricalPoint& pt) {
  return std::norm(evaluate_field(state, geom, pt));
}

Complex field_z_derivative(const ModeSuperposition& state, const BeamGeometry& geom,
                           const CylindricalPoint& pt) {
  const FieldSample s = evaluate_dimensionless(state, pt.r / geom.w0, pt.phi,
                                               pt.z / geom.rayleigh_range());
  return s.du_dzeta / (geom.w0 * geom.rayleigh_range());
}

}  // namespace vortex
