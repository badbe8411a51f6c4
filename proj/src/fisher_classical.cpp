#include "vortex/fisher_classical.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

#include "vortex/detail/golden.hpp"
#include "vortex/detail/parallel.hpp"

namespace vortex {

namespace {

constexpr int kMaxRefinements = 4;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct QuadRule {
  std::vector<double> nodes;  // on (-1, 1), ascending
  std::vector<double> weights;
};

// Gauss-Legendre nodes by Newton iteration on P_n; cached per order.
QuadRule make_gauss_legendre(int n) {
  QuadRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0;
      double p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2 * j - 1) * z * p2 - (j - 1) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    rule.weights[i] = rule.weights[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
  return rule;
}

const QuadRule& gauss_legendre(int n) {
  static std::map<int, QuadRule> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_gauss_legendre(n)).first;
  return it->second;
}

// Terms sharing one azimuthal index l behave as a single complex radial
// amplitude; the full phi dependence of the field is sum_g A_g e^{-i l_g phi}.
struct ModeGroup {
  int l;
  std::vector<const ModeTerm*> terms;
};

std::vector<ModeGroup> group_by_l(const ModeSuperposition& state) {
  std::vector<ModeGroup> groups;
  for (const auto& term : state.terms()) {
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const ModeGroup& g) { return g.l == term.idx.l; });
    if (it == groups.end()) {
      groups.push_back({term.idx.l, {&term}});
    } else {
      it->terms.push_back(&term);
    }
  }
  return groups;
}

struct GroupValue {
  Complex u;
  Complex du;
};

GroupValue group_value(const ModeGroup& group, double rho, double zeta) {
  GroupValue out{Complex{0.0, 0.0}, Complex{0.0, 0.0}};
  for (const ModeTerm* term : group.terms) {
    const FieldSample s = evaluate_term(*term, rho, 0.0, zeta);
    out.u += s.u;
    out.du += s.du_dzeta;
  }
  return out;
}

// Exact integral of (alpha + beta cos x + gamma sin x)^2 / (a + b cos x) over
// one period, for a >= b >= 0. Written so every term stays small near the
// degenerate point a = b (where the density q = a + b cos x touches zero).
double rational_trig_fisher(double a, double b, double alpha, double beta, double gamma) {
  const double t = std::sqrt(std::max((a - b) * (a + b), 0.0));
  const double ap = a + t;
  double value = kTwoPi * gamma * gamma / ap;
  if (t > 1e-14 * a) {
    const double bracket =
        alpha * alpha * t + a * (alpha - beta) * (alpha - beta) + 2.0 * alpha * beta * (a - b);
    value += kTwoPi * bracket / (ap * t);
  }
  // at an exact null (t = 0) the omitted part vanishes with the cusp
  return value;
}

// ---------------------------------------------------------------------------
// Radial rule: composite Gauss-Legendre in v = rho^2 on [0, (r_max s)^2],
// split at radii where the closed-form row integral loses smoothness (the
// moving interference nulls |A| = |B| and ring nulls of either group).

struct RadialRule {
  std::vector<double> rho;
  std::vector<double> weight;  // for integration against rho drho
};

void refine_minimum(const std::function<double(double)>& f, double lo, double hi,
                    double& arg, double& value) {
  const auto [x, v] = detail::golden_section_max([&](double r) { return -f(r); }, lo, hi, 1e-12);
  arg = x;
  value = -v;
}

std::vector<double> panel_edges(const std::vector<ModeGroup>& groups, double zeta,
                                double rho_max) {
  std::vector<double> edges{0.0, rho_max};
  if (groups.size() != 2) return edges;

  constexpr int kProbe = 2048;
  const auto mag = [&](const ModeGroup& g, double rho) {
    return std::abs(group_value(g, rho, zeta).u);
  };
  std::vector<double> rho(kProbe);
  std::vector<double> diff(kProbe);
  std::vector<double> m0(kProbe);
  std::vector<double> m1(kProbe);
  double scale = 0.0;
  for (int i = 0; i < kProbe; ++i) {
    rho[i] = rho_max * (i + 0.5) / kProbe;
    m0[i] = mag(groups[0], rho[i]);
    m1[i] = mag(groups[1], rho[i]);
    diff[i] = m0[i] - m1[i];
    scale = std::max(scale, m0[i] + m1[i]);
  }
  const double threshold = 1e-5 * scale;

  // strict dips only, so monotone tails and dead zero plateaus add nothing
  const auto add_minima_of = [&](const std::function<double(double)>& f,
                                 const std::vector<double>& probe) {
    for (int i = 1; i + 1 < kProbe; ++i) {
      if (probe[i] < probe[i - 1] && probe[i] < probe[i + 1] && probe[i] < threshold) {
        double arg = rho[i];
        double value = probe[i];
        refine_minimum(f, rho[i - 1], rho[i + 1], arg, value);
        if (value < threshold) edges.push_back(arg);
      }
    }
  };
  std::vector<double> abs_diff(kProbe);
  for (int i = 0; i < kProbe; ++i) abs_diff[i] = std::abs(diff[i]);
  add_minima_of([&](double r) { return std::abs(mag(groups[0], r) - mag(groups[1], r)); },
                abs_diff);
  add_minima_of([&](double r) { return mag(groups[0], r); }, m0);
  add_minima_of([&](double r) { return mag(groups[1], r); }, m1);
  // sign changes of |A| - |B|, skipping the numerically void tail
  for (int i = 1; i < kProbe; ++i)
    if ((diff[i - 1] < 0.0) != (diff[i] < 0.0) &&
        std::max(m0[i] + m1[i], m0[i - 1] + m1[i - 1]) > 1e-12 * scale) {
      double lo = rho[i - 1];
      double hi = rho[i];
      for (int iter = 0; iter < 80; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double fm = mag(groups[0], mid) - mag(groups[1], mid);
        ((fm < 0.0) == (diff[i - 1] < 0.0) ? lo : hi) = mid;
      }
      edges.push_back(0.5 * (lo + hi));
    }

  std::sort(edges.begin(), edges.end());
  std::vector<double> unique;
  for (const double e : edges)
    if (unique.empty() || e - unique.back() > 1e-9 * rho_max) unique.push_back(e);
  if (unique.back() < rho_max - 1e-9 * rho_max) unique.push_back(rho_max);
  if (unique.size() > 17) {  // pathological states: cap the panel count
    unique.erase(unique.begin() + 16, unique.end() - 1);
  }
  return unique;
}

RadialRule build_radial_rule(const std::vector<ModeGroup>& groups, double zeta,
                             int n_radial, double r_max_factor) {
  const double s = std::sqrt(1.0 + zeta * zeta);
  const double rho_max = r_max_factor * s;
  const std::vector<double> edges = panel_edges(groups, zeta, rho_max);
  const QuadRule& rule = gauss_legendre(n_radial);

  RadialRule out;
  out.rho.reserve(n_radial * (edges.size() - 1));
  out.weight.reserve(n_radial * (edges.size() - 1));
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double v_lo = edges[p] * edges[p];
    const double v_hi = edges[p + 1] * edges[p + 1];
    const double half = 0.5 * (v_hi - v_lo);
    for (int i = 0; i < n_radial; ++i) {
      const double v = v_lo + half * (rule.nodes[i] + 1.0);
      out.rho.push_back(std::sqrt(v));
      out.weight.push_back(0.5 * half * rule.weights[i]);  // rho drho = dv/2
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Closed-phi path: states with at most two distinct l values. The azimuthal
// integral of every row is evaluated in closed form, so only the radial
// direction is quadratured.

CfiEstimates integrate_closed_phi(const std::vector<ModeGroup>& groups, double zeta,
                                  int n_radial, double r_max_factor,
                                  double density_floor) {
  const RadialRule rule = build_radial_rule(groups, zeta, n_radial, r_max_factor);
  const std::size_t n = rule.rho.size();
  const bool pair = groups.size() == 2;

  struct Row {
    double a, b, alpha, beta, gamma;
  };
  std::vector<Row> rows(n);
  double peak = 0.0;     // max row density a + b
  double a_max = 0.0;    // max of the radial marginal density
  double h0 = 0.0;       // azimuthal marginal: h(phi) = h0 + 2 Re(W e^{-ik phi})
  double dh0 = 0.0;
  Complex w_int{0.0, 0.0};
  Complex dw_int{0.0, 0.0};

  for (std::size_t i = 0; i < n; ++i) {
    const GroupValue g0 = group_value(groups[0], rule.rho[i], zeta);
    GroupValue g1{Complex{0.0, 0.0}, Complex{0.0, 0.0}};
    if (pair) g1 = group_value(groups[1], rule.rho[i], zeta);

    const double a = std::norm(g0.u) + std::norm(g1.u);
    const double alpha = 2.0 * ((std::conj(g0.u) * g0.du).real() +
                                (std::conj(g1.u) * g1.du).real());
    Complex w{0.0, 0.0};
    Complex dw{0.0, 0.0};
    if (pair) {
      w = g0.u * std::conj(g1.u);
      dw = g0.du * std::conj(g1.u) + g0.u * std::conj(g1.du);
    }
    const double b = 2.0 * std::abs(w);
    const Complex v = b > 0.0 ? dw * std::conj(w) / std::abs(w) : dw;
    rows[i] = {a, b, alpha, 2.0 * v.real(), 2.0 * v.imag()};

    peak = std::max(peak, a + b);
    a_max = std::max(a_max, a);
    h0 += a * rule.weight[i];
    dh0 += alpha * rule.weight[i];
    w_int += w * rule.weight[i];
    dw_int += dw * rule.weight[i];
  }

  CfiEstimates out{0.0, 0.0, 0.0};
  const double row_floor = density_floor * peak;
  const double m_floor = density_floor * a_max;
  for (std::size_t i = 0; i < n; ++i) {
    const Row& r = rows[i];
    if (r.a + r.b > row_floor)
      out.total += rational_trig_fisher(r.a, r.b, r.alpha, r.beta, r.gamma) * rule.weight[i];
    if (r.a > m_floor) out.radial += kTwoPi * r.alpha * r.alpha / r.a * rule.weight[i];
  }
  const double bw = 2.0 * std::abs(w_int);
  const Complex v = bw > 0.0 ? dw_int * std::conj(w_int) / std::abs(w_int) : dw_int;
  out.azimuthal = rational_trig_fisher(h0, bw, dh0, 2.0 * v.real(), 2.0 * v.imag());
  return out;
}

// ---------------------------------------------------------------------------
// General tensor path: three or more distinct l values. Rows are assembled on
// a phi grid; fine for same-order (self-similar) states, and honestly flagged
// through the refinement contract otherwise.

struct TensorTables {
  std::vector<Complex> u;        // radial factor per group
  std::vector<Complex> du;
  std::vector<Complex> azimuth;  // e^{-i l phi_j}
};

CfiEstimates integrate_tensor(const std::vector<ModeGroup>& groups, double zeta,
                              int n_radial, int n_phi, double r_max_factor,
                              double density_floor) {
  const RadialRule rule = build_radial_rule(groups, zeta, n_radial, r_max_factor);
  const std::size_t n_r = rule.rho.size();
  const double w_phi = kTwoPi / n_phi;

  std::vector<TensorTables> tables(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    tables[g].u.resize(n_r);
    tables[g].du.resize(n_r);
    for (std::size_t i = 0; i < n_r; ++i) {
      const GroupValue v = group_value(groups[g], rule.rho[i], zeta);
      tables[g].u[i] = v.u;
      tables[g].du[i] = v.du;
    }
    tables[g].azimuth.resize(n_phi);
    for (int j = 0; j < n_phi; ++j) {
      const double ang = -groups[g].l * (w_phi * j);
      tables[g].azimuth[j] = Complex{std::cos(ang), std::sin(ang)};
    }
  }

  const auto fill_row = [&](std::size_t i, std::vector<double>& q, std::vector<double>& dq) {
    for (int j = 0; j < n_phi; ++j) {
      Complex u{0.0, 0.0};
      Complex du{0.0, 0.0};
      for (const TensorTables& tab : tables) {
        u += tab.u[i] * tab.azimuth[j];
        du += tab.du[i] * tab.azimuth[j];
      }
      q[j] = std::norm(u);
      dq[j] = 2.0 * (std::conj(u) * du).real();
    }
  };

  std::vector<double> q(n_phi);
  std::vector<double> dq(n_phi);
  std::vector<double> m(n_r, 0.0);
  std::vector<double> dm(n_r, 0.0);
  std::vector<double> h(n_phi, 0.0);
  std::vector<double> dh(n_phi, 0.0);
  double q_max = 0.0;
  for (std::size_t i = 0; i < n_r; ++i) {
    fill_row(i, q, dq);
    for (int j = 0; j < n_phi; ++j) {
      q_max = std::max(q_max, q[j]);
      m[i] += q[j];
      dm[i] += dq[j];
      h[j] += q[j] * rule.weight[i];
      dh[j] += dq[j] * rule.weight[i];
    }
    m[i] *= w_phi;
    dm[i] *= w_phi;
  }

  CfiEstimates out{0.0, 0.0, 0.0};
  const double q_floor = density_floor * q_max;
  for (std::size_t i = 0; i < n_r; ++i) {
    fill_row(i, q, dq);
    double row = 0.0;
    for (int j = 0; j < n_phi; ++j)
      if (q[j] > q_floor) row += dq[j] * dq[j] / q[j];
    out.total += row * rule.weight[i] * w_phi;
  }
  const double m_floor = density_floor * *std::max_element(m.begin(), m.end());
  for (std::size_t i = 0; i < n_r; ++i)
    if (m[i] > m_floor) out.radial += dm[i] * dm[i] / m[i] * rule.weight[i];
  const double h_floor = density_floor * *std::max_element(h.begin(), h.end());
  for (int j = 0; j < n_phi; ++j)
    if (h[j] > h_floor) out.azimuthal += dh[j] * dh[j] / h[j] * w_phi;
  return out;
}

CfiEstimates integrate(const ModeSuperposition& state, double zeta, int n_radial,
                       int n_phi, double r_max_factor, double density_floor) {
  const std::vector<ModeGroup> groups = group_by_l(state);
  if (groups.empty()) return {0.0, 0.0, 0.0};
  if (groups.size() <= 2)
    return integrate_closed_phi(groups, zeta, n_radial, r_max_factor, density_floor);
  return integrate_tensor(groups, zeta, n_radial, n_phi, r_max_factor, density_floor);
}

bool close_enough(double a, double b, double tol) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale <= 1e-12 || std::abs(a - b) <= tol * scale;
}

struct AdaptiveResult {
  CfiEstimates values;
  CfiEstimates previous;
  bool converged;
};

AdaptiveResult cfi_adaptive(const ModeSuperposition& state, const BeamGeometry& geom,
                            double z, const QuadratureConfig& cfg) {
  cfg.validate();
  const double zeta = z / geom.rayleigh_range();
  CfiEstimates prev = integrate(state, zeta, cfg.n_radial, cfg.n_azimuthal,
                                cfg.r_max_factor, cfg.density_floor);
  CfiEstimates cur = prev;
  for (int level = 1; level <= kMaxRefinements; ++level) {
    cur = integrate(state, zeta, cfg.n_radial << level, cfg.n_azimuthal << level,
                    cfg.r_max_factor, cfg.density_floor);
    if (close_enough(prev.total, cur.total, cfg.refine_tolerance) &&
        close_enough(prev.radial, cur.radial, cfg.refine_tolerance) &&
        close_enough(prev.azimuthal, cur.azimuthal, cfg.refine_tolerance))
      return {cur, prev, true};
    prev = cur;
  }
  return {cur, prev, false};
}

}  // namespace

void QuadratureConfig::validate() const {
  if (n_radial < 8 || n_azimuthal < 8)
    throw std::invalid_argument("QuadratureConfig: n_radial and n_azimuthal must be >= 8");
  if (!(r_max_factor >= 4.0))
    throw std::invalid_argument("QuadratureConfig: r_max_factor must be >= 4");
  if (!(density_floor > 0.0) || density_floor > 1e-8)
    throw std::invalid_argument("QuadratureConfig: density_floor must be in (0, 1e-8]");
  if (!(refine_tolerance > 0.0) || refine_tolerance > 1e-3)
    throw std::invalid_argument("QuadratureConfig: refine_tolerance must be in (0, 1e-3]");
}

ConvergenceError::ConvergenceError(double previous_estimate, double last_estimate)
    : std::runtime_error("quadrature refinement did not converge; last estimates " +
                         std::to_string(previous_estimate) + " and " +
                         std::to_string(last_estimate)),
      previous_(previous_estimate),
      last_(last_estimate) {}

CfiEstimates cfi_fixed_grid(const ModeSuperposition& state, const BeamGeometry& geom,
                            double z, int n_radial, int n_azimuthal,
                            double r_max_factor, double density_floor) {
  return integrate(state, z / geom.rayleigh_range(), n_radial, n_azimuthal,
                   r_max_factor, density_floor);
}

double cfi_total(const ModeSuperposition& state, const BeamGeometry& geom, double z,
                 const QuadratureConfig& cfg) {
  const AdaptiveResult r = cfi_adaptive(state, geom, z, cfg);
  if (!r.converged) throw ConvergenceError(r.previous.total, r.values.total);
  return r.values.total;
}

double cfi_radial(const ModeSuperposition& state, const BeamGeometry& geom, double z,
                  const QuadratureConfig& cfg) {
  const AdaptiveResult r = cfi_adaptive(state, geom, z, cfg);
  if (!r.converged) throw ConvergenceError(r.previous.radial, r.values.radial);
  return r.values.radial;
}

double cfi_azimuthal(const ModeSuperposition& state, const BeamGeometry& geom, double z,
                     const QuadratureConfig& cfg) {
  const AdaptiveResult r = cfi_adaptive(state, geom, z, cfg);
  if (!r.converged) throw ConvergenceError(r.previous.azimuthal, r.values.azimuthal);
  return r.values.azimuthal;
}

double cfi_pure_closed(LGIndex idx, const BeamGeometry& geom, double z) {
  const double zr = geom.rayleigh_range();
  const double zr_over_r = z * zr / (z * z + zr * zr);  // z_R/R(z), finite at z = 0
  return qfi_pure(idx).value * 4.0 * zr_over_r * zr_over_r;
}

double laguerre_product_integral(double mu, int p, int l, int p_prime, int l_prime) {
  if (!(mu > -1.0)) throw std::invalid_argument("laguerre_product_integral: mu must be > -1");
  if (p < 0 || p_prime < 0 || l < 0 || l_prime < 0)
    throw std::invalid_argument("laguerre_product_integral: indices must be >= 0");
  const auto general_binomial = [](double x, int m) {
    double b = 1.0;
    for (int j = 1; j <= m; ++j) b *= (x - j + 1) / j;
    return b;
  };
  double sum = 0.0;
  for (int k = 0; k <= std::min(p, p_prime); ++k)
    sum += general_binomial(mu - l, p - k) * general_binomial(mu - l_prime, p_prime - k) *
           general_binomial(mu + k, k);
  const double sign = ((p + p_prime) % 2 == 0) ? 1.0 : -1.0;
  return sign * std::tgamma(mu + 1.0) * sum;
}

OptimalPlane find_optimal_plane(const ModeSuperposition& state, const BeamGeometry& geom,
                                std::pair<double, double> z_range,
                                const QuadratureConfig& cfg) {
  const double zr = geom.rayleigh_range();
  const auto [lo, hi] = z_range;
  if (!(lo > 0.0) || !(hi > lo) || hi > 5.0 * zr * (1.0 + 1e-12))
    throw std::invalid_argument("find_optimal_plane: range must satisfy 0 < lo < hi <= 5 z_R");

  constexpr int kCoarse = 64;
  std::vector<double> grid(kCoarse);
  std::vector<double> value(kCoarse);
  for (int i = 0; i < kCoarse; ++i) grid[i] = lo + (hi - lo) * i / (kCoarse - 1);
  detail::parallel_for(kCoarse,
                       [&](std::size_t i) { value[i] = cfi_total(state, geom, grid[i], cfg); });
  const int best = int(std::max_element(value.begin(), value.end()) - value.begin());
  const double a = grid[std::max(best - 1, 0)];
  const double b = grid[std::min(best + 1, kCoarse - 1)];
  const auto [z_opt, f_max] = detail::golden_section_max(
      [&](double z) { return cfi_total(state, geom, z, cfg); }, a, b, 1e-4 * zr);
  return {z_opt, f_max};
}

FisherReport scan_report(const ModeSuperposition& state, const BeamGeometry& geom,
                         std::span<const double> z_grid_over_zr,
                         const QuadratureConfig& cfg) {
  cfg.validate();
  const std::size_t n = z_grid_over_zr.size();
  FisherReport report;
  report.z_grid.assign(z_grid_over_zr.begin(), z_grid_over_zr.end());
  report.f_total.resize(n);
  report.f_radial.resize(n);
  report.f_azimuthal.resize(n);
  report.converged.resize(n);
  report.qfi_reference = qfi_oracle(state);
  const double zr = geom.rayleigh_range();
  detail::parallel_for(n, [&](std::size_t i) {
    const AdaptiveResult r = cfi_adaptive(state, geom, z_grid_over_zr[i] * zr, cfg);
    report.f_total[i] = r.values.total;
    report.f_radial[i] = r.values.radial;
    report.f_azimuthal[i] = r.values.azimuthal;
    report.converged[i] = r.converged ? 1 : 0;
  });
  return report;
}

}  // namespace vortex
