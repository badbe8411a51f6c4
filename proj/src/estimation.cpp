#include "vortex/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "vortex/detail/golden.hpp"
#include "vortex/detail/parallel.hpp"
#include "vortex/fisher_quantum.hpp"

namespace vortex {

namespace {

constexpr double kLogDensityFloor = 1e-300;

// splitmix64 finalizer; counter-based so trial seeds do not depend on
// execution order.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t z = seed + (counter + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// mt19937_64 output mapped to [0, 1); the engine sequence is pinned by the
// standard, so results are reproducible across platforms.
double uniform01(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

double log_factorial(double k) {
  static const std::vector<double> table = [] {
    std::vector<double> t(1 << 16);
    t[0] = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) t[i] = t[i - 1] + std::log(double(i));
    return t;
  }();
  const auto n = std::size_t(k);
  if (n < table.size()) return table[n];
  return std::lgamma(k + 1.0);
}

int sample_poisson(double lambda, std::mt19937_64& rng) {
  if (!(lambda > 0.0)) return 0;
  if (lambda < 10.0) {
    const double limit = std::exp(-lambda);
    int k = 0;
    double prod = 1.0;
    do {
      ++k;
      prod *= uniform01(rng);
    } while (prod > limit);
    return k - 1;
  }
  // Hoermann's PTRS transformed rejection
  const double b = 0.931 + 2.53 * std::sqrt(lambda);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  const double log_lambda = std::log(lambda);
  while (true) {
    const double u = uniform01(rng) - 0.5;
    const double v = uniform01(rng);
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= v_r) return int(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        k * log_lambda - lambda - log_factorial(k))
      return int(k);
  }
}

// Tabulated intensity on a fine polar grid with inverse-CDF sampling:
// piecewise-linear radial CDF, conditional azimuthal CDFs blended between
// the two neighboring radial rows.
class DensitySampler {
 public:
  DensitySampler(const ModeSuperposition& state, double zeta, int n_radial = 2048,
                 int n_phi = 512, double r_max_factor = 8.0)
      : n_phi_(n_phi) {
    const double s = std::sqrt(1.0 + zeta * zeta);
    const double rho_max = r_max_factor * s;
    rho_.resize(n_radial);
    for (int i = 0; i < n_radial; ++i) rho_[i] = rho_max * i / (n_radial - 1);

    // tensor evaluation: radial factors per term, azimuthal phasors per term
    const std::size_t n_terms = state.size();
    std::vector<std::vector<Complex>> rad(n_terms, std::vector<Complex>(n_radial));
    std::vector<std::vector<Complex>> az(n_terms, std::vector<Complex>(n_phi));
    for (std::size_t t = 0; t < n_terms; ++t) {
      const ModeTerm& term = state.terms()[t];
      for (int i = 0; i < n_radial; ++i) rad[t][i] = evaluate_term(term, rho_[i], 0.0, zeta).u;
      for (int j = 0; j < n_phi; ++j) {
        const double ang = -term.idx.l * (2.0 * std::numbers::pi * j / n_phi);
        az[t][j] = Complex{std::cos(ang), std::sin(ang)};
      }
    }

    az_cdf_.assign(std::size_t(n_radial) * (n_phi + 1), 0.0);
    std::vector<double> row_weight(n_radial);
    for (int i = 0; i < n_radial; ++i) {
      double* cdf = &az_cdf_[std::size_t(i) * (n_phi + 1)];
      double acc = 0.0;
      for (int j = 0; j < n_phi; ++j) {
        Complex u{0.0, 0.0};
        for (std::size_t t = 0; t < n_terms; ++t) u += rad[t][i] * az[t][j];
        acc += std::norm(u);
        cdf[j + 1] = acc;
      }
      row_weight[i] = acc * rho_[i];
      if (acc > 0.0) {
        for (int j = 1; j <= n_phi; ++j) cdf[j] /= acc;
      } else {
        for (int j = 1; j <= n_phi; ++j) cdf[j] = double(j) / n_phi;  // void row
      }
    }

    radial_cdf_.resize(n_radial);
    radial_cdf_[0] = 0.0;
    for (int i = 1; i < n_radial; ++i)
      radial_cdf_[i] = radial_cdf_[i - 1] +
                       0.5 * (row_weight[i - 1] + row_weight[i]) * (rho_[i] - rho_[i - 1]);
    const double total = radial_cdf_.back();
    for (double& c : radial_cdf_) c /= total;
  }

  // (rho, phi) draw
  std::pair<double, double> sample(std::mt19937_64& rng) const {
    const double u1 = uniform01(rng);
    const auto it = std::upper_bound(radial_cdf_.begin(), radial_cdf_.end(), u1);
    const int k = std::clamp(int(it - radial_cdf_.begin()) - 1, 0, int(rho_.size()) - 2);
    const double span = radial_cdf_[k + 1] - radial_cdf_[k];
    const double f = span > 0.0 ? (u1 - radial_cdf_[k]) / span : 0.5;
    const double rho = rho_[k] + f * (rho_[k + 1] - rho_[k]);

    const double u2 = uniform01(rng);
    const double* lo = &az_cdf_[std::size_t(k) * (n_phi_ + 1)];
    const double* hi = lo + (n_phi_ + 1);
    int a = 0;
    int b = n_phi_;
    while (b - a > 1) {  // invert the blended conditional CDF
      const int mid = (a + b) / 2;
      const double c = (1.0 - f) * lo[mid] + f * hi[mid];
      (c <= u2 ? a : b) = mid;
    }
    const double ca = (1.0 - f) * lo[a] + f * hi[a];
    const double cb = (1.0 - f) * lo[b] + f * hi[b];
    const double frac = cb > ca ? (u2 - ca) / (cb - ca) : 0.5;
    const double phi = 2.0 * std::numbers::pi * (a + frac) / n_phi_;
    return {rho, phi};
  }

 private:
  std::vector<double> rho_;
  std::vector<double> radial_cdf_;
  std::vector<double> az_cdf_;  // n_radial rows of n_phi+1 cumulative values
  int n_phi_;
};

double log_likelihood(std::span<const double> rho, std::span<const double> phi,
                      const ModeSuperposition& state, double zeta) {
  double ll = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const double q = std::norm(evaluate_dimensionless(state, rho[i], phi[i], zeta).u);
    ll += std::log(std::max(q, kLogDensityFloor));
  }
  return ll;
}

}  // namespace

void EstimationConfig::validate() const {
  if (!(n_photons > 0.0))
    throw std::invalid_argument("EstimationConfig: n_photons must be > 0");
  if (n_trials < 1) throw std::invalid_argument("EstimationConfig: n_trials must be >= 1");
  if (!(search_range.first < search_range.second))
    throw std::invalid_argument("EstimationConfig: empty search range");
  if (!(z_true > search_range.first) || !(z_true < search_range.second))
    throw std::invalid_argument("EstimationConfig: z_true must be interior to search_range");
}

std::vector<PhotonHit> sample_photons(const ModeSuperposition& state,
                                      const BeamGeometry& geom, double z_over_zr,
                                      double n_expected, std::uint64_t seed) {
  if (n_expected < 0.0)
    throw std::invalid_argument("sample_photons: n_expected must be >= 0");
  std::mt19937_64 rng(seed);
  const int count = sample_poisson(n_expected, rng);
  std::vector<PhotonHit> hits;
  hits.reserve(count);
  if (count == 0) return hits;
  const DensitySampler sampler(state, z_over_zr);
  for (int i = 0; i < count; ++i) {
    const auto [rho, phi] = sampler.sample(rng);
    hits.push_back({rho * geom.w0, phi});
  }
  return hits;
}

MLEstimate ml_estimate(std::span<const PhotonHit> samples, const ModeSuperposition& state,
                       const BeamGeometry& geom,
                       std::pair<double, double> search_range) {
  if (samples.empty()) throw std::invalid_argument("ml_estimate: empty sample set");
  const auto [lo, hi] = search_range;
  if (!(lo < hi)) throw std::invalid_argument("ml_estimate: empty search range");

  std::vector<double> rho(samples.size());
  std::vector<double> phi(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    rho[i] = samples[i].r / geom.w0;
    phi[i] = samples[i].phi;
  }
  const auto objective = [&](double zeta) { return log_likelihood(rho, phi, state, zeta); };

  constexpr int kCoarse = 64;
  int best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kCoarse; ++i) {
    const double z = lo + (hi - lo) * i / (kCoarse - 1);
    const double value = objective(z);
    if (value > best_value) {
      best_value = value;
      best = i;
    }
  }
  const double a = lo + (hi - lo) * std::max(best - 1, 0) / (kCoarse - 1);
  const double b = lo + (hi - lo) * std::min(best + 1, kCoarse - 1) / (kCoarse - 1);
  const auto [z_hat, ll] = detail::golden_section_max(objective, a, b, 1e-4);
  (void)ll;
  const double edge_tol = 1e-3 * (hi - lo);
  const bool boundary = (z_hat - lo) <= edge_tol || (hi - z_hat) <= edge_tol;
  return {z_hat, boundary};
}

EstimationRun crb_study(const EstimationConfig& cfg, const ModeSuperposition& state,
                        const BeamGeometry& geom, unsigned n_threads) {
  cfg.validate();
  const DensitySampler sampler(state, cfg.z_true);

  std::vector<double> estimates(cfg.n_trials,
                                std::numeric_limits<double>::quiet_NaN());
  std::vector<char> flagged(cfg.n_trials, 0);
  detail::parallel_for(
      std::size_t(cfg.n_trials),
      [&](std::size_t trial) {
        std::mt19937_64 rng(mix_seed(cfg.seed, trial));
        const int count = sample_poisson(cfg.n_photons, rng);
        if (count == 0) {  // empty frame carries no information
          flagged[trial] = 1;
          return;
        }
        std::vector<PhotonHit> hits;
        hits.reserve(count);
        for (int i = 0; i < count; ++i) {
          const auto [rho, phi] = sampler.sample(rng);
          hits.push_back({rho * geom.w0, phi});
        }
        const MLEstimate ml = ml_estimate(hits, state, geom, cfg.search_range);
        estimates[trial] = ml.z_hat;
        if (ml.at_boundary) flagged[trial] = 1;
      },
      n_threads);

  EstimationRun run;
  run.estimates = std::move(estimates);
  run.n_boundary_flags = int(std::count(flagged.begin(), flagged.end(), 1));
  run.reliable = run.n_boundary_flags <= cfg.n_trials / 20;

  // two-pass moments with compensated sums, in fixed trial order
  std::size_t usable = 0;
  double sum = 0.0;
  double comp = 0.0;
  for (const double e : run.estimates)
    if (std::isfinite(e)) {
      ++usable;
      const double y = e - comp;
      const double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
    }
  run.mean_estimate = usable > 0 ? sum / double(usable)
                                 : std::numeric_limits<double>::quiet_NaN();
  run.variance_defined = usable >= 2;
  if (run.variance_defined) {
    double ss = 0.0;
    double ss_comp = 0.0;
    for (const double e : run.estimates)
      if (std::isfinite(e)) {
        const double d = (e - run.mean_estimate) * (e - run.mean_estimate);
        const double y = d - ss_comp;
        const double t = ss + y;
        ss_comp = (t - ss) - y;
        ss = t;
      }
    run.empirical_variance = ss / double(usable - 1);
  } else {
    run.empirical_variance = std::numeric_limits<double>::quiet_NaN();
  }

  const double zr = geom.rayleigh_range();
  const double fisher = cfi_total(state, geom, cfg.z_true * zr);
  run.crb_classical = 1.0 / (cfg.n_photons * fisher);
  run.crb_quantum = 1.0 / (cfg.n_photons * qfi_oracle(state).value);
  run.efficiency = run.crb_classical / run.empirical_variance;
  return run;
}

}  // namespace vortex
