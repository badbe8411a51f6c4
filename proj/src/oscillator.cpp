#include "vortex/oscillator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>

namespace vortex {

namespace {

// Shell m = n_+ + n_- starts at offset m(m+1)/2; states ordered by n_+ within it.
std::size_t basis_index(FockState f) {
  const std::size_t m = std::size_t(f.n_plus + f.n_minus);
  return m * (m + 1) / 2 + std::size_t(f.n_plus);
}

double binomial(int n, int k) {
  double b = 1.0;
  for (int j = 1; j <= k; ++j) b *= double(n - j + 1) / double(j);
  return b;
}

double sqrt_factorial_ratio(int num, int den) {
  // sqrt(num! / den!) for small occupation numbers
  return std::exp(0.5 * (std::lgamma(double(num) + 1.0) - std::lgamma(double(den) + 1.0)));
}

}  // namespace

LGIndex lg_index_of(FockState f) {
  return {std::min(f.n_plus, f.n_minus), f.n_plus - f.n_minus};
}

FockState fock_state_of(LGIndex idx) {
  return {idx.p + std::max(idx.l, 0), idx.p + std::max(-idx.l, 0)};
}

GeneratorMatrix::GeneratorMatrix(int cutoff) : cutoff_(cutoff) {
  if (cutoff < 0) throw std::invalid_argument("GeneratorMatrix: cutoff must be >= 0");
  const std::size_t dim = std::size_t(cutoff + 1) * std::size_t(cutoff + 2) / 2;
  diag_.resize(dim);
  for (int m = 0; m <= cutoff; ++m)
    for (int np = 0; np <= m; ++np) diag_[basis_index({np, m - np})] = double(m + 1);
  // raising part -a_+^dag a_-^dag, stored once per coupled pair
  for (int m = 0; m + 2 <= cutoff; ++m)
    for (int np = 0; np <= m; ++np) {
      const int nm = m - np;
      couplings_.push_back({basis_index({np, nm}), basis_index({np + 1, nm + 1}),
                            -std::sqrt(double(np + 1) * double(nm + 1))});
    }
}

std::size_t GeneratorMatrix::index_of(FockState f) const {
  if (f.n_plus < 0 || f.n_minus < 0)
    throw std::invalid_argument("GeneratorMatrix: negative occupation");
  if (f.n_plus + f.n_minus > cutoff_)
    throw CutoffError("GeneratorMatrix: state |" + std::to_string(f.n_plus) + "," +
                      std::to_string(f.n_minus) + "> above cutoff " +
                      std::to_string(cutoff_));
  return basis_index(f);
}

FockState GeneratorMatrix::basis_state(std::size_t index) const {
  int m = 0;
  while (std::size_t(m + 1) * std::size_t(m + 2) / 2 <= index) ++m;
  const int np = int(index - std::size_t(m) * std::size_t(m + 1) / 2);
  return {np, m - np};
}

double GeneratorMatrix::element(FockState row, FockState col) const {
  const std::size_t i = index_of(row);
  const std::size_t j = index_of(col);
  if (i == j) return diag_[i];
  for (const auto& c : couplings_)
    if ((c.lower == i && c.upper == j) || (c.lower == j && c.upper == i)) return c.value;
  return 0.0;
}

void GeneratorMatrix::apply(std::span<const Complex> in, std::span<Complex> out) const {
  if (in.size() != dimension() || out.size() != dimension())
    throw std::invalid_argument("GeneratorMatrix::apply: dimension mismatch");
  for (std::size_t i = 0; i < dimension(); ++i) out[i] = diag_[i] * in[i];
  for (const auto& c : couplings_) {
    out[c.lower] += c.value * in[c.upper];
    out[c.upper] += c.value * in[c.lower];
  }
}

GeneratorMatrix build_generator(int cutoff) { return GeneratorMatrix(cutoff); }

double generator_variance(const ModeSuperposition& state, int cutoff) {
  const GeneratorMatrix gen(cutoff);
  std::vector<Complex> psi(gen.dimension(), Complex{0.0, 0.0});
  for (const auto& term : state.terms()) {
    const FockState f = fock_state_of(term.idx);
    if (f.n_plus + f.n_minus > cutoff - 2)
      throw CutoffError("generator_variance: term |" + std::to_string(f.n_plus) + "," +
                        std::to_string(f.n_minus) + "> needs cutoff >= " +
                        std::to_string(f.n_plus + f.n_minus + 2));
    psi[gen.index_of(f)] = term.coeff;
  }
  std::vector<Complex> gpsi(gen.dimension());
  gen.apply(psi, gpsi);
  double mean = 0.0;
  double second = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    mean += (std::conj(psi[i]) * gpsi[i]).real();
    second += std::norm(gpsi[i]);
  }
  return second - mean * mean;
}

ModeSuperposition hl_expand(const HLIndex& idx) {
  if (idx.n1 < 0 || idx.n2 < 0)
    throw std::invalid_argument("hl_expand: mode numbers must be >= 0");
  const double c = std::cos(0.5 * idx.theta);
  const double s = std::sin(0.5 * idx.theta);
  const int total = idx.n1 + idx.n2;

  // amplitude of (a_+^dag)^a (a_-^dag)^(total-a) gathered over all binomial splits
  std::map<int, Complex> raw;
  for (int j = 0; j <= idx.n1; ++j)
    for (int m = 0; m <= idx.n2; ++m) {
      const int a = j + m;
      const double mag = binomial(idx.n1, j) * binomial(idx.n2, m) *
                         std::pow(c, j + idx.n2 - m) * std::pow(s, idx.n1 - j + m) *
                         (m % 2 == 0 ? 1.0 : -1.0);
      raw[a] += mag;
    }

  const double inv_norm = std::exp(-0.5 * (std::lgamma(double(idx.n1) + 1.0) +
                                           std::lgamma(double(idx.n2) + 1.0)));
  std::vector<ModeTerm> terms;
  for (const auto& [a, amp] : raw) {
    const int b = total - a;
    // e^{i phi (a-b)/2} phase plus sqrt(a! b!) from the creation operators
    const double half_angle = 0.5 * idx.phi * double(a - b);
    const Complex phase{std::cos(half_angle), std::sin(half_angle)};
    const Complex coeff = amp * phase * sqrt_factorial_ratio(a, 0) *
                          sqrt_factorial_ratio(b, 0) * inv_norm;
    if (std::abs(coeff) < 1e-15) continue;
    terms.push_back({lg_index_of({a, b}), coeff});
  }
  return ModeSuperposition(std::move(terms));
}

}  // namespace vortex
