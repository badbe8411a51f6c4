#include "vortex/fisher_quantum.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vortex {

FisherValue qfi_pure(LGIndex idx) {
  const int p = idx.p;
  const int al = std::abs(idx.l);
  return {double(2 * p * (p + al) + 2 * p + al + 1), FisherSource::closed_form_pure};
}

FisherValue qfi_hl_printed(const HLIndex& idx) {
  const double n1 = idx.n1;
  const double n2 = idx.n2;
  const double value = 4.0 + n1 + n2 * (3.0 + n2) + n1 * (3.0 + 4.0 * n2) +
                       (n1 - n1 * n1 + n2 + 4.0 * n1 * n2 - n2 * n2) *
                           std::cos(2.0 * idx.theta);
  return {value, FisherSource::closed_form_hl};
}

FisherValue qfi_two_mode_printed(int l, int l_prime) {
  if (l == l_prime)
    throw std::invalid_argument("qfi_two_mode_printed: requires distinct azimuthal numbers");
  const double al = std::abs(l);
  const double alp = std::abs(l_prime);
  return {4.0 + 2.0 * (al + alp) + (al - alp) * (al - alp),
          FisherSource::closed_form_superposition};
}

FisherValue qfi_oracle(const ModeSuperposition& state) {
  int max_total = 0;
  for (const auto& term : state.terms()) {
    const FockState f = fock_state_of(term.idx);
    max_total = std::max(max_total, f.n_plus + f.n_minus);
  }
  return {generator_variance(state, max_total + 2), FisherSource::variance_oracle};
}

}  // namespace vortex
