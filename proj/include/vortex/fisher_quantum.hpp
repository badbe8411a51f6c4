#pragma once

#include "vortex/beam.hpp"
#include "vortex/oscillator.hpp"

namespace vortex {

enum class FisherSource {
  closed_form_pure,
  closed_form_hl,
  closed_form_superposition,
  variance_oracle,
};

/// A Fisher information value in units of 1/z_R^2, tagged with how it was
/// obtained. The closed-form sources evaluate fixed expressions verbatim;
/// the variance oracle is the ground truth Var(Gt)/z_R^2.
struct FisherValue {
  double value;
  FisherSource source;
};

/// QFI of a pure LG mode: [2p(p+|l|) + 2p + |l| + 1] / z_R^2.
FisherValue qfi_pure(LGIndex idx);

/// Closed-form QFI expression for a Hermite-Laguerre sphere mode, evaluated
/// verbatim. Independent of the sphere azimuth. Known to exceed the variance
/// oracle (by a factor 4 at n1, n2 <= 1); both are kept so the discrepancy
/// stays visible.
FisherValue qfi_hl_printed(const HLIndex& idx);

/// Closed-form QFI expression for (|LG_0l> + |LG_0l'>)/sqrt(2), l != l':
/// [4 + 2(|l| + |l'|) + (|l| - |l'|)^2] / z_R^2. Exceeds the variance oracle
/// by an exact factor 4. Throws std::invalid_argument when l == l'.
FisherValue qfi_two_mode_printed(int l, int l_prime);

/// QFI from the generator variance: 4 Var(G) = Var(Gt)/z_R^2. Authoritative
/// for every state; constant in the detection-plane position by construction.
FisherValue qfi_oracle(const ModeSuperposition& state);

}  // namespace vortex
