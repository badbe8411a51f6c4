#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "vortex/beam.hpp"

namespace vortex {

/// Two-oscillator Fock occupation |n_+, n_->. Maps to LG indices through
/// l = n_+ - n_- and p = min(n_+, n_-).
struct FockState {
  int n_plus = 0;
  int n_minus = 0;

  friend bool operator==(const FockState&, const FockState&) = default;
};

LGIndex lg_index_of(FockState f);
FockState fock_state_of(LGIndex idx);

/// Thrown when a state has support too close to the basis truncation for the
/// generator action to be exact.
struct CutoffError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Dimensionless defocus generator Gt = (a_+ - a_-^dag)(a_+^dag - a_-) on the
/// Fock basis truncated at n_+ + n_- <= cutoff. Real symmetric and sparse:
/// diagonal n_+ + n_- + 1, off-diagonal couplings only between
/// |n_+, n_-> and |n_+ +- 1, n_- +- 1> (so l = n_+ - n_- is conserved).
/// Immutable after construction; all queries are const.
class GeneratorMatrix {
 public:
  explicit GeneratorMatrix(int cutoff);

  int cutoff() const { return cutoff_; }
  std::size_t dimension() const { return diag_.size(); }

  /// Enumeration index of a basis state; throws CutoffError above the cutoff.
  std::size_t index_of(FockState f) const;
  FockState basis_state(std::size_t index) const;

  /// Matrix element <row| Gt |col>; zero for uncoupled pairs.
  double element(FockState row, FockState col) const;

  /// out = Gt * in over the truncated basis.
  void apply(std::span<const Complex> in, std::span<Complex> out) const;

 private:
  int cutoff_;
  std::vector<double> diag_;
  struct Coupling {
    std::size_t lower;  // index of |n_+, n_->
    std::size_t upper;  // index of |n_+ + 1, n_- + 1>
    double value;       // -sqrt((n_+ + 1)(n_- + 1))
  };
  std::vector<Coupling> couplings_;
};

GeneratorMatrix build_generator(int cutoff);

/// Var(Gt) in the given state, exact up to rounding provided every term
/// satisfies n_+ + n_- <= cutoff - 2 (throws CutoffError otherwise).
/// The physical QFI is Var(Gt)/z_R^2.
double generator_variance(const ModeSuperposition& state, int cutoff);

/// Point on the Hermite-Laguerre sphere: mode numbers of the two rotated
/// oscillators plus the sphere coordinates. theta = 0, pi are LG modes,
/// theta = pi/2 Hermite-Gauss.
struct HLIndex {
  int n1 = 0;
  int n2 = 0;
  double theta = 0.0;
  double phi = 0.0;
};

/// Fock-basis expansion of (a_1^dag)^n1 (a_2^dag)^n2 |0,0> / sqrt(n1! n2!)
/// with the rotated creation operators of the sphere point. Normalized.
ModeSuperposition hl_expand(const HLIndex& idx);

}  // namespace vortex
