#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "vortex/beam.hpp"
#include "vortex/fisher_classical.hpp"

using namespace vortex;

namespace {
const BeamGeometry kUnit{1.0, 2.0};  // z_R = 1

ModeSuperposition two_mode(int l, int l_prime) {
  return ModeSuperposition::equal_pair({0, l}, {0, l_prime});
}
}  // namespace

TEST_CASE("QuadratureConfig: validation") {
  QuadratureConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.n_radial = 4;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.r_max_factor = 2.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.density_floor = 1e-6;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.refine_tolerance = 0.01;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("cfi_pure_closed: reference values") {
  CHECK(cfi_pure_closed({0, 0}, kUnit, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(cfi_pure_closed({0, 1}, kUnit, 1.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(cfi_pure_closed({1, 2}, kUnit, 0.0) == 0.0);
  // R(z_R)^2 = 4 z_R^2 maximizes 1/R^2
  for (double z : {0.3, 0.7, 1.5, 2.5})
    CHECK(cfi_pure_closed({0, 2}, kUnit, z) < cfi_pure_closed({0, 2}, kUnit, 1.0));
}

TEST_CASE("cfi_total: saturates the pure-mode closed form") {
  for (const LGIndex idx : {LGIndex{0, 0}, {0, 3}, {1, 1}, {2, 2}})
    for (double z : {0.25, 0.5, 1.0, 2.0}) {
      const double quad = cfi_total(ModeSuperposition::single(idx), kUnit, z);
      const double closed = cfi_pure_closed(idx, kUnit, z);
      CHECK(quad == doctest::Approx(closed).epsilon(1e-4));
    }
}

TEST_CASE("cfi_total: zero at the waist for pure modes") {
  CHECK(cfi_total(ModeSuperposition::single({0, 2}), kUnit, 0.0) ==
        doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("cfi_total: Monte Carlo cross-check of the quadrature") {
  const auto state = two_mode(2, 0);
  const double z = 1.0;
  const double quad = cfi_total(state, kUnit, z);
  const double s = std::sqrt(2.0);  // w(z)/w0 at zeta = 1
  const auto integrand = [&](double rho, double phi) {
    const FieldSample f = evaluate_dimensionless(state, rho, phi, z);
    const double q = std::norm(f.u);
    if (q < 1e-14) return 0.0;
    const double dq = 2.0 * (std::conj(f.u) * f.du_dzeta).real();
    return dq * dq / q;
  };
  const auto [mc, se] = oracles::monte_carlo_polar(integrand, 8.0 * s, 400000, 1234);
  CHECK(std::abs(quad - mc) < 5.0 * se);
  CHECK(se < 0.05 * quad);  // the cross-check is actually informative
}

TEST_CASE("cfi marginals: pure modes") {
  const auto state = ModeSuperposition::single({0, 2});
  const double z = 0.8;
  const double total = cfi_total(state, kUnit, z);
  CHECK(cfi_radial(state, kUnit, z) == doctest::Approx(total).epsilon(1e-8));
  CHECK(cfi_azimuthal(state, kUnit, z) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("cfi marginals: inequalities and correlation deficit") {
  const QuadratureConfig cfg;
  for (const auto& state : {two_mode(2, 0), two_mode(1, 0), two_mode(3, 1)})
    for (double z : {0.1, 0.45, 1.0, 2.2}) {
      const double total = cfi_total(state, kUnit, z, cfg);
      const double radial = cfi_radial(state, kUnit, z, cfg);
      const double azimuthal = cfi_azimuthal(state, kUnit, z, cfg);
      CHECK(radial >= 0.0);
      CHECK(azimuthal >= 0.0);
      CHECK(radial <= total * (1.0 + 2.0 * cfg.refine_tolerance));
      CHECK(azimuthal <= total * (1.0 + 2.0 * cfg.refine_tolerance));
      // marginals may miss correlation information but never exceed the total
      CHECK(total - (radial + azimuthal) >= -2.0 * cfg.refine_tolerance * total);
    }
}

TEST_CASE("cfi: azimuthal information needs unequal Gouy rates") {
  // +l/-l petals share one Gouy rate: the pattern never rotates, so the
  // azimuthal marginal carries nothing and the radial part is everything
  const auto petals = ModeSuperposition::equal_pair({0, 1}, {0, -1});
  CHECK(cfi_azimuthal(petals, kUnit, 0.05) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(cfi_radial(petals, kUnit, 0.3) ==
        doctest::Approx(cfi_total(petals, kUnit, 0.3)).epsilon(1e-8));
  // mixing different |l| does rotate and feeds the azimuthal marginal
  CHECK(cfi_azimuthal(two_mode(2, 0), kUnit, 0.05) > 1.0);
  // superpositions can carry information even at z = 0
  CHECK(cfi_total(two_mode(2, 0), kUnit, 0.0) > 1.0);
}

TEST_CASE("cfi: even in z") {
  const auto state = two_mode(2, 0);
  for (double z : {0.35, 1.2}) {
    CHECK(cfi_total(state, kUnit, z) ==
          doctest::Approx(cfi_total(state, kUnit, -z)).epsilon(1e-10));
    CHECK(cfi_azimuthal(state, kUnit, z) ==
          doctest::Approx(cfi_azimuthal(state, kUnit, -z)).epsilon(1e-10));
  }
}

TEST_CASE("cfi refinement: successive fixed grids approach the converged value") {
  const auto state = two_mode(2, 0);
  const double z = 0.7;
  const double reference = cfi_total(state, kUnit, z);
  std::vector<double> diffs;
  for (int n : {16, 32, 64, 128, 256})
    diffs.push_back(std::abs(cfi_fixed_grid(state, kUnit, z, n, n).total - reference));
  for (std::size_t i = 1; i < diffs.size(); ++i) CHECK(diffs[i] <= diffs[i - 1] + 1e-9);
  CHECK(diffs.back() < 1e-6 * reference);
}

TEST_CASE("cfi_total: non-convergence carries the last two estimates") {
  // a mixed-order state with three l sectors goes through the tensor path,
  // whose integrand has moving interference nulls; the refinement budget from
  // a 32-point start cannot reach the default tolerance
  QuadratureConfig cfg;
  cfg.n_radial = 32;
  cfg.n_azimuthal = 32;
  const auto state = ModeSuperposition(
      {{{0, 5}, Complex{1.0, 0.0}}, {{0, 3}, Complex{1.0, 0.0}}, {{0, 0}, Complex{1.0, 0.0}}});
  try {
    (void)cfi_total(state, kUnit, 0.4, cfg);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(std::isfinite(e.previous_estimate()));
    CHECK(std::isfinite(e.last_estimate()));
    CHECK(e.previous_estimate() != e.last_estimate());
  }
}

TEST_CASE("laguerre_product_integral: orthogonality weights") {
  for (int p : {0, 1, 3})
    for (int l : {0, 1, 2}) {
      double factorial_ratio = 1.0;  // (p+l)!/p!
      for (int j = p + 1; j <= p + l; ++j) factorial_ratio *= j;
      CHECK(laguerre_product_integral(double(l), p, l, p, l) ==
            doctest::Approx(factorial_ratio).epsilon(1e-12));
    }
  CHECK(laguerre_product_integral(1.0, 2, 1, 0, 1) == doctest::Approx(0.0));
  CHECK(laguerre_product_integral(2.0, 3, 2, 1, 2) == doctest::Approx(0.0));
}

TEST_CASE("laguerre_product_integral: quadrature oracle") {
  const auto direct = [](double mu, int p, int l, int pp, int lp) {
    return oracles::simpson(
        [&](double t) {
          return std::exp(-t) * std::pow(t, mu) * oracles::laguerre_series(p, l, t) *
                 oracles::laguerre_series(pp, lp, t);
        },
        0.0, 80.0, 20000);
  };
  CHECK(laguerre_product_integral(2.0, 1, 1, 0, 0) ==
        doctest::Approx(direct(2.0, 1, 1, 0, 0)).epsilon(1e-9));
  CHECK(laguerre_product_integral(3.0, 2, 1, 1, 2) ==
        doctest::Approx(direct(3.0, 2, 1, 1, 2)).epsilon(1e-9));
  CHECK(laguerre_product_integral(1.5, 2, 0, 2, 1) ==
        doctest::Approx(direct(1.5, 2, 0, 2, 1)).epsilon(1e-9));
}

TEST_CASE("laguerre_product_integral: rebuilds the closed-form CFI term by term") {
  // the radial integral behind the closed form:
  //   I = int e^-t t^l [2t L_{p-1}^{l+1} + (t-l-1) L_p^l]^2 dt = Qt (p+l)!/p!
  for (int p = 0; p <= 3; ++p)
    for (int l = 0; l <= 4; ++l) {
      const double mu0 = l;
      double value = 0.0;
      if (p >= 1) {
        value += 4.0 * laguerre_product_integral(mu0 + 2, p - 1, l + 1, p - 1, l + 1);
        value += 4.0 * (laguerre_product_integral(mu0 + 2, p - 1, l + 1, p, l) -
                        (l + 1.0) * laguerre_product_integral(mu0 + 1, p - 1, l + 1, p, l));
      }
      value += laguerre_product_integral(mu0 + 2, p, l, p, l) -
               2.0 * (l + 1.0) * laguerre_product_integral(mu0 + 1, p, l, p, l) +
               (l + 1.0) * (l + 1.0) * laguerre_product_integral(mu0, p, l, p, l);
      double factorial_ratio = 1.0;
      for (int j = p + 1; j <= p + l; ++j) factorial_ratio *= j;
      const double qt = 2.0 * p * (p + l) + 2.0 * p + l + 1.0;
      CHECK(value == doctest::Approx(qt * factorial_ratio).epsilon(1e-11));
    }
}

TEST_CASE("find_optimal_plane: pure modes peak at the Rayleigh range") {
  const auto plane00 = find_optimal_plane(ModeSuperposition::single({0, 0}), kUnit,
                                          {0.05, 3.0});
  CHECK(plane00.z_opt == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(plane00.f_max == doctest::Approx(1.0).epsilon(1e-4));
  const auto plane03 = find_optimal_plane(ModeSuperposition::single({0, 3}), kUnit,
                                          {0.05, 3.0});
  CHECK(plane03.z_opt == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(plane03.f_max == doctest::Approx(4.0).epsilon(1e-4));
}

TEST_CASE("find_optimal_plane: superposition peak moves off the Rayleigh range") {
  const auto plane = find_optimal_plane(two_mode(2, 0), kUnit, {0.05, 3.0});
  CHECK(std::abs(plane.z_opt - 1.0) > 0.1);
  CHECK(plane.f_max > cfi_total(two_mode(2, 0), kUnit, 1.0));
  // reproducible
  const auto again = find_optimal_plane(two_mode(2, 0), kUnit, {0.05, 3.0});
  CHECK(plane.z_opt == doctest::Approx(again.z_opt).epsilon(1e-12));
}

TEST_CASE("find_optimal_plane: range validation") {
  const auto state = ModeSuperposition::single({0, 0});
  CHECK_THROWS_AS(find_optimal_plane(state, kUnit, {0.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(find_optimal_plane(state, kUnit, {1.0, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(find_optimal_plane(state, kUnit, {0.5, 6.0}), std::invalid_argument);
}

TEST_CASE("scan_report: grid evaluation with reference QFI") {
  const auto state = two_mode(2, 0);
  const std::vector<double> grid{0.1, 0.5, 1.0, 2.0};
  const FisherReport report = scan_report(state, kUnit, grid);
  REQUIRE(report.z_grid.size() == 4);
  CHECK(report.qfi_reference.value == doctest::Approx(3.0).epsilon(1e-12));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(report.converged[i] == 1);
    CHECK(report.f_total[i] <= report.qfi_reference.value * (1.0 + 2e-6));
    CHECK(report.f_radial[i] <= report.f_total[i] * (1.0 + 2e-6));
    CHECK(report.f_azimuthal[i] <= report.f_total[i] * (1.0 + 2e-6));
  }
  // Fig-4 structure: azimuthal dominates near the waist, radial far out
  CHECK(report.f_azimuthal[0] > report.f_radial[0]);
  CHECK(report.f_radial[3] > report.f_azimuthal[3]);
}

TEST_CASE("scan_report: empty grid") {
  const FisherReport report = scan_report(ModeSuperposition::single({0, 0}), kUnit, {});
  CHECK(report.z_grid.empty());
  CHECK(report.f_total.empty());
  CHECK(report.converged.empty());
}

TEST_CASE("scan_report: pure-mode ratio curve peaks at one") {
  const auto state = ModeSuperposition::single({0, 1});
  std::vector<double> grid;
  for (int i = 0; i <= 30; ++i) grid.push_back(0.05 + i * 0.1);
  const FisherReport report = scan_report(state, kUnit, grid);
  double best = 0.0;
  double best_z = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double ratio = report.f_total[i] / report.qfi_reference.value;
    CHECK(ratio <= 1.0 + 2e-6);
    if (ratio > best) {
      best = ratio;
      best_z = grid[i];
    }
  }
  CHECK(best == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(best_z == doctest::Approx(1.05).epsilon(0.1));  // grid point nearest z_R
}
