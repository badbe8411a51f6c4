#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "vortex/beam.hpp"

using namespace vortex;

namespace {
const BeamGeometry kGeom{0.7, 3.0};  // z_R = 0.735

ModeSuperposition two_mode(int l, int l_prime) {
  return ModeSuperposition::equal_pair({0, l}, {0, l_prime});
}
}  // namespace

TEST_CASE("laguerre: degree zero and one") {
  CHECK(laguerre(0, 0.0, 1.7) == 1.0);
  CHECK(laguerre(0, 4.5, -2.0) == 1.0);
  CHECK(laguerre(1, 0.0, 0.25) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(laguerre(1, 0.0, 3.0) == doctest::Approx(-2.0).epsilon(1e-15));
}

TEST_CASE("laguerre: L_2^1(3) against the explicit series") {
  CHECK(oracles::laguerre_series(2, 1.0, 3.0) == doctest::Approx(-1.5).epsilon(1e-14));
  CHECK(laguerre(2, 1.0, 3.0) == doctest::Approx(-1.5).epsilon(1e-13));
}

TEST_CASE("laguerre: recurrence matches series for random arguments") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> ux(0.0, 20.0);
  for (int p = 0; p <= 8; ++p)
    for (double alpha : {0.0, 0.5, 2.0, 5.0})
      for (int rep = 0; rep < 5; ++rep) {
        const double x = ux(rng);
        const double expected = oracles::laguerre_series(p, alpha, x);
        CHECK(laguerre(p, alpha, x) ==
              doctest::Approx(expected).epsilon(1e-10).scale(std::abs(expected) + 1.0));
      }
  CHECK_THROWS_AS(laguerre(-1, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("propagate_params: waist plane") {
  const auto p = propagate_params(kGeom, {0, 0}, 0.0);
  CHECK(p.inv_radius == 0.0);
  CHECK(std::isinf(p.radius_of_curvature));
  CHECK(p.beam_radius == doctest::Approx(kGeom.w0).epsilon(1e-15));
  CHECK(p.gouy == 0.0);
}

TEST_CASE("propagate_params: one Rayleigh range") {
  const double zr = kGeom.rayleigh_range();
  const auto p = propagate_params(kGeom, {0, 0}, zr);
  CHECK(p.radius_of_curvature == doctest::Approx(2.0 * zr).epsilon(1e-14));
  CHECK(p.beam_radius == doctest::Approx(kGeom.w0 * std::numbers::sqrt2).epsilon(1e-14));
  CHECK(p.gouy == doctest::Approx(std::numbers::pi / 4).epsilon(1e-14));
  const auto p2 = propagate_params(kGeom, {0, 2}, zr);
  CHECK(p2.gouy == doctest::Approx(3.0 * std::numbers::pi / 4).epsilon(1e-14));
}

TEST_CASE("propagate_params: parity in z") {
  const double z = 0.37 * kGeom.rayleigh_range();
  const auto fwd = propagate_params(kGeom, {1, -3}, z);
  const auto bwd = propagate_params(kGeom, {1, -3}, -z);
  CHECK(bwd.gouy == doctest::Approx(-fwd.gouy).epsilon(1e-15));
  CHECK(bwd.beam_radius == doctest::Approx(fwd.beam_radius).epsilon(1e-15));
  CHECK(bwd.inv_radius == doctest::Approx(-fwd.inv_radius).epsilon(1e-15));
}

TEST_CASE("evaluate_field: fundamental mode on axis at the waist") {
  const auto state = ModeSuperposition::single({0, 0});
  const Complex value = evaluate_field(state, kGeom, {0.0, 0.0, 0.0});
  CHECK(value.real() ==
        doctest::Approx(std::sqrt(2.0 / std::numbers::pi) / kGeom.w0).epsilon(1e-14));
  CHECK(value.imag() == doctest::Approx(0.0));
}

TEST_CASE("evaluate_field: vortex core null") {
  const auto state = ModeSuperposition::single({0, 1});
  for (double z : {0.0, 0.8 * kGeom.rayleigh_range(), -1.3}) {
    CHECK(std::abs(evaluate_field(state, kGeom, {0.0, 1.1, z})) == doctest::Approx(0.0));
  }
}

TEST_CASE("evaluate_field: unit L2 norm at every plane") {
  const double zr = kGeom.rayleigh_range();
  const auto states = {ModeSuperposition::single({0, 0}), ModeSuperposition::single({1, 2}),
                       two_mode(2, 0)};
  for (const auto& state : states)
    for (double zeta : {-3.0, -1.0, 0.0, 0.4, 3.0}) {
      const double z = zeta * zr;
      const double w = kGeom.w0 * std::sqrt(1.0 + zeta * zeta);
      const double norm = oracles::polar_integral(
          [&](double r, double phi) { return intensity(state, kGeom, {r, phi, z}); },
          8.0 * w, 2048, 128);
      CHECK(norm == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("intensity: pure modes are azimuthally symmetric") {
  const auto state = ModeSuperposition::single({1, 3});
  const double z = 0.6;
  for (double r : {0.2, 0.7, 1.5}) {
    const double ref = intensity(state, kGeom, {r, 0.0, z});
    for (int j = 1; j < 32; ++j) {
      const double phi = 2.0 * std::numbers::pi * j / 32;
      CHECK(std::abs(intensity(state, kGeom, {r, phi, z}) - ref) < 1e-12);
    }
  }
}

TEST_CASE("intensity: l=2 superposition has two-fold symmetry at the waist") {
  const auto state = two_mode(2, 0);
  for (double r : {0.3, 0.8})
    for (int j = 0; j < 16; ++j) {
      const double phi = 2.0 * std::numbers::pi * j / 16;
      const double a = intensity(state, kGeom, {r, phi, 0.0});
      const double b = intensity(state, kGeom, {r, phi + std::numbers::pi, 0.0});
      CHECK(a == doctest::Approx(b).epsilon(1e-12));
    }
}

TEST_CASE("field_z_derivative: matches central finite differences") {
  const double zr = kGeom.rayleigh_range();
  const double h = 1e-5 * zr;
  const auto state = ModeSuperposition(
      {{{0, 2}, Complex{0.8, 0.0}}, {{0, 0}, Complex{0.0, 0.6}}, {{1, -1}, Complex{0.3, 0.2}}});

  std::mt19937 rng(42);
  std::uniform_real_distribution<double> ur(0.02, 2.0);
  std::uniform_real_distribution<double> uphi(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> uz(-2.5, 2.5);

  std::vector<double> errors;
  std::vector<double> magnitudes;
  for (int i = 0; i < 100; ++i) {
    const CylindricalPoint pt{ur(rng) * kGeom.w0, uphi(rng), uz(rng) * zr};
    const Complex analytic = field_z_derivative(state, kGeom, pt);
    const Complex fd = (evaluate_field(state, kGeom, {pt.r, pt.phi, pt.z + h}) -
                        evaluate_field(state, kGeom, {pt.r, pt.phi, pt.z - h})) /
                       (2.0 * h);
    errors.push_back(std::abs(analytic - fd));
    magnitudes.push_back(std::abs(fd));
  }
  const double peak = *std::max_element(magnitudes.begin(), magnitudes.end());
  for (std::size_t i = 0; i < errors.size(); ++i) {
    const bool relative_ok = errors[i] <= 1e-6 * magnitudes[i];
    const bool absolute_ok = errors[i] <= 1e-10 * peak;  // near intensity nulls
    CHECK((relative_ok || absolute_ok));
  }
}

TEST_CASE("field_z_derivative: on-axis waist intensity is stationary") {
  const auto state = ModeSuperposition::single({0, 0});
  const Complex psi = evaluate_field(state, kGeom, {0.0, 0.0, 0.0});
  const Complex dpsi = field_z_derivative(state, kGeom, {0.0, 0.0, 0.0});
  CHECK(2.0 * (std::conj(psi) * dpsi).real() == doctest::Approx(0.0));
}

TEST_CASE("field_z_derivative: norm conservation") {
  const auto state = two_mode(2, 0);
  for (double z : {0.0, 0.5 * kGeom.rayleigh_range(), 1.7}) {
    const double zeta = z / kGeom.rayleigh_range();
    const double w = kGeom.w0 * std::sqrt(1.0 + zeta * zeta);
    const double d_norm = oracles::polar_integral(
        [&](double r, double phi) {
          const Complex psi = evaluate_field(state, kGeom, {r, phi, z});
          const Complex dpsi = field_z_derivative(state, kGeom, {r, phi, z});
          return 2.0 * (std::conj(psi) * dpsi).real();
        },
        8.0 * w, 2048, 128);
    CHECK(std::abs(d_norm) < 1e-8);
  }
}

TEST_CASE("ModeSuperposition: construction rules") {
  CHECK_THROWS_AS(ModeSuperposition({{{0, 1}, 1.0}, {{0, 1}, 0.5}}), std::invalid_argument);
  CHECK_THROWS_AS(ModeSuperposition({{{-1, 0}, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(ModeSuperposition({{{0, 0}, 0.0}}), std::invalid_argument);
  const ModeSuperposition state({{{0, 2}, 3.0}, {{0, 0}, 4.0}});
  double norm2 = 0.0;
  for (const auto& t : state.terms()) norm2 += std::norm(t.coeff);
  CHECK(norm2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(state.terms()[0].coeff) == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("BeamGeometry: validation and Rayleigh range") {
  CHECK_THROWS_AS(BeamGeometry(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(BeamGeometry(1.0, -2.0), std::invalid_argument);
  CHECK(BeamGeometry(2.0, 3.0).rayleigh_range() == doctest::Approx(6.0).epsilon(1e-15));
}
