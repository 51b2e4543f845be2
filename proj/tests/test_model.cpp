#include "dwell/model.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "support.hpp"

using namespace dwell;

namespace {
SystemParams undriven() {
  SystemParams p;
  p.s = 0.0;
  return p;  // m=1, b=10, a=1/32
}
}  // namespace

TEST_CASE("double well geometry: fixed points and their energy") {
  const SystemParams p = undriven();
  const double xfix = std::sqrt(32.0 * p.b * p.a);  // sqrt(10)
  CHECK(xfix == doctest::Approx(std::sqrt(10.0)));
  CHECK(potential(p, xfix, 0.0) == doctest::Approx(-16.0 * p.b * p.b * p.a));  // -50
  CHECK(potential(p, xfix, 0.0) == doctest::Approx(-50.0));
  CHECK(potential(p, 0.0, 0.33) == doctest::Approx(0.0));
  CHECK(force(p, xfix, 0.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(force(p, -xfix, 0.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("drive vanishes at quarter period") {
  SystemParams p = undriven();
  p.s = 1.0;
  p.omega = 5.35;
  const double tq = p.tau() / 4.0;
  CHECK(potential(p, 1.7, tq) == doctest::Approx(potential(undriven(), 1.7, 0.0)).epsilon(1e-12));
}

TEST_CASE("force equals minus the finite-difference gradient of potential") {
  auto gen = testsup::rng(3);
  std::uniform_real_distribution<double> ux(-6.0, 6.0), ut(0.0, 10.0);
  SystemParams p = undriven();
  p.s = 3.0;
  for (int k = 0; k < 50; ++k) {
    const double x = ux(gen), t = ut(gen);
    const double fd = -testsup::fd_derivative([&](double xx) { return potential(p, xx, t); }, x);
    CHECK(force(p, x, t) == doctest::Approx(fd).epsilon(1e-8));
  }
}

TEST_CASE("third derivative of the quartic") {
  const SystemParams p = undriven();
  CHECK(d3V(p, 0.0) == doctest::Approx(0.0));
  CHECK(d3V(p, 1.0) == doctest::Approx(12.0));  // 3/(8a) with a = 1/32
  // cross-check against finite differences of the force
  const double fd =
      -testsup::fd_derivative(
          [&](double x) {
            return testsup::fd_derivative(
                [&](double y) { return force(p, y, 0.0); }, x, 1e-3);
          },
          1.3, 1e-3);
  CHECK(d3V(p, 1.3) == doctest::Approx(fd).epsilon(1e-4));
}

TEST_CASE("nonlinearity scale") {
  const SystemParams p = undriven();
  CHECK_THROWS_AS(nonlinearity_scale(p, 0.0), config_error);
  // at the fixed point the numerator vanishes
  CHECK(std::abs(nonlinearity_scale(p, std::sqrt(10.0))) < 1e-7);
  // chi² = x²/6 − 16ab/3 for this potential; chi = 4 at x = sqrt(106)
  CHECK(nonlinearity_scale(p, std::sqrt(106.0)) == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("potential parity under half-period shift of the drive") {
  SystemParams p = undriven();
  p.s = 4.0;
  p.omega = 5.35;
  auto gen = testsup::rng(5);
  std::uniform_real_distribution<double> ux(-5.0, 5.0), ut(0.0, 3.0);
  for (int k = 0; k < 30; ++k) {
    const double x = ux(gen), t = ut(gen);
    CHECK(potential(p, -x, t + p.tau() / 2) == doctest::Approx(potential(p, x, t)).epsilon(1e-12));
  }
}

TEST_CASE("presets carry the published parameter sets") {
  const Preset a = preset("fig1a");
  CHECK(a.sys.m == 1.0);
  CHECK(a.sys.b == 10.0);
  CHECK(a.sys.a == doctest::Approx(1.0 / 32.0));
  CHECK(a.sys.s == 1.0);
  CHECK(a.sys.omega == doctest::Approx(5.35));
  CHECK(a.sys.hbar == doctest::Approx(0.1));
  CHECK(a.island.x0 == doctest::Approx(-3.7));
  CHECK(a.island.sigma_x == doctest::Approx(0.05));
  CHECK(a.island.sigma_p == doctest::Approx(1.0));
  CHECK(a.sea.x0 == doctest::Approx(1.0));
  CHECK(a.sea.sigma_x * a.sea.sigma_p == doctest::Approx(0.05));  // pure at hbar = 0.1

  const Preset b = preset("fig1b");
  CHECK(b.sys.s == 10.0);
  CHECK(b.sys.omega == doctest::Approx(6.07));

  const Preset t = preset("tunneling");
  CHECK(t.sys.s == 4.0);
  CHECK(t.sys.hbar == 1.0);
  CHECK(t.island.x0 == doctest::Approx(-3.52));
  CHECK(t.island.sigma_x == doctest::Approx(0.25));
  CHECK(t.island.sigma_p == doctest::Approx(2.0));

  const Preset f9 = preset("fig9");
  CHECK(f9.sys.omega == doctest::Approx(6.16));
  CHECK(f9.sys.b == 10.0);
  CHECK(f9.sys.s == 10.0);
  CHECK(f9.sys.a == doctest::Approx(1.0 / 32.0));
  CHECK(f9.bath.D == doctest::Approx(1e-3));

  CHECK_THROWS_AS(preset("fig2z"), config_error);
}

TEST_CASE("bath parameters reject dissipation") {
  BathParams bath;
  bath.D = 0.01;
  CHECK_NOTHROW(bath.validate());
  bath.gamma = 0.1;
  CHECK_THROWS_AS(bath.validate(), config_error);
  bath.gamma = 0.0;
  bath.D = -1.0;
  CHECK_THROWS_AS(bath.validate(), config_error);
}

TEST_CASE("potential interface: double well and harmonic agree with free functions") {
  SystemParams sp = undriven();
  sp.s = 2.0;
  const DoubleWellPotential dw(sp);
  CHECK(dw.value(1.2, 0.7) == doctest::Approx(potential(sp, 1.2, 0.7)).epsilon(1e-14));
  CHECK(dw.force(1.2, 0.7) == doctest::Approx(force(sp, 1.2, 0.7)).epsilon(1e-14));
  CHECK(dw.d3v0(1.0) == doctest::Approx(12.0));
  CHECK(dw.reference_period() == doctest::Approx(sp.tau()));

  const HarmonicPotential h(2.0, 3.0);
  CHECK(h.v0(1.5) == doctest::Approx(0.5 * 2.0 * 9.0 * 2.25));
  CHECK(h.d3v0(1.5) == 0.0);
  CHECK(h.drive_s() == 0.0);
}
