#include "dwell/phasespace.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "doctest.h"
#include "dwell/fft.hpp"
#include "dwell/snapshot.hpp"
#include "support.hpp"

using namespace dwell;

namespace {
PhaseGrid small_grid() { return PhaseGrid::make(128, 128, -4, 4, -4, 4); }
}  // namespace

TEST_CASE("PhaseGrid validates shape") {
  CHECK_THROWS_AS(PhaseGrid::make(100, 128, -1, 1, -1, 1), grid_error);
  CHECK_THROWS_AS(PhaseGrid::make(128, 96, -1, 1, -1, 1), grid_error);
  CHECK_THROWS_AS(PhaseGrid::make(128, 128, 1, -1, -1, 1), grid_error);
  const PhaseGrid g = PhaseGrid::make(512, 512, -8, 8, -16, 16);
  CHECK(g.dx() == doctest::Approx(16.0 / 512));
  CHECK(g.dp() == doctest::Approx(32.0 / 512));
  CHECK(g.kp_max() == doctest::Approx(kPi / g.dp()));
}

TEST_CASE("pure Gaussian state: norm, purity, zero linear entropy") {
  const double hbar = 0.1;
  const PhaseGrid g = PhaseGrid::make(256, 128, -4, 4, -8, 8);
  const auto f = gaussian_state(g, 0.5, -0.3, 0.05, 1.0, hbar, true);
  CHECK(f.norm() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(f.purity() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(-std::log(f.purity()) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("uncertainty violation rejected with pure flag") {
  // sigma_x sigma_p = 0.0025 < hbar/2 = 0.05
  CHECK_THROWS_AS(gaussian_state(small_grid(), 0, 0, 0.05, 0.05, 0.1, true), grid_error);
  // non-minimal product also rejected when pure is requested
  CHECK_THROWS_AS(gaussian_state(small_grid(), 0, 0, 0.5, 0.5, 0.1, true), grid_error);
}

TEST_CASE("sub-Heisenberg Gaussian accepted as classical distribution") {
  // purity hbar/(2 sx sp) = 20, linear entropy -log 20
  const PhaseGrid fine = PhaseGrid::make(256, 256, -1, 1, -1, 1);
  const auto f = gaussian_state(fine, 0, 0, 0.05, 0.05, 0.1, false);
  CHECK(f.purity() == doctest::Approx(20.0).epsilon(1e-4));
  CHECK(-std::log(f.purity()) == doctest::Approx(-std::log(20.0)).epsilon(1e-4));
}

TEST_CASE("Gaussian purity formula against brute-force density matrix") {
  // sigma_x sigma_p = hbar: purity must be 1/2 (oracle on a small grid)
  const PhaseGrid g = PhaseGrid::make(128, 128, -3, 3, -3, 3);
  const double hbar = 0.2;
  const auto f = gaussian_state(g, 0.2, 0.1, 0.4, 0.5, hbar, false);
  const double formula = hbar / (2.0 * 0.4 * 0.5);
  CHECK(f.purity() == doctest::Approx(formula).epsilon(1e-6));
  CHECK(testsup::purity_bruteforce(f) == doctest::Approx(formula).epsilon(1e-2));

  // The sub-Heisenberg case has coherence length hbar/sigma_p = 2 far beyond
  // its position spread, so the oracle box must cover x - x' out to ~8.
  const PhaseGrid g2 = PhaseGrid::make(1024, 256, -4, 4, -1, 1);
  const auto f2 = gaussian_state(g2, 0, 0, 0.05, 0.05, 0.1, false);
  CHECK(testsup::purity_bruteforce(f2) == doctest::Approx(f2.purity()).epsilon(1e-2));
}

TEST_CASE("gaussian_state rejects grid overflow of the tails") {
  CHECK_THROWS_AS(gaussian_state(small_grid(), 3.8, 0, 0.5, 0.5, 0.5, true), grid_error);
  CHECK_THROWS_AS(gaussian_state(small_grid(), 0, 0, 2.5, 0.1, 1.0, false), grid_error);
}

TEST_CASE("integrate: normalization, first and second moments") {
  const PhaseGrid g = PhaseGrid::make(256, 128, -8, 2, -8, 8);
  const auto f = gaussian_state(g, -3.7, 0.4, 0.05, 1.0, 0.1, true);
  CHECK(integrate(f, [](double, double) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(integrate(f, [](double x, double) { return x; }) == doctest::Approx(-3.7).epsilon(1e-3));
  // <p²> = sigma_p² + p0²
  CHECK(integrate(f, [](double, double p) { return p * p; }) ==
        doctest::Approx(1.0 + 0.16).epsilon(1e-4));
  const Moments m = moments(f);
  CHECK(m.mean_x == doctest::Approx(-3.7).epsilon(1e-6));
  CHECK(m.var_p == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("wigner_transform of Gaussian packets equals gaussian_state") {
  // property over random admissible centers and widths
  auto gen = testsup::rng(42);
  std::uniform_real_distribution<double> ux(-0.8, 0.8), us(0.18, 0.35);
  const double hbar = 0.25;
  const PhaseGrid g = PhaseGrid::make(256, 128, -4, 4, -6, 6);
  for (int trial = 0; trial < 8; ++trial) {
    const double x0 = ux(gen), p0 = ux(gen), sx = us(gen);
    const double sp = 0.5 * hbar / sx;
    const auto psi = gaussian_wavepacket(g.x, x0, p0, sx, hbar);
    const auto w = wigner_transform(psi, g, hbar);
    const auto ref = gaussian_state(g, x0, p0, sx, sp, hbar, true);
    CHECK(l2_distance(w, ref) < 1e-8);
    CHECK(w.norm() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(w.purity() == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("cat state develops momentum fringes at k_p = separation/hbar") {
  const double hbar = 0.1, sep = 2.0;
  const PhaseGrid g = PhaseGrid::make(256, 512, -4, 4, -3, 3);
  WaveFunction psi;
  psi.axis = g.x;
  psi.amplitudes.resize(g.nx());
  const double sx = 0.2;
  for (int i = 0; i < g.nx(); ++i) {
    const double x = g.x.point(i);
    psi.amplitudes[i] = std::exp(-0.25 * std::pow((x - sep / 2) / sx, 2)) +
                        std::exp(-0.25 * std::pow((x + sep / 2) / sx, 2));
  }
  psi.amplitudes /= std::sqrt(psi.amplitudes.squaredNorm() * g.dx());
  const auto w = wigner_transform(psi, g, hbar);
  CHECK(w.norm() == doctest::Approx(1.0).epsilon(1e-9));

  // dominant nonzero-λ band of the p spectrum
  RowFft fft(g.nx(), g.np());
  Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> spec(g.nx(),
                                                                            g.np() / 2 + 1);
  fft.forward(w.values.data(), spec.data());
  const double dlam = kTwoPi / g.p.extent();
  Eigen::VectorXd band = Eigen::VectorXd::Zero(g.np() / 2 + 1);
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 1; j < band.size(); ++j) band[j] += std::norm(spec(i, j));
  const int j_lo = static_cast<int>(0.5 * (sep / hbar) / dlam);
  int jmax = j_lo;
  for (int j = j_lo; j < band.size(); ++j)
    if (band[j] > band[jmax]) jmax = j;
  const double k_p = jmax * dlam;
  CHECK(k_p == doctest::Approx(sep / hbar).epsilon(0.05));
}

TEST_CASE("wigner_transform flags too-small momentum extent") {
  // packet with sigma_p = 1.25 on a box that only holds |p| < 2
  const PhaseGrid g = PhaseGrid::make(256, 64, -4, 4, -2, 2);
  const auto psi = gaussian_wavepacket(g.x, 0, 0, 0.1, 0.25);
  CHECK_THROWS_AS(wigner_transform(psi, g, 0.25), grid_error);
}

TEST_CASE("wigner_transform_natural reproduces the analytic Gaussian") {
  const double hbar = 0.1, sx = 0.3, x0 = 0.4, p0 = -0.2;
  const Axis axis{512, -6, 6};
  const auto psi = gaussian_wavepacket(axis, x0, p0, sx, hbar);
  const auto w = wigner_transform_natural(psi, hbar);
  CHECK(w.norm() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(w.purity() == doctest::Approx(1.0).epsilon(1e-6));
  const Moments m = moments(w);
  CHECK(m.mean_x == doctest::Approx(x0).epsilon(1e-6));
  CHECK(m.mean_p == doctest::Approx(p0).epsilon(1e-3));
  CHECK(m.var_x == doctest::Approx(sx * sx).epsilon(1e-6));
  CHECK(m.var_p == doctest::Approx(std::pow(0.5 * hbar / sx, 2)).epsilon(1e-4));
}

TEST_CASE("spectral transforms preserve Parseval sums") {
  auto gen = testsup::rng(7);
  std::normal_distribution<double> nd;
  const int rows = 32, n = 64;
  std::vector<double> data(rows * n);
  for (auto& v : data) v = nd(gen);
  RowFft fft(rows, n);
  std::vector<cplx> spec(rows * (n / 2 + 1));
  fft.forward(data.data(), spec.data());
  double direct = 0, parseval = 0;
  for (const auto& v : data) direct += v * v;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j <= n / 2; ++j) {
      const double wgt = (j == 0 || j == n / 2) ? 1.0 : 2.0;
      parseval += wgt * std::norm(spec[i * (n / 2 + 1) + j]);
    }
  parseval /= n;
  CHECK(parseval == doctest::Approx(direct).epsilon(1e-12));

  // c2c round trip
  Fft1d f1(n);
  std::vector<cplx> cin(n), cmid(n), cout(n);
  for (auto& v : cin) v = cplx(nd(gen), nd(gen));
  f1.forward(cin.data(), cmid.data());
  f1.backward(cmid.data(), cout.data());
  double err = 0;
  for (int i = 0; i < n; ++i) err = std::max(err, std::abs(cout[i] / double(n) - cin[i]));
  CHECK(err < 1e-12);
}

TEST_CASE("snapshot round trip is bit-exact; corrupt files rejected") {
  const auto f = gaussian_state(small_grid(), 0.3, -0.2, 0.3, 0.4, 0.2, false);
  const std::string path = "test_snapshot.bin";
  write_snapshot(f, SnapshotMode::Quantum, path);
  const auto snap = read_snapshot(path);
  REQUIRE(snap.mode == SnapshotMode::Quantum);
  CHECK(snap.field.grid == f.grid);
  CHECK(snap.field.hbar == f.hbar);
  bool identical = true;
  for (int i = 0; i < f.grid.nx(); ++i)
    for (int j = 0; j < f.grid.np(); ++j)
      if (snap.field.values(i, j) != f.values(i, j)) identical = false;
  CHECK(identical);

  // wavefunction snapshots round trip too
  const auto psi = gaussian_wavepacket(Axis{256, -4, 4}, 0.5, 1.0, 0.3, 0.2);
  write_snapshot(psi, 0.2, "test_snapshot_psi.bin");
  const auto snap2 = read_snapshot("test_snapshot_psi.bin");
  REQUIRE(snap2.mode == SnapshotMode::Wavefunction);
  bool same = true;
  for (int i = 0; i < 256; ++i)
    if (snap2.psi.amplitudes[i] != psi.amplitudes[i]) same = false;
  CHECK(same);

  // corrupted magic
  {
    std::fstream bad(path, std::ios::binary | std::ios::in | std::ios::out);
    bad.seekp(0);
    bad.write("XX", 2);
  }
  CHECK_THROWS_AS(read_snapshot(path), io_error);

  // unsupported future version
  write_snapshot(f, SnapshotMode::Classical, path);
  {
    std::fstream bad(path, std::ios::binary | std::ios::in | std::ios::out);
    bad.seekp(8);
    const uint32_t v2 = 2;
    bad.write(reinterpret_cast<const char*>(&v2), 4);
  }
  CHECK_THROWS_AS(read_snapshot(path), io_error);

  // truncated payload
  write_snapshot(f, SnapshotMode::Classical, path);
  {
    std::ifstream in(path, std::ios::binary);
    std::vector<char> all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(all.data(), static_cast<std::streamsize>(all.size() / 2));
  }
  CHECK_THROWS_AS(read_snapshot(path), io_error);
}

TEST_CASE("boundary mass fraction sees transported mass, ignores ripple") {
  auto f = gaussian_state(small_grid(), 0, 0, 0.4, 0.4, 0.2, false);
  CHECK(boundary_mass_fraction(f) < 1e-12);
  auto g = f;
  g.values.row(0).setConstant(1.0);
  CHECK(boundary_mass_fraction(g) > 1e-3);
  // alternating-sign ripple in the band cancels
  auto h = f;
  for (int j = 0; j < h.grid.np(); ++j) h.values(1, j) = (j % 2 == 0) ? 0.5 : -0.5;
  CHECK(boundary_mass_fraction(h) < 1e-10);
}
