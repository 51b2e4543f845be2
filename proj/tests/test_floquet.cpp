#include "dwell/floquet.hpp"

#include <cmath>

#include "doctest.h"
#include "dwell/fft.hpp"
#include "dwell/quantum.hpp"
#include "support.hpp"

using namespace dwell;

namespace {

// Direct diagonalization of H = p²/2m + v0(x) on the axis (spectral kinetic
// term); independent oracle for the undriven Floquet limit.
Eigen::VectorXd direct_spectrum(const Potential& pot, const Axis& axis, double hbar, int count) {
  const int n = axis.n;
  Fft1d fft(n);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  Eigen::VectorXcd col(n), spec(n);
  for (int j = 0; j < n; ++j) {
    col.setZero();
    col[j] = 1.0;
    fft.forward(col.data(), spec.data());
    for (int k = 0; k < n; ++k) {
      const int ks = k <= n / 2 ? k : k - n;
      const double kk = kTwoPi * ks / axis.extent();
      spec[k] *= 0.5 * hbar * hbar * kk * kk / pot.mass() / n;
    }
    fft.backward(spec.data(), col.data());
    h.col(j) = col;
  }
  for (int j = 0; j < n; ++j) h(j, j) += pot.v0(axis.point(j));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  return es.eigenvalues().head(count);
}

double fold(double e, double hbar_omega) {
  double r = std::fmod(e, hbar_omega);
  if (r > 0.5 * hbar_omega) r -= hbar_omega;
  if (r <= -0.5 * hbar_omega) r += hbar_omega;
  return r;
}

WaveFunction tunneling_state(const Axis& axis) {
  const Preset pr = preset("tunneling");
  WaveFunction psi;
  psi.axis = axis;
  psi.amplitudes.resize(axis.n);
  // minimum-uncertainty Gaussian with sigma_x = 0.25 (sigma_p = 2 at hbar=1)
  for (int i = 0; i < axis.n; ++i) {
    const double x = axis.point(i);
    const double u = (x - pr.island.x0) / pr.island.sigma_x;
    psi.amplitudes[i] = std::exp(-0.25 * u * u);
  }
  psi.amplitudes /= std::sqrt(psi.amplitudes.squaredNorm() * axis.d());
  return psi;
}

}  // namespace

TEST_CASE("undriven limit: quasienergies are folded double-well eigenvalues") {
  SystemParams sp = preset("tunneling").sys;
  sp.s = 0.0;  // undriven; omega only sets the folding window
  sp.hbar = 1.0;
  const DoubleWellPotential pot(sp);
  const Axis axis{256, -8, 8};
  const auto spec = floquet_spectrum(pot, axis, sp.hbar, sp.tau() / 2000.0);
  CHECK(spec.unitarity_defect < 1e-6);
  CHECK(spec.max_eigmag_defect < 1e-8);

  const auto exact = direct_spectrum(pot, axis, sp.hbar, 8);
  // doublet structure: the two lowest levels are nearly degenerate
  CHECK(exact[1] - exact[0] < 0.05 * (exact[2] - exact[1]));

  // each low eigenvector's Floquet partner carries the folded eigenvalue
  Fft1d fft(axis.n);
  for (int i = 0; i < 6; ++i) {
    // identify by folding: some quasienergy must sit near fold(E_i)
    const double target = fold(exact[i], sp.hbar * sp.omega);
    double best = 1e9;
    for (int m = 0; m < spec.quasienergies.size(); ++m)
      best = std::min(best, std::abs(spec.quasienergies[m] - target));
    CHECK(best < 2e-3);
  }
}

TEST_CASE("tunneling preset: twenty states expand the island Gaussian") {
  const Preset pr = preset("tunneling");
  const DoubleWellPotential pot(pr.sys);
  const Axis axis{512, -8, 8};
  const double dt = pr.sys.tau() / 1500.0;
  const auto spec = floquet_spectrum(pot, axis, pr.sys.hbar, dt);
  const auto psi0 = tunneling_state(axis);

  const auto pops = overlap_populations(spec, psi0);
  double captured20 = 0.0;
  for (int i = 0; i < 20; ++i) captured20 += pops[i];
  CHECK(captured20 >= 0.999);

  const auto basis = build_floquet_basis(spec, pot, 20, 64, psi0);
  CHECK(basis.expansion_fidelity(psi0) >= 0.999);

  // orthonormality at every sub-time
  for (const auto& phi : basis.states) {
    const Eigen::MatrixXcd s = phi.adjoint() * phi * axis.d();
    CHECK((s - Eigen::MatrixXcd::Identity(20, 20)).cwiseAbs().maxCoeff() < 1e-8);
  }

  SUBCASE("stroboscopic resummation equals direct integration") {
    // basis large enough that the dropped norm is below 1e-10
    int n_full = 20;
    double acc = 0.0;
    for (int i = 0; i < pops.size(); ++i) {
      acc += pops[i];
      if (acc >= 1.0 - 1e-10) {
        n_full = i + 1;
        break;
      }
    }
    CAPTURE(n_full);
    const auto big = build_floquet_basis(spec, pot, n_full, 32, psi0);
    const auto c = big.expand(psi0);
    CHECK(c.squaredNorm() >= 1.0 - 1e-9);

    WaveFunction direct = psi0;
    SchrodingerOptions opt;
    opt.dt = dt;
    int done = 0;
    for (const int k : {1, 8, 28, 56}) {
      evolve_schrodinger(direct, pot, pr.sys.hbar, k, opt);
      const auto resummed = closed_propagate(big, c, k);
      CHECK(l2_distance(resummed, direct) < 1e-5);
      ++done;
    }
    CHECK(done == 4);

    SUBCASE("tunneling dynamics: delocalized at 28, right island at 56") {
      auto mean_x = [&](const WaveFunction& w) {
        double m = 0.0;
        for (int i = 0; i < w.axis.n; ++i) m += w.axis.point(i) * std::norm(w.amplitudes[i]);
        return m * w.axis.d();
      };
      const double x0 = mean_x(psi0);
      CHECK(x0 == doctest::Approx(-3.52).epsilon(1e-3));
      CHECK(std::abs(mean_x(closed_propagate(big, c, 28))) < 0.4 * std::abs(x0));
      CHECK(mean_x(closed_propagate(big, c, 56)) > 0.5 * std::abs(x0));
    }
  }
}

TEST_CASE("closed_propagate rejects unfaithful expansions") {
  const Preset pr = preset("tunneling");
  const DoubleWellPotential pot(pr.sys);
  const Axis axis{256, -8, 8};
  const auto basis =
      build_floquet_basis(pot, axis, pr.sys.hbar, 3, 32, pr.sys.tau() / 1000.0,
                          tunneling_state(axis));
  const auto c = basis.expand(tunneling_state(axis));
  CHECK(c.squaredNorm() < 0.999);  // three states cannot carry the Gaussian
  CHECK_THROWS_AS(closed_propagate(basis, c, 1), grid_error);
  CHECK_NOTHROW(closed_propagate(basis, Eigen::VectorXcd::Ones(3) / std::sqrt(3.0), 0));
}

TEST_CASE("generator assembly matches a dense superoperator evaluation (n=2)") {
  // hand-built two-state basis with synthetic sub-time dependence
  const int nx = 32, n_sub = 32;
  const Axis axis{nx, -1, 1};
  FloquetBasis basis;
  basis.n = 2;
  basis.n_sub = n_sub;
  basis.hbar = 0.7;
  basis.tau = 2.1;
  basis.axis = axis;
  basis.quasienergies.resize(2);
  basis.quasienergies << 0.4, -0.3;

  Eigen::VectorXcd e1(nx), e2(nx);
  for (int i = 0; i < nx; ++i) {
    const double x = axis.point(i);
    e1[i] = std::exp(-4.0 * x * x);
    e2[i] = x * std::exp(-4.0 * x * x);
  }
  e1 /= std::sqrt((e1.squaredNorm() * axis.d()));
  e2 -= e1 * (e1.adjoint() * e2)(0) * axis.d();
  e2 /= std::sqrt((e2.squaredNorm() * axis.d()));

  basis.states.resize(n_sub);
  for (int k = 0; k < n_sub; ++k) {
    const double th = 0.3 * std::sin(kTwoPi * k / n_sub);
    Eigen::MatrixXcd phi(nx, 2);
    phi.col(0) = std::cos(th) * e1 + std::sin(th) * e2;
    phi.col(1) = -std::sin(th) * e1 + std::cos(th) * e2;
    basis.states[k] = phi;
  }
  const double D = 0.05;
  const auto gen = build_generator(basis, D);
  CHECK(gen.trace_defect < 1e-12);
  CHECK(gen.hermiticity_defect < 1e-12);

  // independent dense route: apply the averaged superoperator to each E_ab
  Eigen::VectorXd xs(nx);
  for (int i = 0; i < nx; ++i) xs[i] = axis.point(i);
  std::vector<Eigen::MatrixXcd> xk(n_sub);
  for (int k = 0; k < n_sub; ++k)
    xk[k] = basis.states[k].adjoint() * xs.asDiagonal() * basis.states[k] * axis.d();

  const cplx iu(0, 1);
  for (int al = 0; al < 2; ++al)
    for (int be = 0; be < 2; ++be) {
      Eigen::MatrixXcd sig = Eigen::MatrixXcd::Zero(2, 2);
      sig(al, be) = 1.0;
      Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(2, 2);
      Eigen::MatrixXcd e_diag = basis.quasienergies.asDiagonal();
      rhs -= iu / basis.hbar * (e_diag * sig - sig * e_diag);
      for (int k = 0; k < n_sub; ++k)
        rhs -= D / (basis.hbar * basis.hbar) / double(n_sub) *
               (xk[k] * xk[k] * sig - 2.0 * xk[k] * sig * xk[k] + sig * xk[k] * xk[k]);
      for (int mu = 0; mu < 2; ++mu)
        for (int nu = 0; nu < 2; ++nu)
          CHECK(std::abs(gen.element(mu, nu, al, be) - rhs(mu, nu)) < 1e-12);
    }
}

TEST_CASE("D=0 generator is pure quasienergy rotation") {
  const Preset pr = preset("tunneling");
  const DoubleWellPotential pot(pr.sys);
  const Axis axis{256, -8, 8};
  const auto psi0 = tunneling_state(axis);
  const auto basis =
      build_floquet_basis(pot, axis, pr.sys.hbar, 12, 32, pr.sys.tau() / 1000.0, psi0);
  const auto gen = build_generator(basis, 0.0);
  CHECK(gen.trace_defect < 1e-12);

  Eigen::MatrixXcd sigma0 = sigma_from_coefficients(basis.expand(psi0).normalized());
  const auto traj = propagate_sigma(gen, basis, sigma0, 30, 0);
  for (const auto& s : traj.sigmas)
    for (int i = 0; i < 12; ++i)
      CHECK(std::abs(s(i, i).real() - sigma0(i, i).real()) < 1e-9);
}

TEST_CASE("open sigma propagation: trace, hermiticity, positivity, entropy") {
  const Preset pr = preset("tunneling");
  const DoubleWellPotential pot(pr.sys);
  const Axis axis{256, -8, 8};
  const auto psi0 = tunneling_state(axis);
  const auto basis =
      build_floquet_basis(pot, axis, pr.sys.hbar, 16, 32, pr.sys.tau() / 1000.0, psi0);
  const auto gen = build_generator(basis, 0.01);
  CHECK(gen.trace_defect < 1e-10);
  CHECK(gen.hermiticity_defect < 1e-10);

  Eigen::VectorXcd c = basis.expand(psi0);
  const auto traj = propagate_sigma(gen, basis, sigma_from_coefficients(c), 80, 0);
  for (const auto& s : traj.sigmas) {
    CHECK(std::abs(s.trace().real() - 1.0) < 1e-8);
    CHECK(std::abs(s.trace().imag()) < 1e-10);
    CHECK((s - s.adjoint()).cwiseAbs().maxCoeff() < 1e-8);
  }
  CHECK(traj.min_eigenvalue > -1e-6);

  const auto first = sigma_observables(basis, traj.sigmas.front());
  const auto last = sigma_observables(basis, traj.sigmas.back());
  CHECK(first.h_vn < 1e-8);      // pure
  CHECK(last.h_vn > first.h_vn);  // decoherence mixes

  // maximally mixed reference
  const Eigen::MatrixXcd mixed = Eigen::MatrixXcd::Identity(16, 16) / 16.0;
  CHECK(sigma_observables(basis, mixed).h_vn == doctest::Approx(std::log(16.0)).epsilon(1e-10));

  // linear entropy bounds the von Neumann entropy from below
  for (size_t k = 0; k < traj.sigmas.size(); k += 16) {
    const double purity = (traj.sigmas[k] * traj.sigmas[k]).trace().real();
    const double h_lin = -std::log(purity);
    CHECK(h_lin <= sigma_observables(basis, traj.sigmas[k]).h_vn + 1e-9);
  }
}

TEST_CASE("sigma reconstruction agrees with the direct Wigner transform") {
  const Preset pr = preset("tunneling");
  const DoubleWellPotential pot(pr.sys);
  const Axis axis{256, -8, 8};
  const auto psi0 = tunneling_state(axis);
  const auto basis =
      build_floquet_basis(pot, axis, pr.sys.hbar, 8, 32, pr.sys.tau() / 1000.0, psi0);

  // driven Floquet states carry long momentum tails: keep the p box generous
  const PhaseGrid grid = PhaseGrid::make(256, 256, -8, 8, -20, 20);
  Eigen::MatrixXcd sigma = Eigen::MatrixXcd::Zero(8, 8);
  sigma(0, 0) = 1.0;
  const auto w = sigma_to_wigner(basis, sigma, grid);

  WaveFunction phi0;
  phi0.axis = axis;
  phi0.amplitudes = basis.states[0].col(0);
  const auto ref = wigner_transform(phi0, grid, pr.sys.hbar);
  CHECK(l2_distance(w, ref) < 1e-10);
  CHECK(w.norm() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("sea state needs well over two hundred Floquet states") {
  const Preset pr = preset("fig1b");
  const DoubleWellPotential pot(pr.sys);
  const Axis axis{1024, -8, 8};
  const auto spec = floquet_spectrum(pot, axis, pr.sys.hbar, pr.sys.tau() / 600.0);
  WaveFunction psi;
  psi.axis = axis;
  psi.amplitudes.resize(axis.n);
  for (int i = 0; i < axis.n; ++i) {
    const double u = (axis.point(i) - pr.sea.x0) / pr.sea.sigma_x;
    psi.amplitudes[i] = std::exp(-0.25 * u * u);
  }
  psi.amplitudes /= std::sqrt(psi.amplitudes.squaredNorm() * axis.d());

  const auto pops = overlap_populations(spec, psi);
  double acc = 0.0;
  int needed = 0;
  for (int i = 0; i < pops.size(); ++i) {
    acc += pops[i];
    if (acc >= 0.999) {
      needed = i + 1;
      break;
    }
  }
  CHECK(needed > 200);
}
