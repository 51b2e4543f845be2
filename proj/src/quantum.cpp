#include "dwell/quantum.hpp"

#include <cmath>
#include <vector>

#include "dwell/fft.hpp"

namespace dwell {

namespace {

double spectral_edge_fraction(const Eigen::VectorXcd& spec, double band_lo_fraction) {
  const int n = static_cast<int>(spec.size());
  double total = 0.0, band = 0.0;
  for (int j = 0; j < n; ++j) {
    const int k = j <= n / 2 ? j : n - j;  // |k| bin
    const double v = std::norm(spec[j]);
    total += v;
    if (k >= band_lo_fraction * (n / 2)) band += v;
  }
  return total > 0 ? band / total : 0.0;
}

}  // namespace

EvolveDiagnostics evolve_schrodinger(WaveFunction& psi, const Potential& pot, double hbar,
                                     double t_final_periods, const SchrodingerOptions& opt,
                                     const WaveSink& sink) {
  const double period = pot.reference_period();
  if (!(opt.dt > 0)) throw config_error("evolve_schrodinger: dt must be positive");
  if (opt.dt > period / 500.0)
    throw config_error("evolve_schrodinger: dt above period/500");
  const double norm0 = psi.norm();
  if (std::abs(norm0 - 1.0) > 1e-8)
    throw grid_error("evolve_schrodinger: psi not normalized");

  const int n = psi.axis.n;
  const double t0 = psi.time * period;
  const double t1 = t_final_periods * period;
  EvolveDiagnostics diag;
  if (t1 <= t0) return diag;
  const int nsteps = std::max(1, static_cast<int>(std::llround((t1 - t0) / opt.dt)));
  const double dt = (t1 - t0) / nsteps;
  const int stride = opt.sample_stride > 0
                         ? opt.sample_stride
                         : std::max(1, static_cast<int>(std::llround(period / (16.0 * dt))));

  Fft1d fft(n);
  // Kinetic multiplier at signed k, with the 1/n round-trip factor folded in.
  Eigen::VectorXcd drift(n);
  for (int j = 0; j < n; ++j) {
    const int js = j <= n / 2 ? j : j - n;
    const double k = kTwoPi * js / psi.axis.extent();
    drift[j] = std::polar(1.0 / n, -hbar * k * k * dt / (2.0 * pot.mass()));
  }
  Eigen::VectorXd v0(n), xs(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = psi.axis.point(i);
    v0[i] = pot.v0(xs[i]);
  }

  Eigen::VectorXcd spec(n);
  auto checks = [&](double t_abs) {
    const double leak = boundary_mass_fraction(psi);
    diag.max_leakage = std::max(diag.max_leakage, leak);
    if (leak > opt.leakage_abort)
      throw stability_error("evolve_schrodinger: boundary leakage " + std::to_string(leak) +
                            " at t=" + std::to_string(t_abs / period));
    fft.forward(psi.amplitudes.data(), spec.data());
    const double edge = spectral_edge_fraction(spec, 0.98);
    if (edge > 1e-6)
      throw stability_error("evolve_schrodinger: aliasing at the momentum Nyquist (" +
                            std::to_string(edge) + ")");
  };

  checks(t0);
  if (sink) sink(psi);

  for (int kstep = 0; kstep < nsteps; ++kstep) {
    const double t = t0 + kstep * dt;
    const double drive = pot.drive_s() * std::cos(pot.drive_omega() * (t + 0.5 * dt));
    for (int i = 0; i < n; ++i) {
      const double phase = -(v0[i] + drive * xs[i]) * dt / (2.0 * hbar);
      psi.amplitudes[i] *= std::polar(1.0, phase);
    }
    fft.forward(psi.amplitudes.data(), spec.data());
    spec.array() *= drift.array();
    fft.backward(spec.data(), psi.amplitudes.data());
    for (int i = 0; i < n; ++i) {
      const double phase = -(v0[i] + drive * xs[i]) * dt / (2.0 * hbar);
      psi.amplitudes[i] *= std::polar(1.0, phase);
    }
    ++diag.steps;
    psi.time = (t + dt) / period;
    if ((kstep + 1) % stride == 0 || kstep + 1 == nsteps) {
      checks(t + dt);
      if (sink) sink(psi);
    }
  }
  psi.time = t1 / period;
  diag.norm_drift = std::abs(psi.norm() - norm0);
  return diag;
}

EvolveDiagnostics evolve_wigner(WignerField& f, const Potential& pot, const BathParams& bath,
                                double t_final_periods, const PropagatorOptions& opt,
                                WignerMode mode, const FieldSink& sink) {
  if (mode == WignerMode::Classical) return evolve_liouville(f, pot, bath, t_final_periods, opt, sink);
  PhaseSpacePropagator prop(pot, f.grid, KickMode::Quantum, bath, f.hbar, opt);
  return prop.evolve(f, t_final_periods, sink);
}

FringeDecayFit fringe_decay_probe(double delta_x, const BathParams& bath, double hbar,
                                  double t_max, double sigma_x) {
  bath.validate();
  if (!(delta_x > 0) || !(hbar > 0)) throw config_error("fringe_decay_probe: bad arguments");
  if (!(sigma_x > 0)) sigma_x = delta_x / 10.0;
  const double k_p = delta_x / hbar;
  if (!(t_max > 0)) t_max = bath.D > 0 ? 1.0 / (bath.D * k_p * k_p) : 1.0;

  // Cat state of two packets at ±delta_x/2. The kinetic shear is frozen by a
  // very heavy mass so the fringe band stays at λ = k_p; the decay rate does
  // not depend on that choice.
  const double sigma_p = 0.5 * hbar / sigma_x;
  const Axis axis{128, -1.25 * delta_x, 1.25 * delta_x};
  const double p_ext = 8.0 * sigma_p;
  const int np = 64;
  PhaseGrid grid = PhaseGrid::make(axis.n, np, axis.min, axis.max, -p_ext, p_ext);
  if (grid.kp_max() < 1.5 * k_p) {
    // refine dp until the fringe band fits
    int np2 = np;
    while (kPi * np2 / (2.0 * p_ext) < 1.5 * k_p) np2 *= 2;
    grid = PhaseGrid::make(axis.n, np2, axis.min, axis.max, -p_ext, p_ext);
  }

  WaveFunction psi;
  psi.axis = axis;
  psi.amplitudes.resize(axis.n);
  for (int i = 0; i < axis.n; ++i) {
    const double x = axis.point(i);
    const double up = (x - 0.5 * delta_x) / sigma_x;
    const double um = (x + 0.5 * delta_x) / sigma_x;
    psi.amplitudes[i] = std::exp(-0.25 * up * up) + std::exp(-0.25 * um * um);
  }
  psi.amplitudes /= std::sqrt(psi.amplitudes.squaredNorm() * axis.d());
  WignerField f = wigner_transform(psi, grid, hbar);

  FreePotential frozen(1e9);
  const int nsamp = 40;
  std::vector<double> ts, logband;
  RowFft rfft(grid.nx(), grid.np());
  Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> spec(grid.nx(),
                                                                            grid.np() / 2 + 1);
  auto band_power = [&](const WignerField& field) {
    rfft.forward(field.values.data(), spec.data());
    const double dlam = kTwoPi / grid.p.extent();
    double acc = 0.0;
    for (int i = 0; i < grid.nx(); ++i)
      for (int j = 0; j < spec.cols(); ++j) {
        const double lam = j * dlam;
        if (lam > 0.8 * k_p && lam < 1.2 * k_p) acc += std::norm(spec(i, j));
      }
    return acc;
  };

  PropagatorOptions popt;
  popt.dt = t_max / (10.0 * nsamp);
  popt.sample_stride = 10;
  PhaseSpacePropagator prop(frozen, grid, KickMode::Quantum, bath, hbar, popt);
  prop.evolve(f, t_max / frozen.reference_period(), [&](const WignerField& field) {
    const double bp = band_power(field);
    if (bp > 0) {
      ts.push_back(field.time * frozen.reference_period());
      logband.push_back(std::log(bp));
    }
  });

  if (ts.size() < 8) throw fit_error("fringe_decay_probe: contrast series too short");
  // least squares on log band power; power decays at 2Γ
  const int m = static_cast<int>(ts.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < m; ++i) {
    sx += ts[i];
    sy += logband[i];
    sxx += ts[i] * ts[i];
    sxy += ts[i] * logband[i];
    syy += logband[i] * logband[i];
  }
  const double denom = m * sxx - sx * sx;
  if (denom == 0) throw fit_error("fringe_decay_probe: degenerate time series");
  const double slope = (m * sxy - sx * sy) / denom;
  const double ss_tot = syy - sy * sy / m;
  const double ss_res = ss_tot - slope * (sxy - sx * sy / m);
  FringeDecayFit fit;
  fit.gamma = -0.5 * slope;
  fit.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 0.0;
  fit.k_p = k_p;
  return fit;
}

StructureScale structure_scale(const WignerField& f, double quantile) {
  const int nx = f.grid.nx(), np = f.grid.np();
  Fft2dR2c fft(nx, np);
  Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> spec(nx, np / 2 + 1);
  fft.forward(f.values.data(), spec.data());

  Eigen::VectorXd px = Eigen::VectorXd::Zero(nx / 2 + 1);
  Eigen::VectorXd pp = Eigen::VectorXd::Zero(np / 2 + 1);
  for (int i = 0; i < nx; ++i) {
    const int ki = i <= nx / 2 ? i : nx - i;
    for (int j = 0; j < np / 2 + 1; ++j) {
      const double wgt = (j == 0 || j == np / 2) ? 1.0 : 2.0;
      const double v = wgt * std::norm(spec(i, j));
      px[ki] += v;
      pp[j] += v;
    }
  }
  auto quantile_k = [&](const Eigen::VectorXd& marg, double dk) {
    const double total = marg.sum();
    if (total <= 0) return 0.0;
    double acc = 0.0;
    for (int k = 0; k < marg.size(); ++k) {
      acc += marg[k];
      if (acc >= quantile * total) return k * dk;
    }
    return (marg.size() - 1) * dk;
  };
  const double kxq = quantile_k(px, kTwoPi / f.grid.x.extent());
  const double kpq = quantile_k(pp, kTwoPi / f.grid.p.extent());
  StructureScale s;
  s.delta_x = kxq > 0 ? kPi / kxq : f.grid.x.extent();
  s.delta_p = kpq > 0 ? kPi / kpq : f.grid.p.extent();
  s.area = s.delta_x * s.delta_p;
  return s;
}

}  // namespace dwell
