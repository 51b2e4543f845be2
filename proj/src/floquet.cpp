#include "dwell/floquet.hpp"

#include <fftw3.h>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>
#include <numeric>

#include "dwell/fft.hpp"

namespace dwell {

namespace detail {
std::mutex& fft_plan_mutex();
}

namespace {

// Split-step kernel applied to every column of a column-major complex
// matrix at once. Same formulas as evolve_schrodinger: half kick, full
// drift, half kick, drive sampled at the step midpoint.
class MatrixStepper {
 public:
  MatrixStepper(const Potential& pot, const Axis& axis, double hbar, double dt, int ncols)
      : pot_(pot), axis_(axis), hbar_(hbar), dt_(dt), n_(axis.n), ncols_(ncols) {
    buf_ = reinterpret_cast<cplx*>(fftw_alloc_complex(static_cast<size_t>(n_) * ncols_));
    {
      std::lock_guard<std::mutex> lock(detail::fft_plan_mutex());
      int dims[1] = {n_};
      plan_fwd_ = fftw_plan_many_dft(1, dims, ncols_, reinterpret_cast<fftw_complex*>(buf_),
                                     nullptr, 1, n_, reinterpret_cast<fftw_complex*>(buf_), nullptr,
                                     1, n_, FFTW_FORWARD, FFTW_ESTIMATE);
      plan_bwd_ = fftw_plan_many_dft(1, dims, ncols_, reinterpret_cast<fftw_complex*>(buf_),
                                     nullptr, 1, n_, reinterpret_cast<fftw_complex*>(buf_), nullptr,
                                     1, n_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    if (!plan_fwd_ || !plan_bwd_) throw std::runtime_error("MatrixStepper: planning failed");
    drift_.resize(n_);
    v0_.resize(n_);
    xs_.resize(n_);
    for (int j = 0; j < n_; ++j) {
      const int js = j <= n_ / 2 ? j : j - n_;
      const double k = kTwoPi * js / axis.extent();
      drift_[j] = std::polar(1.0 / n_, -hbar * k * k * dt / (2.0 * pot.mass()));
      xs_[j] = axis.point(j);
      v0_[j] = pot.v0(xs_[j]);
    }
  }

  ~MatrixStepper() {
    std::lock_guard<std::mutex> lock(detail::fft_plan_mutex());
    fftw_destroy_plan(plan_fwd_);
    fftw_destroy_plan(plan_bwd_);
    fftw_free(buf_);
  }

  // One step of every column of m (n_ x ncols_, column-major) from time t.
  void step(Eigen::MatrixXcd& m, double t) {
    const double drive = pot_.drive_s() * std::cos(pot_.drive_omega() * (t + 0.5 * dt_));
    Eigen::VectorXcd kick(n_);
    for (int j = 0; j < n_; ++j)
      kick[j] = std::polar(1.0, -(v0_[j] + drive * xs_[j]) * dt_ / (2.0 * hbar_));
    m.array().colwise() *= kick.array();
    std::memcpy(buf_, m.data(), sizeof(cplx) * static_cast<size_t>(n_) * ncols_);
    fftw_execute_dft(plan_fwd_, reinterpret_cast<fftw_complex*>(buf_),
                     reinterpret_cast<fftw_complex*>(buf_));
    Eigen::Map<Eigen::MatrixXcd> mm(buf_, n_, ncols_);
    mm.array().colwise() *= drift_.array();
    fftw_execute_dft(plan_bwd_, reinterpret_cast<fftw_complex*>(buf_),
                     reinterpret_cast<fftw_complex*>(buf_));
    std::memcpy(m.data(), buf_, sizeof(cplx) * static_cast<size_t>(n_) * ncols_);
    m.array().colwise() *= kick.array();
  }

 private:
  const Potential& pot_;
  Axis axis_;
  double hbar_, dt_;
  int n_, ncols_;
  cplx* buf_;
  fftw_plan plan_fwd_{}, plan_bwd_{};
  Eigen::VectorXcd drift_;
  Eigen::VectorXd v0_, xs_;
};

double fold_quasienergy(cplx eigenvalue, double hbar, double tau) {
  return -hbar * std::arg(eigenvalue) / tau;
}

}  // namespace

FloquetSpectrum floquet_spectrum(const Potential& pot, const Axis& axis, double hbar, double dt) {
  const double tau = pot.reference_period();
  if (!(dt > 0)) dt = tau / 1000.0;
  const int nsteps = std::max(1, static_cast<int>(std::llround(tau / dt)));
  const double h = tau / nsteps;
  const int n = axis.n;

  // U(τ) columns: position basis vectors (1/√dx at one grid point).
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(n, n);
  MatrixStepper stepper(pot, axis, hbar, h, n);
  for (int k = 0; k < nsteps; ++k) stepper.step(u, k * h);

  FloquetSpectrum spec;
  spec.axis = axis;
  spec.hbar = hbar;
  spec.tau = tau;
  spec.dt = h;
  spec.unitarity_defect = (u.adjoint() * u - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
  if (spec.unitarity_defect > 1e-6)
    throw stability_error("floquet_spectrum: assembled U(tau) non-unitary beyond 1e-6; "
                          "grid or dt inadequate");

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(u);
  if (solver.info() != Eigen::Success)
    throw stability_error("floquet_spectrum: eigendecomposition failed");
  spec.quasienergies.resize(n);
  spec.states0 = solver.eigenvectors();
  // eigenvectors come ℓ2-normalized; switch to Σ|φ|² dx = 1
  spec.states0 /= std::sqrt(axis.d());
  for (int i = 0; i < n; ++i) {
    spec.quasienergies[i] = fold_quasienergy(solver.eigenvalues()[i], hbar, tau);
    spec.max_eigmag_defect =
        std::max(spec.max_eigmag_defect, std::abs(std::abs(solver.eigenvalues()[i]) - 1.0));
  }

  // conditioning report: smallest eigenphase separation
  Eigen::VectorXd phases(n);
  for (int i = 0; i < n; ++i) phases[i] = std::arg(solver.eigenvalues()[i]);
  std::sort(phases.data(), phases.data() + n);
  double gap = kTwoPi + phases[0] - phases[n - 1];
  for (int i = 1; i < n; ++i) gap = std::min(gap, phases[i] - phases[i - 1]);
  spec.min_eigenphase_gap = gap;
  return spec;
}

Eigen::VectorXd overlap_populations(const FloquetSpectrum& spec, const WaveFunction& psi) {
  if (!(psi.axis == spec.axis)) throw grid_error("overlap_populations: axis mismatch");
  Eigen::VectorXcd c = spec.states0.adjoint() * psi.amplitudes * spec.axis.d();
  Eigen::VectorXd pops = c.cwiseAbs2();
  std::sort(pops.data(), pops.data() + pops.size(), std::greater<double>());
  return pops;
}

int select_basis_size(const FloquetSpectrum& spec, const WaveFunction& psi, int n_min, double D) {
  if (!(psi.axis == spec.axis)) throw grid_error("select_basis_size: axis mismatch");
  const int n_all = spec.axis.n;
  Eigen::VectorXcd c = spec.states0.adjoint() * psi.amplitudes * spec.axis.d();
  std::vector<int> order(n_all);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return std::norm(c[a]) > std::norm(c[b]); });

  // Candidates: generous overlap-ordered pool. Occupation after one open
  // period estimated from the period-start Lindblad gain term.
  const int n_cap = 64;
  const int n_pool = std::min(n_all, std::max(2 * n_min, n_min + 16));
  Eigen::MatrixXcd phi(n_all, n_pool);
  for (int i = 0; i < n_pool; ++i) phi.col(i) = spec.states0.col(order[i]);
  Eigen::VectorXd xs(n_all);
  for (int i = 0; i < n_all; ++i) xs[i] = spec.axis.point(i);
  Eigen::MatrixXcd x_elem =
      phi.adjoint() * xs.asDiagonal() * phi * spec.axis.d();  // n_pool x n_pool

  int n_sel = std::min(n_min, n_pool);
  const double gain_scale = 2.0 * D * spec.tau / (spec.hbar * spec.hbar);
  for (int k = 0; k < n_pool; ++k) {
    if (k < n_min) continue;
    double occ = std::norm(c[order[k]]);
    for (int m = 0; m < n_min; ++m)
      occ += gain_scale * std::norm(x_elem(k, m)) * std::norm(c[order[m]]);
    if (occ >= 1e-4) n_sel = k + 1;
  }
  return std::min(n_sel, n_cap);
}

FloquetBasis build_floquet_basis(const FloquetSpectrum& spec, const Potential& pot, int n,
                                 int n_sub, const WaveFunction& select_state) {
  if (n < 1 || n > spec.axis.n)
    throw config_error("build_floquet_basis: n outside the grid-supported dimension");
  if (n_sub < 2) throw config_error("build_floquet_basis: n_sub too small");
  if (!(select_state.axis == spec.axis))
    throw grid_error("build_floquet_basis: selection state axis mismatch");

  const int n_all = spec.axis.n;
  Eigen::VectorXcd c = spec.states0.adjoint() * select_state.amplitudes * spec.axis.d();
  std::vector<int> order(n_all);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return std::norm(c[a]) > std::norm(c[b]); });

  FloquetBasis basis;
  basis.n = n;
  basis.n_sub = n_sub;
  basis.hbar = spec.hbar;
  basis.tau = spec.tau;
  basis.axis = spec.axis;
  basis.quasienergies.resize(n);
  Eigen::MatrixXcd phi0(n_all, n);
  for (int i = 0; i < n; ++i) {
    phi0.col(i) = spec.states0.col(order[i]);
    basis.quasienergies[i] = spec.quasienergies[order[i]];
  }

  // Löwdin orthonormalization (S ≈ I already; keeps eigenvalue association).
  Eigen::MatrixXcd s = phi0.adjoint() * phi0 * spec.axis.d();
  basis.max_orthonormality_defect =
      (s - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(s);
  Eigen::MatrixXcd s_invsqrt = es.operatorInverseSqrt();
  phi0 = phi0 * s_invsqrt;

  // Periodic parts at sub-times: forward propagation and phase removal,
  //   φ_μ(t_k) = e^{+iε_μ t_k/ħ} U(t_k, 0) φ_μ(0).
  const double tau = spec.tau;
  int nsteps = std::max(n_sub, static_cast<int>(std::llround(tau / spec.dt)));
  nsteps = ((nsteps + n_sub - 1) / n_sub) * n_sub;  // divisible by n_sub
  const double h = tau / nsteps;
  const int per_sub = nsteps / n_sub;

  basis.states.assign(n_sub, Eigen::MatrixXcd());
  basis.states[0] = phi0;
  MatrixStepper stepper(pot, spec.axis, spec.hbar, h, n);
  Eigen::MatrixXcd m = phi0;
  for (int k = 1; k < n_sub; ++k) {
    for (int j = 0; j < per_sub; ++j) stepper.step(m, ((k - 1) * per_sub + j) * h);
    basis.states[k] = m;
    const double tk = k * per_sub * h;
    for (int i = 0; i < n; ++i)
      basis.states[k].col(i) *= std::polar(1.0, basis.quasienergies[i] * tk / spec.hbar);
  }

  // period-averaged x elements (uniform sub-time mean = periodic trapezoid)
  Eigen::VectorXd xs(n_all);
  for (int i = 0; i < n_all; ++i) xs[i] = spec.axis.point(i);
  basis.x_avg = Eigen::MatrixXcd::Zero(n, n);
  for (int k = 0; k < n_sub; ++k)
    basis.x_avg += basis.states[k].adjoint() * xs.asDiagonal() * basis.states[k] * spec.axis.d();
  basis.x_avg /= n_sub;

  basis.left_proj = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n_all; ++i) {
    if (spec.axis.point(i) < 0.0)
      basis.left_proj += phi0.row(i).adjoint() * phi0.row(i) * spec.axis.d();
  }
  return basis;
}

FloquetBasis build_floquet_basis(const Potential& pot, const Axis& axis, double hbar, int n,
                                 int n_sub, double dt, const WaveFunction& select_state) {
  return build_floquet_basis(floquet_spectrum(pot, axis, hbar, dt), pot, n, n_sub, select_state);
}

Eigen::VectorXcd FloquetBasis::expand(const WaveFunction& psi) const {
  if (!(psi.axis == axis)) throw grid_error("FloquetBasis::expand: axis mismatch");
  return states[0].adjoint() * psi.amplitudes * axis.d();
}

double FloquetBasis::expansion_fidelity(const WaveFunction& psi) const {
  return expand(psi).squaredNorm();
}

WaveFunction closed_propagate(const FloquetBasis& basis, const Eigen::VectorXcd& coefficients,
                              int k_periods) {
  if (coefficients.size() != basis.n) throw config_error("closed_propagate: coefficient size");
  const double fidelity = coefficients.squaredNorm();
  if (fidelity < 0.999)
    throw grid_error("closed_propagate: expansion fidelity below threshold (" +
                     std::to_string(fidelity) + ")");
  Eigen::VectorXcd c = coefficients;
  for (int i = 0; i < basis.n; ++i)
    c[i] *= std::polar(1.0, -basis.quasienergies[i] * k_periods * basis.tau / basis.hbar);
  WaveFunction psi;
  psi.axis = basis.axis;
  psi.time = k_periods;
  psi.amplitudes = basis.states[0] * c;
  return psi;
}

CoarseGenerator build_generator(const FloquetBasis& basis, double D) {
  if (basis.n_sub < 32) throw config_error("build_generator: n_sub must be >= 32");
  const int n = basis.n;
  const int nsub = basis.n_sub;

  Eigen::VectorXd xs(basis.axis.n);
  for (int i = 0; i < basis.axis.n; ++i) xs[i] = basis.axis.point(i);

  // Projected x at every sub-time, plus half-sampled averages for the
  // undersampling check.
  std::vector<Eigen::MatrixXcd> xk(nsub);
  for (int k = 0; k < nsub; ++k)
    xk[k] = basis.states[k].adjoint() * xs.asDiagonal() * basis.states[k] * basis.axis.d();

  Eigen::MatrixXcd x_avg = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd x2_avg = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd x_avg_half = Eigen::MatrixXcd::Zero(n, n);
  for (int k = 0; k < nsub; ++k) {
    x_avg += xk[k];
    x2_avg += xk[k] * xk[k];
    if (k % 2 == 0) x_avg_half += xk[k];
  }
  x_avg /= nsub;
  x2_avg /= nsub;
  x_avg_half /= (nsub / 2);
  const double scale = std::max(1.0, x_avg.cwiseAbs().maxCoeff());
  if ((x_avg - x_avg_half).cwiseAbs().maxCoeff() / scale > 1e-6)
    throw config_error("build_generator: sub-time undersampling (averages unstable on refinement)");

  CoarseGenerator gen;
  gen.n = n;
  gen.D = D;
  gen.hbar = basis.hbar;
  gen.tau = basis.tau;
  gen.x2_avg = x2_avg;
  const double dscale = D / (basis.hbar * basis.hbar);
  gen.m_vec = Eigen::MatrixXcd::Zero(n * n, n * n);
  const cplx iunit(0.0, 1.0);

  for (int k = 0; k < nsub; ++k) {
    const Eigen::MatrixXcd& x = xk[k];
    const Eigen::MatrixXcd x2 = x * x;
    for (int mu = 0; mu < n; ++mu)
      for (int nu = 0; nu < n; ++nu) {
        const int row = mu * n + nu;
        for (int al = 0; al < n; ++al)
          for (int be = 0; be < n; ++be) {
            cplx v(0.0, 0.0);
            if (be == nu) v += x2(mu, al);
            if (al == mu) v += x2(be, nu);  // (x²)†_{νβ} with x Hermitian
            v -= 2.0 * x(mu, al) * x(be, nu);
            gen.m_vec(row, al * n + be) -= dscale * v / static_cast<double>(nsub);
          }
      }
  }
  for (int mu = 0; mu < n; ++mu)
    for (int nu = 0; nu < n; ++nu)
      gen.m_vec(mu * n + nu, mu * n + nu) +=
          -iunit / basis.hbar * (basis.quasienergies[mu] - basis.quasienergies[nu]);

  // measured structural invariants
  double trace_defect = 0.0;
  for (int al = 0; al < n; ++al)
    for (int be = 0; be < n; ++be) {
      cplx acc(0.0, 0.0);
      for (int mu = 0; mu < n; ++mu) acc += gen.m_vec(mu * n + mu, al * n + be);
      trace_defect = std::max(trace_defect, std::abs(acc));
    }
  gen.trace_defect = trace_defect;
  double herm = 0.0;
  for (int mu = 0; mu < n; ++mu)
    for (int nu = 0; nu < n; ++nu)
      for (int al = 0; al < n; ++al)
        for (int be = 0; be < n; ++be)
          herm = std::max(herm, std::abs(gen.m_vec(nu * n + mu, be * n + al) -
                                         std::conj(gen.m_vec(mu * n + nu, al * n + be))));
  gen.hermiticity_defect = herm;
  return gen;
}

Eigen::MatrixXcd sigma_from_coefficients(const Eigen::VectorXcd& c) {
  const double norm = c.squaredNorm();
  if (!(norm > 0)) throw config_error("sigma_from_coefficients: zero coefficient vector");
  return c * c.adjoint() / norm;
}

namespace {

double von_neumann_entropy(const Eigen::MatrixXcd& sigma, double* min_eig = nullptr) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (sigma + sigma.adjoint()));
  double h = 0.0;
  if (min_eig) *min_eig = es.eigenvalues().minCoeff();
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const double lam = es.eigenvalues()[i];
    if (lam > 1e-14) h -= lam * std::log(lam);
  }
  return h;
}

}  // namespace

SigmaTrajectory propagate_sigma(const CoarseGenerator& gen, const FloquetBasis& basis,
                                const Eigen::MatrixXcd& sigma0, int k_periods,
                                int switch_on_period) {
  const int n = gen.n;
  if (sigma0.rows() != n || sigma0.cols() != n) throw config_error("propagate_sigma: sigma size");
  if (std::abs(sigma0.trace().real() - 1.0) > 1e-8 ||
      std::abs(sigma0.trace().imag()) > 1e-8)
    throw config_error("propagate_sigma: sigma0 trace must be 1");
  if (switch_on_period < 0) throw config_error("propagate_sigma: switch_on_period < 0");

  SigmaTrajectory traj;
  traj.min_eigenvalue = 0.0;
  Eigen::MatrixXcd propagator;  // e^{M tau}, built on first use

  Eigen::MatrixXcd sigma = sigma0;
  const double log_n = std::log(static_cast<double>(n));
  for (int k = 0; k <= k_periods; ++k) {
    traj.times.push_back(k);
    traj.sigmas.push_back(sigma);
    double min_eig = 0.0;
    const double hvn = von_neumann_entropy(sigma, &min_eig);
    traj.max_h_vn = std::max(traj.max_h_vn, hvn);
    traj.min_eigenvalue = std::min(traj.min_eigenvalue, min_eig);
    if (hvn >= 0.95 * log_n) traj.saturation_flagged = true;
    if (k == k_periods) break;

    if (k < switch_on_period) {
      // closed stroboscopic phases
      for (int mu = 0; mu < n; ++mu)
        for (int nu = 0; nu < n; ++nu)
          sigma(mu, nu) *= std::polar(
              1.0, -(basis.quasienergies[mu] - basis.quasienergies[nu]) * basis.tau / basis.hbar);
    } else {
      if (propagator.size() == 0) propagator = (gen.m_vec * gen.tau).exp();
      Eigen::Map<const Eigen::VectorXcd> vec_in(sigma.data(), n * n);
      // sigma is column-major; m_vec rows index mu*n+nu (row-major pairs).
      // Work on the transposed layout to keep the index convention.
      Eigen::MatrixXcd sig_t = sigma.transpose();
      Eigen::Map<const Eigen::VectorXcd> v(sig_t.data(), n * n);
      Eigen::VectorXcd out = propagator * v;
      Eigen::MatrixXcd out_t = Eigen::Map<const Eigen::MatrixXcd>(out.data(), n, n);
      sigma = out_t.transpose();
    }
  }
  return traj;
}

SigmaObservables sigma_observables(const FloquetBasis& basis, const Eigen::MatrixXcd& sigma) {
  SigmaObservables obs;
  obs.mean_x = (basis.x_avg * sigma).trace().real();
  obs.h_vn = von_neumann_entropy(sigma);
  obs.p_left = (basis.left_proj * sigma).trace().real();
  obs.p_right = sigma.trace().real() - obs.p_left;
  return obs;
}

WignerField sigma_to_wigner(const FloquetBasis& basis, const Eigen::MatrixXcd& sigma,
                            const PhaseGrid& grid) {
  return wigner_transform_mixture(basis.states[0], sigma, basis.axis, grid, basis.hbar);
}

Eigen::VectorXd mean_energies(const FloquetBasis& basis, const Potential& pot) {
  const int n_all = basis.axis.n;
  Eigen::VectorXd energies(basis.n);
  Eigen::VectorXd v0(n_all);
  for (int i = 0; i < n_all; ++i) v0[i] = pot.v0(basis.axis.point(i));
  Fft1d fft(n_all);
  Eigen::VectorXcd spec(n_all);
  for (int mu = 0; mu < basis.n; ++mu) {
    const Eigen::VectorXcd phi = basis.states[0].col(mu);
    double e = 0.0;
    for (int i = 0; i < n_all; ++i) e += v0[i] * std::norm(phi[i]) * basis.axis.d();
    fft.forward(phi.data(), spec.data());
    for (int j = 0; j < n_all; ++j) {
      const int js = j <= n_all / 2 ? j : j - n_all;
      const double k = kTwoPi * js / basis.axis.extent();
      const double hk = basis.hbar * k;
      e += 0.5 * hk * hk / pot.mass() * std::norm(spec[j]) * basis.axis.d() / n_all;
    }
    energies[mu] = e;
  }
  return energies;
}

}  // namespace dwell
