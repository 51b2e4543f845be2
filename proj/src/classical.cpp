#include "dwell/classical.hpp"

#include <atomic>
#include <cmath>
#include <random>

namespace dwell {

namespace {

struct Stage {
  double dx, dp;
  Eigen::Matrix2d dM;
};

// Joint derivative of (x, p, M): the tangent flow uses the Jacobian of the
// drive-inclusive force, which for the linear drive is time-independent in
// its x-derivative.
Stage derivative(const Potential& pot, const ClassicalState& s, const Eigen::Matrix2d& M,
                 double t) {
  Stage d;
  d.dx = s.p / pot.mass();
  d.dp = pot.force(s.x, t);
  Eigen::Matrix2d J;
  J << 0.0, 1.0 / pot.mass(), -pot.d2v(s.x), 0.0;
  d.dM = J * M;
  return d;
}

void rk4_joint(const Potential& pot, ClassicalState& s, Eigen::Matrix2d& M, double t, double dt) {
  const Stage k1 = derivative(pot, s, M, t);
  ClassicalState s2{s.x + 0.5 * dt * k1.dx, s.p + 0.5 * dt * k1.dp};
  const Stage k2 = derivative(pot, s2, M + 0.5 * dt * k1.dM, t + 0.5 * dt);
  ClassicalState s3{s.x + 0.5 * dt * k2.dx, s.p + 0.5 * dt * k2.dp};
  const Stage k3 = derivative(pot, s3, M + 0.5 * dt * k2.dM, t + 0.5 * dt);
  ClassicalState s4{s.x + dt * k3.dx, s.p + dt * k3.dp};
  const Stage k4 = derivative(pot, s4, M + dt * k3.dM, t + dt);
  s.x += dt / 6.0 * (k1.dx + 2 * k2.dx + 2 * k3.dx + k4.dx);
  s.p += dt / 6.0 * (k1.dp + 2 * k2.dp + 2 * k3.dp + k4.dp);
  M += dt / 6.0 * (k1.dM + 2 * k2.dM + 2 * k3.dM + k4.dM);
}

}  // namespace

double hamiltonian(const Potential& pot, const ClassicalState& s, double t) {
  return 0.5 * s.p * s.p / pot.mass() + pot.value(s.x, t);
}

ClassicalState step_trajectory(const Potential& pot, const ClassicalState& s0, double t,
                               double dt) {
  ClassicalState s = s0;
  Eigen::Matrix2d M = Eigen::Matrix2d::Identity();
  rk4_joint(pot, s, M, t, dt);
  if (!std::isfinite(s.x) || !std::isfinite(s.p))
    throw stability_error("step_trajectory: trajectory escaped (non-finite state)");
  return s;
}

void advance_with_tangent(const Potential& pot, ClassicalState& s, Eigen::Matrix2d& tangent,
                          double t0, double dt, int nsteps) {
  for (int k = 0; k < nsteps; ++k) rk4_joint(pot, s, tangent, t0 + k * dt, dt);
  if (!std::isfinite(s.x) || !std::isfinite(s.p) || !tangent.allFinite())
    throw stability_error("advance_with_tangent: trajectory escaped");
}

TrajectoryEnsemble TrajectoryEnsemble::sample_gaussian(const GaussianSpec& spec, int n,
                                                       uint64_t seed) {
  TrajectoryEnsemble e;
  e.states.resize(n);
  e.tangents.assign(n, Eigen::Matrix2d::Identity());
  e.weights = Eigen::VectorXd::Constant(n, 1.0 / n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    e.states[i].x = spec.x0 + spec.sigma_x * gauss(rng);
    e.states[i].p = spec.p0 + spec.sigma_p * gauss(rng);
  }
  return e;
}

double LyapunovSeries::mean(double t_lo, double t_hi) const {
  double acc = 0.0;
  int cnt = 0;
  for (int i = 0; i < times.size(); ++i)
    if (times[i] >= t_lo && times[i] <= t_hi) {
      acc += lambda[i];
      ++cnt;
    }
  if (cnt == 0) throw fit_error("LyapunovSeries::mean: empty window");
  return acc / cnt;
}

std::vector<ClassicalState> poincare_section(const Potential& pot,
                                             const std::vector<ClassicalState>& seeds,
                                             int n_periods, double dt) {
  if (seeds.empty()) throw config_error("poincare_section: no seeds");
  const double period = pot.reference_period();
  if (!(dt > 0)) dt = period / 500.0;
  if (dt > period / 200.0) throw config_error("poincare_section: dt above period/200");
  const int steps_per_period = std::max(1, static_cast<int>(std::llround(period / dt)));
  const double h = period / steps_per_period;

  std::vector<ClassicalState> cloud;
  cloud.reserve(seeds.size() * (n_periods + 1));
  for (const auto& seed : seeds) {
    ClassicalState s = seed;
    Eigen::Matrix2d M = Eigen::Matrix2d::Identity();
    cloud.push_back(s);
    for (int k = 0; k < n_periods; ++k) {
      for (int j = 0; j < steps_per_period; ++j)
        rk4_joint(pot, s, M, k * period + j * h, h);
      if (!std::isfinite(s.x) || !std::isfinite(s.p))
        throw stability_error("poincare_section: trajectory escaped");
      M = Eigen::Matrix2d::Identity();  // section needs no tangent history
      cloud.push_back(s);
    }
  }
  return cloud;
}

LyapunovSeries local_lyapunov(const Potential& pot, TrajectoryEnsemble ensemble,
                              double t_max_periods, const LyapunovOptions& opt) {
  const double period = pot.reference_period();
  const double dt0 = opt.dt > 0 ? opt.dt : period / 500.0;
  if (dt0 > period / 200.0) throw config_error("local_lyapunov: dt above period/200");
  const double renorm = opt.renorm_interval > 0 ? opt.renorm_interval : period / 20.0;
  const double window = opt.smooth_window > 0 ? opt.smooth_window : period;

  const int steps_per_renorm = std::max(1, static_cast<int>(std::llround(renorm / dt0)));
  const double h = renorm / steps_per_renorm;
  const int n_renorm = static_cast<int>(std::llround(t_max_periods * period / renorm));
  const int win = std::max(1, static_cast<int>(std::llround(window / renorm)));
  const int n_traj = static_cast<int>(ensemble.states.size());

  // Accumulated log growth of the leading tangent direction, per trajectory.
  Eigen::MatrixXd loggrowth(n_traj, n_renorm + 1);
  loggrowth.col(0).setZero();

  std::atomic<bool> failed{false};

#pragma omp parallel for schedule(static)
  for (int i = 0; i < n_traj; ++i) {
    if (failed.load(std::memory_order_relaxed)) continue;
    ClassicalState s = ensemble.states[i];
    Eigen::Matrix2d M = ensemble.tangents[i];
    double acc = 0.0;
    for (int r = 0; r < n_renorm; ++r) {
      for (int j = 0; j < steps_per_renorm; ++j)
        rk4_joint(pot, s, M, (r * steps_per_renorm + j) * h, h);
      if (!std::isfinite(s.x) || !std::isfinite(s.p)) {
        failed.store(true, std::memory_order_relaxed);
        break;
      }
      // QR renormalization: leading column norm is the growth factor.
      const double r11 = M.col(0).norm();
      if (!(r11 > 0) || !std::isfinite(r11)) {
        failed.store(true, std::memory_order_relaxed);
        break;
      }
      M.col(0) /= r11;
      M.col(1) -= M.col(0).dot(M.col(1)) * M.col(0);
      const double r22 = M.col(1).norm();
      if (!(r22 > 0) || !std::isfinite(r22)) {
        failed.store(true, std::memory_order_relaxed);
        break;
      }
      M.col(1) /= r22;
      acc += std::log(r11);
      loggrowth(i, r + 1) = acc;
    }
    ensemble.states[i] = s;
    ensemble.tangents[i] = M;
  }
  if (failed.load())
    throw stability_error("local_lyapunov: degenerate tangent or escaped trajectory");
  ensemble.time = t_max_periods;

  LyapunovSeries series;
  series.times.resize(n_renorm);
  series.lambda.resize(n_renorm);
  const double renorm_periods = renorm / period;
  for (int r = 1; r <= n_renorm; ++r) {
    const int lo = std::max(0, r - win);
    const double span = (r - lo) * renorm_periods;
    double acc = 0.0;
    for (int i = 0; i < n_traj; ++i)
      acc += ensemble.weights[i] * (loggrowth(i, r) - loggrowth(i, lo));
    series.times[r - 1] = r * renorm_periods;
    series.lambda[r - 1] = acc / span;
  }
  return series;
}

EvolveDiagnostics evolve_liouville(WignerField& f, const Potential& pot, const BathParams& bath,
                                   double t_final_periods, const PropagatorOptions& opt,
                                   const FieldSink& sink) {
  PhaseSpacePropagator prop(pot, f.grid, KickMode::Classical, bath, f.hbar, opt);
  return prop.evolve(f, t_final_periods, sink);
}

}  // namespace dwell
