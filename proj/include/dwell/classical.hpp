// classical.hpp — trajectory/tangent ensembles, stroboscopic sections,
// local Lyapunov exponents and the classical Liouville + diffusion solver.
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "dwell/model.hpp"
#include "dwell/phasespace.hpp"
#include "dwell/propagator.hpp"

namespace dwell {

struct ClassicalState {
  double x = 0.0;
  double p = 0.0;
};

// Kinetic + potential energy along the flow.
double hamiltonian(const Potential& pot, const ClassicalState& s, double t);

// One fixed-step RK4 step of Hamilton's equations (explicit time dependence
// sampled at the RK4 stages). Throws stability_error on non-finite output.
ClassicalState step_trajectory(const Potential& pot, const ClassicalState& s, double t, double dt);

// RK4 steps of the joint (state, tangent) system without renormalization.
void advance_with_tangent(const Potential& pot, ClassicalState& s, Eigen::Matrix2d& tangent,
                          double t0, double dt, int nsteps);

// Ensemble of trajectories with tangent matrices, carried together so the
// linearized flow sees exactly the RK4 stages of the nonlinear one.
// time is in units of the reference period.
struct TrajectoryEnsemble {
  std::vector<ClassicalState> states;
  std::vector<Eigen::Matrix2d> tangents;  // initialized to identity
  Eigen::VectorXd weights;                // >= 0, sums to 1
  double time = 0.0;

  static TrajectoryEnsemble sample_gaussian(const GaussianSpec& spec, int n, uint64_t seed);
};

struct LyapunovSeries {
  Eigen::VectorXd times;   // units of the reference period
  Eigen::VectorXd lambda;  // ensemble-averaged local exponent, units 1/period

  // Mean exponent over [t_lo, t_hi] (period units).
  double mean(double t_lo, double t_hi) const;
};

// Stroboscopic section: states sampled at t = k * period for every seed.
// Rows of the result are (x, p) pairs, all seeds and all periods pooled.
std::vector<ClassicalState> poincare_section(const Potential& pot,
                                             const std::vector<ClassicalState>& seeds,
                                             int n_periods, double dt);

struct LyapunovOptions {
  double dt = 0.0;             // default period/500
  double renorm_interval = 0;  // default period/20
  double smooth_window = 0;    // default one period
};

// Time-dependent local Lyapunov exponent: tangent maps evolve alongside the
// flow with periodic renormalization; the local exponent is the smoothed
// growth rate of the leading tangent direction, ensemble-averaged with the
// initial-distribution weights.
LyapunovSeries local_lyapunov(const Potential& pot, TrajectoryEnsemble ensemble,
                              double t_max_periods, const LyapunovOptions& opt = {});

// Classical Liouville flow plus momentum diffusion (split-step spectral).
EvolveDiagnostics evolve_liouville(WignerField& f, const Potential& pot, const BathParams& bath,
                                   double t_final_periods, const PropagatorOptions& opt,
                                   const FieldSink& sink = {});

}  // namespace dwell
