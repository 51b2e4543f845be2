// propagator.hpp — split-step spectral evolution of phase-space fields.
//
// One step over dt (potential sampled at the midpoint time):
//   half kick (Fourier-p)  ·  full shear (Fourier-x)  ·  half kick + diffusion
//
// The kick multiplier is exact per mode:
//   classical   exp( i λ V'(x,t) dt/2 )                      (Poisson term)
//   quantum     exp( i [V(x+ħλ/2,t) − V(x−ħλ/2,t)] dt/2ħ )   (all Moyal terms)
// For the quartic well the quantum phase equals the Poisson term plus the
// single surviving third-derivative correction; derivatives of order ≥ 5
// vanish identically. Diffusion enters as exp(−D λ² dt).
//
// Because the drive couples linearly in x, the time-dependent part of the
// kick factorizes into a per-step λ-only phase; the x-dependent table is
// built once per run.
#pragma once

#include <functional>

#include "dwell/model.hpp"
#include "dwell/phasespace.hpp"

namespace dwell {

enum class KickMode { Classical, Quantum };

using FieldSink = std::function<void(const WignerField&)>;

struct EvolveDiagnostics {
  int steps = 0;
  double max_leakage = 0.0;       // boundary |W| fraction, max over checks
  double norm_drift = 0.0;        // |∫W dxdp − 1| at the end
  double max_kick_phase = 0.0;    // Nyquist kick phase over the support box
  bool nyquist_alert = false;     // closed-run spectral mass at Nyquist > 1e-3
  double max_nyquist_fraction = 0.0;
  bool aborted = false;
  std::string abort_reason;
};

struct PropagatorOptions {
  double dt = 0.0;            // absolute time step (required)
  int sample_stride = 0;      // sink cadence in steps; 0 -> ~16 per period
  double leakage_abort = 1e-4;
  bool throw_on_abort = true;
};

class PhaseSpacePropagator {
 public:
  PhaseSpacePropagator(const Potential& pot, const PhaseGrid& grid, KickMode mode,
                       const BathParams& bath, double hbar, const PropagatorOptions& opt);
  ~PhaseSpacePropagator();
  PhaseSpacePropagator(const PhaseSpacePropagator&) = delete;
  PhaseSpacePropagator& operator=(const PhaseSpacePropagator&) = delete;

  // Advances f in place until f.time == t_final_periods. The sink (optional)
  // receives the field at t0, every sample_stride steps, and at the end.
  EvolveDiagnostics evolve(WignerField& f, double t_final_periods, const FieldSink& sink = {});

  double dt() const;

 private:
  struct Impl;
  Impl* impl_;
};

}  // namespace dwell
