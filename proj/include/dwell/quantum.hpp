// quantum.hpp — closed and open quantum propagation.
//
// evolve_schrodinger: Strang-split spectral solver on the position axis,
// potential sampled at step midpoints; norm conserved to roundoff per step.
//
// evolve_wigner: phase-space solver with the exact nonlocal kick
// [V(x+ħλ/2,t) − V(x−ħλ/2,t)]/ħ applied in Fourier-p; for the quartic well
// this realizes the Poisson bracket plus the single surviving quantum
// correction exactly. Classical mode delegates to evolve_liouville.
#pragma once

#include <functional>

#include "dwell/classical.hpp"
#include "dwell/model.hpp"
#include "dwell/phasespace.hpp"
#include "dwell/propagator.hpp"

namespace dwell {

using WaveSink = std::function<void(const WaveFunction&)>;

struct SchrodingerOptions {
  double dt = 0.0;        // required; must be <= period/500
  int sample_stride = 0;  // sink cadence; 0 -> ~16 per period
  double leakage_abort = 1e-4;
};

EvolveDiagnostics evolve_schrodinger(WaveFunction& psi, const Potential& pot, double hbar,
                                     double t_final_periods, const SchrodingerOptions& opt,
                                     const WaveSink& sink = {});

enum class WignerMode { Quantum, Classical };

EvolveDiagnostics evolve_wigner(WignerField& f, const Potential& pot, const BathParams& bath,
                                double t_final_periods, const PropagatorOptions& opt,
                                WignerMode mode, const FieldSink& sink = {});

struct FringeDecayFit {
  double gamma = 0.0;  // fitted exponential decay rate of fringe contrast
  double r2 = 0.0;
  double k_p = 0.0;  // fringe wave number Δx/ħ
};

// Measures the decoherence rate of the central interference fringes of a
// two-Gaussian superposition separated by delta_x under free evolution with
// momentum diffusion. Throws fit_error when the contrast series is too
// short or degenerate.
FringeDecayFit fringe_decay_probe(double delta_x, const BathParams& bath, double hbar,
                                  double t_max = 0.0, double sigma_x = 0.0);

struct StructureScale {
  double delta_x = 0.0;
  double delta_p = 0.0;
  double area = 0.0;
};

// Dominant oscillation scales from the upper-quantile wave numbers of the
// field's 2-D power spectrum: delta = π / k_q. Degenerates to the grid
// extents for smooth fields.
StructureScale structure_scale(const WignerField& f, double quantile = 0.99);

}  // namespace dwell
