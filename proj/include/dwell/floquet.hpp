// floquet.hpp — Floquet basis construction and the coarse-grained
// constant-coefficient master equation for long-time open dynamics.
//
// The one-period propagator U(τ) is assembled column-by-column with the
// same split-step kernel as evolve_schrodinger (identical dt and midpoint
// drive sampling), so stroboscopic resummation reproduces direct
// integration to solver precision. The coarse generator is the sub-time
// average of the projected double commutator
//     σ̇ = −(i/ħ)[E, σ] − (D/ħ²) · avg_t [x_P(t), [x_P(t), σ]] ,
// with x_P(t) the position operator projected on the truncated Floquet
// span. The commutator form keeps the generator trace-preserving and
// Hermiticity-preserving to roundoff for any truncation.
#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "dwell/model.hpp"
#include "dwell/phasespace.hpp"

namespace dwell {

// Full-grid diagonalization of the one-period propagator.
struct FloquetSpectrum {
  Axis axis;
  double hbar = 0.0;
  double tau = 0.0;
  double dt = 0.0;
  double unitarity_defect = 0.0;   // ||U†U − I||_max
  double max_eigmag_defect = 0.0;  // max | |u_μ| − 1 |
  double min_eigenphase_gap = 0.0; // conditioning report
  Eigen::VectorXd quasienergies;   // folded into (−ħω/2, ħω/2]
  Eigen::MatrixXcd states0;        // columns, Σ|φ|² dx = 1
};

FloquetSpectrum floquet_spectrum(const Potential& pot, const Axis& axis, double hbar, double dt);

// Overlap populations |<φ_μ|ψ>|², sorted descending; used to size the basis.
Eigen::VectorXd overlap_populations(const FloquetSpectrum& spec, const WaveFunction& psi);

// Truncation rule: n_min largest-overlap states plus every candidate whose
// estimated occupation after one open period exceeds 1e-4.
int select_basis_size(const FloquetSpectrum& spec, const WaveFunction& psi, int n_min, double D);

struct FloquetBasis {
  int n = 0;
  int n_sub = 0;
  double hbar = 0.0;
  double tau = 0.0;
  Axis axis;
  Eigen::VectorXd quasienergies;        // n, folded
  std::vector<Eigen::MatrixXcd> states; // n_sub matrices of n columns: φ_μ(t_k)
  Eigen::MatrixXcd x_avg;               // <<x>> period-averaged elements
  Eigen::MatrixXcd left_proj;           // x<0 projector at period start
  double max_orthonormality_defect = 0.0;

  // Expansion coefficients c_μ = <φ_μ(0)|ψ> and captured norm Σ|c|².
  Eigen::VectorXcd expand(const WaveFunction& psi) const;
  double expansion_fidelity(const WaveFunction& psi) const;
};

// Selects the n states of `spec` with the largest overlap against
// `select_state` (all callers in this project pass one) and recovers the
// periodic parts at n_sub uniform sub-times.
FloquetBasis build_floquet_basis(const FloquetSpectrum& spec, const Potential& pot, int n,
                                 int n_sub, const WaveFunction& select_state);

// Convenience: spectrum + basis in one call.
FloquetBasis build_floquet_basis(const Potential& pot, const Axis& axis, double hbar, int n,
                                 int n_sub, double dt, const WaveFunction& select_state);

// Closed stroboscopic propagation: multiply by e^{−iε_μ kτ/ħ} and resum.
// Throws grid_error when the expansion fidelity is below 0.999.
WaveFunction closed_propagate(const FloquetBasis& basis, const Eigen::VectorXcd& coefficients,
                              int k_periods);

struct CoarseGenerator {
  int n = 0;
  double D = 0.0;
  double hbar = 0.0;
  double tau = 0.0;
  Eigen::MatrixXcd m_vec;   // n² x n², row index μ*n+ν
  Eigen::MatrixXcd x2_avg;  // <<x²>> within the truncated span
  double trace_defect = 0.0;
  double hermiticity_defect = 0.0;

  cplx element(int mu, int nu, int alpha, int beta) const {
    return m_vec(mu * n + nu, alpha * n + beta);
  }
};

// Requires n_sub >= 32; throws config_error when halving the sub-time
// sampling shifts the averages by more than 1e-6 (undersampling).
CoarseGenerator build_generator(const FloquetBasis& basis, double D);

struct SigmaTrajectory {
  std::vector<double> times;              // periods
  std::vector<Eigen::MatrixXcd> sigmas;   // one per stroboscopic time
  bool saturation_flagged = false;        // H_VN within 5% of log n
  double max_h_vn = 0.0;
  double min_eigenvalue = 0.0;            // positivity monitor
};

// Closed Floquet phases up to switch_on_period, then matrix-exponential
// propagation of the vectorized σ, one application of e^{Mτ} per period.
SigmaTrajectory propagate_sigma(const CoarseGenerator& gen, const FloquetBasis& basis,
                                const Eigen::MatrixXcd& sigma0, int k_periods,
                                int switch_on_period = 0);

struct SigmaObservables {
  double mean_x = 0.0;
  double h_vn = 0.0;
  double p_left = 0.0;
  double p_right = 0.0;
};

SigmaObservables sigma_observables(const FloquetBasis& basis, const Eigen::MatrixXcd& sigma);

// Wigner reconstruction from period-start states: ρ = Φ(0) σ Φ(0)†.
WignerField sigma_to_wigner(const FloquetBasis& basis, const Eigen::MatrixXcd& sigma,
                            const PhaseGrid& grid);

// Pure-state density matrix in the truncated basis from expansion
// coefficients (renormalized within the span).
Eigen::MatrixXcd sigma_from_coefficients(const Eigen::VectorXcd& c);

// Undriven mean energy <φ|p²/2m + v0|φ> per basis state (quasienergy table).
Eigen::VectorXd mean_energies(const FloquetBasis& basis, const Potential& pot);

}  // namespace dwell
