// phasespace.hpp — grids, fields, Gaussian states, phase-space integrals and
// the position<->phase-space Wigner transform.
//
// Conventions used throughout:
//   normalization   ∫ W dx dp = 1
//   purity          Tr ρ² = 2πħ ∫ W² dx dp
//   transform       W(x,p) = (1/πħ) ∫ dy ψ*(x+y) ψ(x−y) e^{2ipy/ħ}
// Both axes are periodic (spectral method); grids must be chosen so that
// boundary mass stays negligible.
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <utility>

#include "dwell/common.hpp"

namespace dwell {

using cplx = std::complex<double>;
using RowArrayXXd = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Uniform periodic axis: n points at min + i*d, i = 0..n-1 (max excluded).
struct Axis {
  int n = 0;
  double min = 0.0;
  double max = 0.0;

  double d() const { return (max - min) / n; }
  double point(int i) const { return min + i * d(); }
  double extent() const { return max - min; }
  Eigen::VectorXd points() const;
  bool operator==(const Axis&) const = default;
};

// Discretized phase-space rectangle. nx, np are powers of two.
struct PhaseGrid {
  Axis x;
  Axis p;

  static PhaseGrid make(int nx, int np, double x_min, double x_max, double p_min, double p_max);

  int nx() const { return x.n; }
  int np() const { return p.n; }
  double dx() const { return x.d(); }
  double dp() const { return p.d(); }
  double cell() const { return dx() * dp(); }
  // Nyquist wave numbers: largest representable oscillation rates.
  double kx_max() const { return kPi / dx(); }
  double kp_max() const { return kPi / dp(); }
  bool operator==(const PhaseGrid&) const = default;
};

// Real distribution on a PhaseGrid, indexed (ix, ip) row-major.
// `time` is in units of the reference (driving) period.
struct WignerField {
  PhaseGrid grid;
  RowArrayXXd values;  // nx rows, np cols
  double time = 0.0;
  double hbar = 0.0;

  double norm() const { return values.sum() * grid.cell(); }
  double purity() const { return kTwoPi * hbar * values.square().sum() * grid.cell(); }
};

// Complex amplitude on the position axis of a PhaseGrid.
struct WaveFunction {
  Axis axis;
  Eigen::VectorXcd amplitudes;
  double time = 0.0;

  double norm() const { return amplitudes.squaredNorm() * axis.d(); }
};

// Center/width descriptor of a Gaussian state.
struct GaussianSpec {
  double x0 = 0.0;
  double p0 = 0.0;
  double sigma_x = 1.0;
  double sigma_p = 1.0;
};

// Normalized Gaussian Wigner field centered at (x0,p0).
// With `pure` set, requires the minimum-uncertainty product sigma_x*sigma_p
// = hbar/2 (throws grid_error otherwise); the result then has purity 1.
// With `pure` unset any widths are accepted; purity is hbar/(2 sx sp),
// which exceeds 1 for sub-Heisenberg products (a classical distribution,
// usable by the Liouville solver only).
// Throws grid_error when tail mass outside the box exceeds 1e-8.
WignerField gaussian_state(const PhaseGrid& grid, double x0, double p0, double sigma_x,
                           double sigma_p, double hbar, bool pure);
WignerField gaussian_state(const PhaseGrid& grid, const GaussianSpec& s, double hbar, bool pure);

// Minimum-uncertainty Gaussian wave packet (sigma_p = hbar/(2 sigma_x)).
WaveFunction gaussian_wavepacket(const Axis& axis, double x0, double p0, double sigma_x,
                                 double hbar);

// Riemann sum  Σ weight(x_i, p_j) W_ij dx dp.
double integrate(const WignerField& f, const std::function<double(double, double)>& weight);

struct Moments {
  double mean_x, mean_p, var_x, var_p;
};
Moments moments(const WignerField& f);

// Relative L2 distance: ||a-b||_2 / ||b||_2 over the common grid.
double l2_distance(const WignerField& a, const WignerField& b);
double l2_distance(const WaveFunction& a, const WaveFunction& b);

// Wigner transform of psi onto `grid` (psi must live on grid's x axis).
// Throws grid_error when the momentum extent of the grid is too small to
// hold the transform (mass at the outermost p rows above 1e-6).
WignerField wigner_transform(const WaveFunction& psi, const PhaseGrid& grid, double hbar);

// Transform onto the natural momentum grid of the position axis:
// 2*nx momenta spaced πħ/L covering |p| < πħ/dx. Exact FFT evaluation; used
// for structure diagnostics where the standard box undersamples.
WignerField wigner_transform_natural(const WaveFunction& psi, double hbar);

// Wigner transform of the mixture rho = columns * sigma * columns† where
// `columns` holds state vectors on `axis` (Floquet reconstruction).
WignerField wigner_transform_mixture(const Eigen::MatrixXcd& columns,
                                     const Eigen::MatrixXcd& sigma, const Axis& axis,
                                     const PhaseGrid& grid, double hbar);

// Fraction of Σ|W| carried by the outermost rows/columns (width = extent/64
// on each side). The evolution runners abort above 1e-4.
double boundary_mass_fraction(const WignerField& f);
double boundary_mass_fraction(const WaveFunction& psi);

}  // namespace dwell
