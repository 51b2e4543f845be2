// support.hpp — independent oracles shared by the test suites. Everything
// here is deliberately naive (direct sums, finite differences) and must not
// call back into the implementation paths it checks.
#pragma once

#include <cmath>
#include <complex>
#include <random>

#include "dwell/phasespace.hpp"

namespace testsup {

// Brute-force purity: build rho(x,x') = ∫ W((x+x')/2, p) e^{ip(x-x')/hbar} dp
// on the grid (linear interpolation for half-cell midpoints) and evaluate
// Tr rho² by a double sum. O(n³); use small grids.
inline double purity_bruteforce(const dwell::WignerField& f) {
  const int nx = f.grid.nx(), np = f.grid.np();
  const double dx = f.grid.dx(), dp = f.grid.dp();
  const double hbar = f.hbar;

  // row of W at (possibly half-integer) midpoint index
  auto w_mid = [&](int i, int j, int ip) -> double {
    const int tw = i + j;  // midpoint = tw/2
    if (tw % 2 == 0) return f.values(tw / 2, ip);
    return 0.5 * (f.values(tw / 2, ip) + f.values(tw / 2 + 1, ip));
  };

  Eigen::MatrixXcd rho(nx, nx);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double v = f.grid.x.point(i) - f.grid.x.point(j);
      std::complex<double> acc(0.0, 0.0);
      for (int ip = 0; ip < np; ++ip) {
        const double p = f.grid.p.point(ip);
        acc += w_mid(i, j, ip) * std::polar(1.0, p * v / hbar);
      }
      rho(i, j) = acc * dp;
      rho(j, i) = std::conj(rho(i, j));
    }
  }
  // Tr rho² = ΣΣ rho_ij rho_ji dx²
  std::complex<double> tr(0.0, 0.0);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < nx; ++j) tr += rho(i, j) * rho(j, i);
  return tr.real() * dx * dx;
}

// Five-point finite-difference first derivative.
template <class F>
double fd_derivative(F&& f, double x, double h = 1e-5) {
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

inline std::mt19937_64 rng(uint64_t seed = 987654321u) { return std::mt19937_64(seed); }

}  // namespace testsup
