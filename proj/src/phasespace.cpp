#include "dwell/phasespace.hpp"

#include <cmath>

#include "dwell/fft.hpp"

namespace dwell {

namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Gaussian tail mass beyond z standard deviations (one side).
double tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace

Eigen::VectorXd Axis::points() const {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = point(i);
  return v;
}

PhaseGrid PhaseGrid::make(int nx, int np, double x_min, double x_max, double p_min, double p_max) {
  if (!power_of_two(nx) || !power_of_two(np))
    throw grid_error("PhaseGrid: nx and np must be powers of two");
  if (!(x_max > x_min) || !(p_max > p_min))
    throw grid_error("PhaseGrid: empty extent");
  return PhaseGrid{Axis{nx, x_min, x_max}, Axis{np, p_min, p_max}};
}

WignerField gaussian_state(const PhaseGrid& grid, double x0, double p0, double sigma_x,
                           double sigma_p, double hbar, bool pure) {
  if (sigma_x <= 0 || sigma_p <= 0 || hbar <= 0)
    throw grid_error("gaussian_state: widths and hbar must be positive");
  const double product = sigma_x * sigma_p;
  if (pure) {
    if (product < 0.5 * hbar * (1.0 - 1e-9))
      throw grid_error("gaussian_state: sigma_x*sigma_p below hbar/2 with pure set");
    if (product > 0.5 * hbar * (1.0 + 1e-6))
      throw grid_error("gaussian_state: pure Gaussian requires the minimum-uncertainty product");
  }
  // 5-sigma ellipse must fit; enforced through the tail mass outside the box.
  const double outside = tail((grid.x.max - x0) / sigma_x) + tail((x0 - grid.x.min) / sigma_x) +
                         tail((grid.p.max - p0) / sigma_p) + tail((p0 - grid.p.min) / sigma_p);
  if (outside > 1e-8)
    throw grid_error("gaussian_state: tail mass outside the grid exceeds 1e-8");

  Eigen::ArrayXd gx(grid.nx()), gp(grid.np());
  for (int i = 0; i < grid.nx(); ++i) {
    const double u = (grid.x.point(i) - x0) / sigma_x;
    gx[i] = std::exp(-0.5 * u * u);
  }
  for (int j = 0; j < grid.np(); ++j) {
    const double v = (grid.p.point(j) - p0) / sigma_p;
    gp[j] = std::exp(-0.5 * v * v);
  }
  WignerField f;
  f.grid = grid;
  f.hbar = hbar;
  f.values = (gx.matrix() * gp.matrix().transpose()).array();
  f.values /= f.values.sum() * grid.cell();
  return f;
}

WignerField gaussian_state(const PhaseGrid& grid, const GaussianSpec& s, double hbar, bool pure) {
  return gaussian_state(grid, s.x0, s.p0, s.sigma_x, s.sigma_p, hbar, pure);
}

WaveFunction gaussian_wavepacket(const Axis& axis, double x0, double p0, double sigma_x,
                                 double hbar) {
  const double sigma_p = 0.5 * hbar / sigma_x;
  const double outside = tail((axis.max - x0) / sigma_x) + tail((x0 - axis.min) / sigma_x);
  if (outside > 1e-8) throw grid_error("gaussian_wavepacket: tail mass outside the axis");
  (void)sigma_p;
  WaveFunction psi;
  psi.axis = axis;
  psi.amplitudes.resize(axis.n);
  for (int i = 0; i < axis.n; ++i) {
    const double x = axis.point(i);
    const double u = (x - x0) / sigma_x;
    psi.amplitudes[i] = std::exp(-0.25 * u * u) * std::polar(1.0, p0 * (x - x0) / hbar);
  }
  psi.amplitudes /= std::sqrt(psi.amplitudes.squaredNorm() * axis.d());
  return psi;
}

double integrate(const WignerField& f, const std::function<double(double, double)>& weight) {
  double acc = 0.0;
  for (int i = 0; i < f.grid.nx(); ++i) {
    const double x = f.grid.x.point(i);
    for (int j = 0; j < f.grid.np(); ++j) acc += weight(x, f.grid.p.point(j)) * f.values(i, j);
  }
  return acc * f.grid.cell();
}

Moments moments(const WignerField& f) {
  double n = 0, sx = 0, sp = 0, sxx = 0, spp = 0;
  for (int i = 0; i < f.grid.nx(); ++i) {
    const double x = f.grid.x.point(i);
    double row = 0, rowp = 0, rowpp = 0;
    for (int j = 0; j < f.grid.np(); ++j) {
      const double w = f.values(i, j);
      const double p = f.grid.p.point(j);
      row += w;
      rowp += w * p;
      rowpp += w * p * p;
    }
    n += row;
    sx += row * x;
    sxx += row * x * x;
    sp += rowp;
    spp += rowpp;
  }
  const double mx = sx / n, mp = sp / n;
  return Moments{mx, mp, sxx / n - mx * mx, spp / n - mp * mp};
}

double l2_distance(const WignerField& a, const WignerField& b) {
  if (!(a.grid == b.grid)) throw config_error("l2_distance: fields on different grids");
  const double num = (a.values - b.values).square().sum();
  const double den = b.values.square().sum();
  return std::sqrt(num / den);
}

double l2_distance(const WaveFunction& a, const WaveFunction& b) {
  if (!(a.axis == b.axis)) throw config_error("l2_distance: wavefunctions on different axes");
  const double num = (a.amplitudes - b.amplitudes).squaredNorm();
  const double den = b.amplitudes.squaredNorm();
  return std::sqrt(num / den);
}

namespace {

// Band-limited 2x upsampling by zero-padding the spectrum. Values at the
// original points are preserved; the correlation function of the state is
// then critically sampled on the half-step y grid (product of two functions
// doubles the bandwidth, so y must advance by dx/2, not dx).
Eigen::VectorXcd upsample2(const Eigen::VectorXcd& a) {
  const int n = static_cast<int>(a.size());
  Fft1d fft_in(n);
  Fft1d fft_out(2 * n);
  Eigen::VectorXcd spec(n), padded = Eigen::VectorXcd::Zero(2 * n), out(2 * n);
  fft_in.forward(a.data(), spec.data());
  for (int k = 0; k < n / 2; ++k) padded[k] = spec[k];
  for (int k = n / 2 + 1; k < n; ++k) padded[n + k] = spec[k];
  padded[n / 2] = 0.5 * spec[n / 2];
  padded[2 * n - n / 2] = 0.5 * spec[n / 2];
  fft_out.backward(padded.data(), out.data());
  return out / n;
}

// C(i, j) = psi_f*(2i+j) psi_f(2i-j) on the fine (half-step) grid with zero
// extension outside the box, folded to j >= 0 with pair weights.
Eigen::MatrixXcd correlation_fine(const Eigen::VectorXcd& fine, int n) {
  const int nf = 2 * n;
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(n, n + 1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= n; ++j) {
      const int ip = 2 * i + j;
      const int im = 2 * i - j;
      if (ip >= nf || im < 0) break;  // zero extension
      const double w = (j == 0) ? 1.0 : 2.0;
      c(i, j) = w * std::conj(fine[ip]) * fine[im];
    }
  }
  return c;
}

void check_p_nyquist_mass(const WignerField& f) {
  const int np = f.grid.np();
  const int band = 2;
  double edge = 0.0;
  for (int i = 0; i < f.grid.nx(); ++i)
    for (int j = 0; j < band; ++j)
      edge += std::abs(f.values(i, j)) + std::abs(f.values(i, np - 1 - j));
  const double total = f.values.abs().sum();
  if (total > 0 && edge / total > 1e-6)
    throw grid_error("wigner_transform: momentum extent too small (mass at Nyquist rows)");
}

WignerField transform_correlation(const Eigen::MatrixXcd& c, const Axis& axis,
                                  const PhaseGrid& grid, double hbar) {
  const int n = axis.n;
  const double dy = 0.5 * axis.d();
  // Phase table E(j, l) = exp(2 i p_l y_j / hbar), y_j = j dx/2.
  Eigen::MatrixXcd e(n + 1, grid.np());
  for (int j = 0; j <= n; ++j)
    for (int l = 0; l < grid.np(); ++l)
      e(j, l) = std::polar(1.0, 2.0 * grid.p.point(l) * j * dy / hbar);
  WignerField f;
  f.grid = grid;
  f.hbar = hbar;
  f.values = (dy / (kPi * hbar)) * (c * e).real().array();
  return f;
}

}  // namespace

WignerField wigner_transform(const WaveFunction& psi, const PhaseGrid& grid, double hbar) {
  if (!(psi.axis == grid.x)) throw grid_error("wigner_transform: psi not on the grid's x axis");
  const Eigen::VectorXcd fine = upsample2(psi.amplitudes);
  const Eigen::MatrixXcd c = correlation_fine(fine, psi.axis.n);
  WignerField f = transform_correlation(c, psi.axis, grid, hbar);
  f.time = psi.time;
  check_p_nyquist_mass(f);
  return f;
}

WignerField wigner_transform_mixture(const Eigen::MatrixXcd& columns,
                                     const Eigen::MatrixXcd& sigma, const Axis& axis,
                                     const PhaseGrid& grid, double hbar) {
  if (columns.rows() != axis.n || sigma.rows() != columns.cols() ||
      sigma.cols() != columns.cols())
    throw grid_error("wigner_transform_mixture: shape mismatch");
  if (!(axis == grid.x)) throw grid_error("wigner_transform_mixture: axis mismatch");
  Eigen::MatrixXcd fine(2 * axis.n, columns.cols());
  for (int m = 0; m < columns.cols(); ++m) fine.col(m) = upsample2(columns.col(m));
  const Eigen::MatrixXcd rho = fine * sigma * fine.adjoint();

  const int n = axis.n;
  const int nf = 2 * n;
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(n, n + 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= n; ++j) {
      const int ip = 2 * i + j;
      const int im = 2 * i - j;
      if (ip >= nf || im < 0) break;
      const double w = (j == 0) ? 1.0 : 2.0;
      c(i, j) = w * rho(im, ip);  // rho(x-y, x+y)
    }
  return transform_correlation(c, axis, grid, hbar);
}

WignerField wigner_transform_natural(const WaveFunction& psi, double hbar) {
  const int n = psi.axis.n;
  const int nf = 2 * n;
  const double dx = psi.axis.d();
  const double dp = kPi * hbar / psi.axis.extent();
  const Eigen::VectorXcd fine = upsample2(psi.amplitudes);

  Fft1d fft(nf);
  Eigen::VectorXcd c(nf), spec(nf);
  WignerField f;
  f.grid = PhaseGrid{psi.axis, Axis{nf, -n * dp, n * dp}};
  f.hbar = hbar;
  f.time = psi.time;
  f.values.resize(n, nf);
  for (int i = 0; i < n; ++i) {
    c.setZero();
    for (int j = -n + 1; j < n; ++j) {
      const int ip = 2 * i + j;
      const int im = 2 * i - j;
      if (ip < 0 || ip >= nf || im < 0 || im >= nf) continue;
      c[(j + nf) % nf] = std::conj(fine[ip]) * fine[im];
    }
    // y_j = j dx/2 and p_l = l dp make exp(2 i p y / hbar) the inverse DFT
    // kernel of length 2n.
    fft.backward(c.data(), spec.data());
    for (int l = 0; l < nf; ++l) {
      const int wrapped = (l + n) % nf;  // monotone p axis
      f.values(i, l) = spec[wrapped].real() * 0.5 * dx / (kPi * hbar);
    }
  }
  return f;
}

double boundary_mass_fraction(const WignerField& f) {
  // Signed band mass: transported probability is positive-dominant and
  // registers, while band-limit aliasing ripple alternates sign and
  // cancels (that condition is watched separately by the Nyquist alert).
  const int nx = f.grid.nx(), np = f.grid.np();
  const int wx = std::max(1, nx / 64), wp = std::max(1, np / 64);
  double band = 0.0, total = 0.0;
  for (int i = 0; i < nx; ++i) {
    const bool edge_x = i < wx || i >= nx - wx;
    for (int j = 0; j < np; ++j) {
      const double v = f.values(i, j);
      total += v;
      if (edge_x || j < wp || j >= np - wp) band += v;
    }
  }
  return total != 0 ? std::abs(band / total) : 0.0;
}

double boundary_mass_fraction(const WaveFunction& psi) {
  const int n = psi.axis.n;
  const int w = std::max(1, n / 64);
  double band = 0.0, total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = std::norm(psi.amplitudes[i]);
    total += v;
    if (i < w || i >= n - w) band += v;
  }
  return total > 0 ? band / total : 0.0;
}

}  // namespace dwell
