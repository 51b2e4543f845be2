// model.hpp — the driven double-well Hamiltonian: potential, derivatives,
// characteristic scales, bath parameters and named presets.
//
//   H(x,p,t) = p²/2m − b x² + x⁴/(64a) + s x cos(ωt)
//
// The drive couples linearly in x, so V(x,t) = v0(x) + s·x·cos(ωt); every
// solver exploits that separation.
#pragma once

#include <memory>
#include <string>

#include "dwell/common.hpp"
#include "dwell/phasespace.hpp"

namespace dwell {

struct SystemParams {
  double m = 1.0;
  double b = 10.0;
  double a = 1.0 / 32.0;
  double s = 0.0;
  double omega = 5.35;
  double hbar = 0.1;

  double tau() const { return kTwoPi / omega; }
  void validate() const;
};

// Environment in the high-temperature, gamma -> 0 limit: momentum diffusion
// only. gamma is kept as a field so configs can state it, but any nonzero
// value is rejected.
struct BathParams {
  double D = 0.0;
  double gamma = 0.0;

  void validate() const;
};

// Time-separable potential V(x,t) = v0(x) + drive_s·x·cos(drive_omega·t).
class Potential {
 public:
  virtual ~Potential() = default;
  virtual double v0(double x) const = 0;
  virtual double dv0(double x) const = 0;
  virtual double d2v0(double x) const = 0;
  virtual double d3v0(double x) const = 0;
  virtual double mass() const = 0;
  virtual double drive_s() const { return 0.0; }
  virtual double drive_omega() const { return 0.0; }
  // Time unit used for reporting (driving period when driven).
  virtual double reference_period() const = 0;

  double value(double x, double t) const {
    return v0(x) + drive_s() * x * std::cos(drive_omega() * t);
  }
  double force(double x, double t) const {
    return -dv0(x) - drive_s() * std::cos(drive_omega() * t);
  }
  double d2v(double x) const { return d2v0(x); }
};

class DoubleWellPotential final : public Potential {
 public:
  explicit DoubleWellPotential(const SystemParams& p) : p_(p) { p_.validate(); }

  double v0(double x) const override { return -p_.b * x * x + x * x * x * x / (64.0 * p_.a); }
  double dv0(double x) const override { return -2.0 * p_.b * x + x * x * x / (16.0 * p_.a); }
  double d2v0(double x) const override { return -2.0 * p_.b + 3.0 * x * x / (16.0 * p_.a); }
  double d3v0(double x) const override { return 3.0 * x / (8.0 * p_.a); }
  double mass() const override { return p_.m; }
  double drive_s() const override { return p_.s; }
  double drive_omega() const override { return p_.omega; }
  double reference_period() const override { return p_.tau(); }
  const SystemParams& params() const { return p_; }

 private:
  SystemParams p_;
};

// Quadratic test potential used by the acceptance suite (quantum mode must
// degenerate to classical mode on it).
class HarmonicPotential final : public Potential {
 public:
  HarmonicPotential(double m, double omega0) : m_(m), w0_(omega0) {}

  double v0(double x) const override { return 0.5 * m_ * w0_ * w0_ * x * x; }
  double dv0(double x) const override { return m_ * w0_ * w0_ * x; }
  double d2v0(double) const override { return m_ * w0_ * w0_; }
  double d3v0(double) const override { return 0.0; }
  double mass() const override { return m_; }
  double reference_period() const override { return kTwoPi / w0_; }

 private:
  double m_, w0_;
};

// Free-particle potential (fringe-decay probe).
class FreePotential final : public Potential {
 public:
  explicit FreePotential(double m) : m_(m) {}
  double v0(double) const override { return 0.0; }
  double dv0(double) const override { return 0.0; }
  double d2v0(double) const override { return 0.0; }
  double d3v0(double) const override { return 0.0; }
  double mass() const override { return m_; }
  double reference_period() const override { return 1.0; }

 private:
  double m_;
};

double potential(const SystemParams& p, double x, double t);
double force(const SystemParams& p, double x, double t);
double d3V(const SystemParams& p, double x);

// χ = sqrt(V0'(x) / V0'''(x)) on the undriven potential, the scale where
// nonlinearities take over. Absolute value of the ratio is used; throws
// config_error where V0''' vanishes (x = 0).
double nonlinearity_scale(const SystemParams& p, double x);

// Named parameter set plus its initial-condition descriptors.
struct Preset {
  std::string name;
  SystemParams sys;
  BathParams bath;
  GaussianSpec island;
  GaussianSpec sea;
  // Reference nonlinearity scale for run-level classicality diagnostics.
  double chi_ref = 0.0;
  std::string notes;
};

// name in {fig1a, fig1b, tunneling, fig9}; throws config_error otherwise.
Preset preset(const std::string& name);

}  // namespace dwell
