#include "dwell/model.hpp"

#include <cmath>

namespace dwell {

void SystemParams::validate() const {
  if (!(m > 0) || !(a > 0) || !(b > 0) || !(omega > 0) || !(hbar > 0))
    throw config_error("SystemParams: m, a, b, omega, hbar must be positive");
}

void BathParams::validate() const {
  if (D < 0) throw config_error("BathParams: D must be nonnegative");
  if (gamma != 0.0)
    throw config_error("BathParams: only the gamma -> 0, D fixed limit is supported");
}

double potential(const SystemParams& p, double x, double t) {
  return -p.b * x * x + x * x * x * x / (64.0 * p.a) + p.s * x * std::cos(p.omega * t);
}

double force(const SystemParams& p, double x, double t) {
  return 2.0 * p.b * x - x * x * x / (16.0 * p.a) - p.s * std::cos(p.omega * t);
}

double d3V(const SystemParams& p, double x) { return 3.0 * x / (8.0 * p.a); }

double nonlinearity_scale(const SystemParams& p, double x) {
  const double third = d3V(p, x);
  if (third == 0.0)
    throw config_error("nonlinearity_scale: singular at x = 0 (third derivative vanishes)");
  const double first = -2.0 * p.b * x + x * x * x / (16.0 * p.a);
  return std::sqrt(std::abs(first / third));
}

Preset preset(const std::string& name) {
  Preset pr;
  pr.name = name;
  if (name == "fig1a") {
    pr.sys = SystemParams{1.0, 10.0, 1.0 / 32.0, 1.0, 5.35, 0.1};
    pr.island = GaussianSpec{-3.7, 0.0, 0.05, 1.0};
    pr.sea = GaussianSpec{1.0, 0.0, std::sqrt(0.05), std::sqrt(0.05)};
    pr.bath = BathParams{0.0, 0.0};
    pr.chi_ref = 4.0;
  } else if (name == "fig1b") {
    pr.sys = SystemParams{1.0, 10.0, 1.0 / 32.0, 10.0, 6.07, 0.1};
    pr.island = GaussianSpec{-3.7, 0.0, 0.05, 1.0};
    pr.sea = GaussianSpec{1.0, 0.0, std::sqrt(0.05), std::sqrt(0.05)};
    pr.bath = BathParams{0.0, 0.0};
    pr.chi_ref = 4.0;
  } else if (name == "tunneling") {
    pr.sys = SystemParams{1.0, 10.0, 1.0 / 32.0, 4.0, 5.35, 1.0};
    pr.island = GaussianSpec{-3.52, 0.0, 0.25, 2.0};
    pr.sea = GaussianSpec{1.0, 0.0, std::sqrt(0.5), std::sqrt(0.5)};
    pr.bath = BathParams{0.0, 0.0};
    pr.chi_ref = 4.0;
  } else if (name == "fig9") {
    // Published with letters B=10, C=0.5, E=10: mapped as b = B, quartic
    // coefficient C = 1/(64a) (so a = 1/32), s = E. This keeps the wells at
    // x = ±sqrt(32ab) = ±sqrt(10), consistent with the other presets.
    pr.sys = SystemParams{1.0, 10.0, 1.0 / 32.0, 10.0, 6.16, 0.1};
    pr.island = GaussianSpec{-3.7, 0.0, 0.05, 1.0};
    pr.sea = GaussianSpec{1.0, 0.0, std::sqrt(0.05), std::sqrt(0.05)};
    pr.bath = BathParams{1e-3, 0.0};
    pr.chi_ref = 4.0;
    pr.notes = "letter mapping: B->b, C->1/(64a), E->s";
  } else {
    throw config_error("preset: unknown preset '" + name + "'");
  }
  return pr;
}

}  // namespace dwell
