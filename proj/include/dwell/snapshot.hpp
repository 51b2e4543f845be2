// snapshot.hpp — binary persistence for phase-space fields and wavefunctions.
//
// Layout (little-endian):
//   char[8]  magic "DWELLFLD"
//   u32      version (currently 1)
//   u32      mode (0 quantum, 1 classical, 2 wavefunction)
//   u32      nx, np
//   f64      x_min, x_max, p_min, p_max, hbar, time
//   payload  f64, row-major, position index outermost
//            (mode 2: nx re/im pairs)
// Round trips are bit-exact.
#pragma once

#include <string>

#include "dwell/phasespace.hpp"

namespace dwell {

enum class SnapshotMode : uint32_t { Quantum = 0, Classical = 1, Wavefunction = 2 };

struct FieldSnapshot {
  SnapshotMode mode = SnapshotMode::Quantum;
  WignerField field;  // valid for Quantum/Classical
  WaveFunction psi;   // valid for Wavefunction
  double hbar = 0.0;
  double time = 0.0;
};

void write_snapshot(const WignerField& f, SnapshotMode mode, const std::string& path);
void write_snapshot(const WaveFunction& psi, double hbar, const std::string& path);

// Throws io_error on magic/version mismatch or truncated payload; never
// returns a partial field.
FieldSnapshot read_snapshot(const std::string& path);

}  // namespace dwell
