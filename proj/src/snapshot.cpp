#include "dwell/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace dwell {

namespace {

constexpr char kMagic[8] = {'D', 'W', 'E', 'L', 'L', 'F', 'L', 'D'};
constexpr uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "snapshot format is little-endian; big-endian hosts unsupported");

struct Header {
  char magic[8];
  uint32_t version;
  uint32_t mode;
  uint32_t nx;
  uint32_t np;
  double x_min, x_max, p_min, p_max;
  double hbar;
  double time;
};

void write_header(std::ofstream& out, const Header& h) {
  out.write(h.magic, 8);
  auto put32 = [&](uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
  auto put64 = [&](double v) { out.write(reinterpret_cast<const char*>(&v), 8); };
  put32(h.version);
  put32(h.mode);
  put32(h.nx);
  put32(h.np);
  put64(h.x_min);
  put64(h.x_max);
  put64(h.p_min);
  put64(h.p_max);
  put64(h.hbar);
  put64(h.time);
}

Header read_header(std::ifstream& in) {
  Header h{};
  in.read(h.magic, 8);
  auto get32 = [&](uint32_t& v) { in.read(reinterpret_cast<char*>(&v), 4); };
  auto get64 = [&](double& v) { in.read(reinterpret_cast<char*>(&v), 8); };
  get32(h.version);
  get32(h.mode);
  get32(h.nx);
  get32(h.np);
  get64(h.x_min);
  get64(h.x_max);
  get64(h.p_min);
  get64(h.p_max);
  get64(h.hbar);
  get64(h.time);
  if (!in) throw io_error("snapshot: truncated header");
  if (std::memcmp(h.magic, kMagic, 8) != 0) throw io_error("snapshot: bad magic");
  if (h.version != kVersion)
    throw io_error("snapshot: unsupported version " + std::to_string(h.version));
  if (h.mode > 2) throw io_error("snapshot: unknown mode tag");
  return h;
}

}  // namespace

void write_snapshot(const WignerField& f, SnapshotMode mode, const std::string& path) {
  if (mode == SnapshotMode::Wavefunction)
    throw io_error("write_snapshot: field given with wavefunction mode");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("snapshot: cannot open '" + path + "' for writing");
  Header h{};
  std::memcpy(h.magic, kMagic, 8);
  h.version = kVersion;
  h.mode = static_cast<uint32_t>(mode);
  h.nx = static_cast<uint32_t>(f.grid.nx());
  h.np = static_cast<uint32_t>(f.grid.np());
  h.x_min = f.grid.x.min;
  h.x_max = f.grid.x.max;
  h.p_min = f.grid.p.min;
  h.p_max = f.grid.p.max;
  h.hbar = f.hbar;
  h.time = f.time;
  write_header(out, h);
  out.write(reinterpret_cast<const char*>(f.values.data()),
            static_cast<std::streamsize>(sizeof(double)) * f.grid.nx() * f.grid.np());
  if (!out) throw io_error("snapshot: write failed for '" + path + "'");
}

void write_snapshot(const WaveFunction& psi, double hbar, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("snapshot: cannot open '" + path + "' for writing");
  Header h{};
  std::memcpy(h.magic, kMagic, 8);
  h.version = kVersion;
  h.mode = static_cast<uint32_t>(SnapshotMode::Wavefunction);
  h.nx = static_cast<uint32_t>(psi.axis.n);
  h.np = 0;
  h.x_min = psi.axis.min;
  h.x_max = psi.axis.max;
  h.p_min = 0;
  h.p_max = 0;
  h.hbar = hbar;
  h.time = psi.time;
  write_header(out, h);
  out.write(reinterpret_cast<const char*>(psi.amplitudes.data()),
            static_cast<std::streamsize>(sizeof(cplx)) * psi.axis.n);
  if (!out) throw io_error("snapshot: write failed for '" + path + "'");
}

FieldSnapshot read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("snapshot: cannot open '" + path + "'");
  const Header h = read_header(in);

  FieldSnapshot snap;
  snap.mode = static_cast<SnapshotMode>(h.mode);
  snap.hbar = h.hbar;
  snap.time = h.time;
  if (snap.mode == SnapshotMode::Wavefunction) {
    snap.psi.axis = Axis{static_cast<int>(h.nx), h.x_min, h.x_max};
    snap.psi.time = h.time;
    snap.psi.amplitudes.resize(h.nx);
    in.read(reinterpret_cast<char*>(snap.psi.amplitudes.data()),
            static_cast<std::streamsize>(sizeof(cplx)) * h.nx);
  } else {
    snap.field.grid = PhaseGrid{Axis{static_cast<int>(h.nx), h.x_min, h.x_max},
                                Axis{static_cast<int>(h.np), h.p_min, h.p_max}};
    snap.field.hbar = h.hbar;
    snap.field.time = h.time;
    snap.field.values.resize(h.nx, h.np);
    in.read(reinterpret_cast<char*>(snap.field.values.data()),
            static_cast<std::streamsize>(sizeof(double)) * h.nx * h.np);
  }
  if (!in) throw io_error("snapshot: truncated payload in '" + path + "'");
  return snap;
}

}  // namespace dwell
