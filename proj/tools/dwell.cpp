// dwell — phase-space decoherence experiments for the driven double well.
//
// Subcommands map onto the bundled experiment pipelines:
//   evolve         open/closed phase-space or wavefunction evolution
//   poincare       stroboscopic section point cloud
//   entropy-sweep  per-D entropy-production series + Lyapunov overlay
//   tc-scan        transition-time scaling scan over D or initial entropy
//   tunneling      Floquet coarse-grained open evolution with a switch-on time
//   floquet        basis construction and quasienergy table
//
// Every run writes a manifest.json with the fully resolved configuration and
// diagnostics; outputs are deterministic for a fixed manifest.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "dwell/classical.hpp"
#include "dwell/config.hpp"
#include "dwell/floquet.hpp"
#include "dwell/observables.hpp"
#include "dwell/quantum.hpp"
#include "dwell/snapshot.hpp"

namespace fs = std::filesystem;
using namespace dwell;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string preset_name;
  std::string state_name;
  std::vector<std::string> overrides;
  std::string out_dir = "out";
  double periods = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "INI config file");
  cmd->add_option("--preset", args.preset_name, "fig1a | fig1b | tunneling | fig9");
  cmd->add_option("--state", args.state_name, "island | sea");
  cmd->add_option("--periods", args.periods, "run length in driving periods");
  cmd->add_option("--set", args.overrides, "config overrides, section.key=value");
  cmd->add_option("--out", args.out_dir, "output directory");
}

RunConfig resolve(const CommonArgs& args) {
  IniMap ini;
  if (!args.config_path.empty()) ini = load_ini(args.config_path);
  if (!args.preset_name.empty()) ini["run.preset"] = args.preset_name;
  if (!args.state_name.empty()) ini["initial.state"] = args.state_name;
  if (args.periods > 0) ini["run.periods"] = std::to_string(args.periods);
  return RunConfig::resolve(ini, args.overrides);
}

void write_manifest(const fs::path& dir, const RunConfig& cfg,
                    const std::map<std::string, std::string>& extra) {
  write_text_file((dir / "manifest.json").string(), manifest_json(cfg, extra));
}

std::map<std::string, std::string> diag_map(const EvolveDiagnostics& d) {
  std::map<std::string, std::string> m;
  m["steps"] = std::to_string(d.steps);
  m["max_leakage"] = std::to_string(d.max_leakage);
  m["max_nyquist_fraction"] = std::to_string(d.max_nyquist_fraction);
  m["nyquist_alert"] = d.nyquist_alert ? "true" : "false";
  m["norm_drift"] = std::to_string(d.norm_drift);
  m["max_kick_phase"] = std::to_string(d.max_kick_phase);
  if (d.aborted) m["abort_reason"] = d.abort_reason;
  m["status"] = d.aborted ? "aborted" : "ok";
  return m;
}

void write_lyapunov_csv(const fs::path& path, const LyapunovSeries& s) {
  std::ofstream out(path);
  out << "t,lambda\n";
  out.precision(17);
  for (int i = 0; i < s.times.size(); ++i) out << s.times[i] << ',' << s.lambda[i] << '\n';
}

int run_evolve(const CommonArgs& args, const std::string& mode, int snapshots,
               const std::string& resume_from) {
  const RunConfig cfg = resolve(args);
  const fs::path dir(args.out_dir);
  fs::create_directories(dir);
  const DoubleWellPotential pot(cfg.sys);

  PropagatorOptions opt;
  opt.dt = cfg.dt();
  opt.sample_stride = std::max(1, cfg.steps_per_period / cfg.samples_per_period);
  opt.throw_on_abort = false;

  std::map<std::string, std::string> extra;
  if (mode == "schrodinger") {
    auto psi = gaussian_wavepacket(Axis{cfg.grid.nx, cfg.grid.x_min, cfg.grid.x_max},
                                   cfg.initial.x0, cfg.initial.p0, cfg.initial.sigma_x,
                                   cfg.sys.hbar);
    SchrodingerOptions sopt;
    sopt.dt = opt.dt;
    sopt.sample_stride = opt.sample_stride;
    std::ofstream series(dir / "series.csv");
    series << "time,mean_x,norm\n";
    series.precision(17);
    const int snap_every =
        snapshots > 0 ? std::max(1, static_cast<int>(cfg.periods) / snapshots) : 0;
    try {
      evolve_schrodinger(psi, pot, cfg.sys.hbar, cfg.periods, sopt, [&](const WaveFunction& w) {
        double mean = 0.0;
        for (int i = 0; i < w.axis.n; ++i) mean += w.axis.point(i) * std::norm(w.amplitudes[i]);
        series << w.time << ',' << mean * w.axis.d() << ',' << w.norm() << '\n';
        if (snap_every > 0 && std::abs(w.time - std::round(w.time)) < 1e-9 &&
            static_cast<int>(std::round(w.time)) % snap_every == 0) {
          std::ostringstream name;
          name << "psi_" << std::setfill('0') << std::setw(5)
               << static_cast<int>(std::round(w.time)) << ".bin";
          write_snapshot(w, cfg.sys.hbar, (dir / name.str()).string());
        }
      });
      extra["status"] = "ok";
    } catch (const stability_error& e) {
      extra["status"] = "aborted";
      extra["abort_reason"] = e.what();
    }
    write_manifest(dir, cfg, extra);
    return extra["status"] == "ok" ? 0 : 3;
  }

  WignerField f;
  if (!resume_from.empty()) {
    const auto snap = read_snapshot(resume_from);
    if (snap.mode == SnapshotMode::Wavefunction)
      throw config_error("evolve --from: wavefunction snapshots resume only in schrodinger mode");
    f = snap.field;
  } else {
    f = gaussian_state(cfg.grid.make(), cfg.initial, cfg.sys.hbar, cfg.initial_entropy == 0.0);
  }
  ObservableRecorder rec(pot, cfg.bath.D);
  auto rsink = rec.sink();
  const int snap_every = snapshots > 0 ? std::max(1, static_cast<int>(cfg.periods) / snapshots) : 0;
  auto sink = [&](const WignerField& w) {
    rsink(w);
    if (snap_every > 0 && std::abs(w.time - std::round(w.time)) < 1e-9 &&
        static_cast<int>(std::round(w.time)) % snap_every == 0) {
      std::ostringstream name;
      name << "wigner_" << std::setfill('0') << std::setw(5)
           << static_cast<int>(std::round(w.time)) << ".bin";
      write_snapshot(w, mode == "classical" ? SnapshotMode::Classical : SnapshotMode::Quantum,
                     (dir / name.str()).string());
    }
  };
  const EvolveDiagnostics diag =
      evolve_wigner(f, pot, cfg.bath, cfg.periods, opt,
                    mode == "classical" ? WignerMode::Classical : WignerMode::Quantum, sink);
  rec.take().write_csv((dir / "series.csv").string());
  write_manifest(dir, cfg, diag_map(diag));
  if (diag.aborted) {
    std::cerr << "run aborted: " << diag.abort_reason << "\n";
    return 3;
  }
  return 0;
}

int run_poincare(const CommonArgs& args, int n_seeds, int n_periods) {
  const RunConfig cfg = resolve(args);
  const fs::path dir(args.out_dir);
  fs::create_directories(dir);
  const DoubleWellPotential pot(cfg.sys);

  auto ens = TrajectoryEnsemble::sample_gaussian(cfg.initial, n_seeds, cfg.seed);
  const auto cloud = poincare_section(pot, ens.states, n_periods, pot.reference_period() / 500.0);
  std::ofstream out(dir / "poincare.csv");
  out << "x,p\n";
  out.precision(17);
  for (const auto& pt : cloud) out << pt.x << ',' << pt.p << '\n';
  write_manifest(dir, cfg, {{"status", "ok"}, {"points", std::to_string(cloud.size())}});
  return 0;
}

int run_entropy_sweep(const CommonArgs& args, std::vector<double> d_list) {
  RunConfig cfg = resolve(args);
  const fs::path dir(args.out_dir);
  fs::create_directories(dir);
  const DoubleWellPotential pot(cfg.sys);
  if (d_list.empty()) d_list = {1e-4, 1e-3, 1e-2};

  const auto f0 =
      gaussian_state(cfg.grid.make(), cfg.initial, cfg.sys.hbar, cfg.initial_entropy == 0.0);
  PropagatorOptions opt;
  opt.dt = cfg.dt();
  opt.sample_stride = std::max(1, cfg.steps_per_period / cfg.samples_per_period);
  const auto family = sweep_D(f0, pot, d_list, cfg.periods, opt, cfg.workers);

  std::map<std::string, std::string> extra{{"status", "ok"}};
  for (size_t i = 0; i < family.size(); ++i) {
    std::ostringstream name;
    name << "rates_D" << d_list[i] << ".csv";
    family[i].write_csv((dir / name.str()).string());
    if (family[i].saturated) {
      std::ostringstream key;
      key << "saturated_D" << d_list[i];
      extra[key.str()] = "true";
    }
  }

  auto ensemble = TrajectoryEnsemble::sample_gaussian(cfg.initial, cfg.ensemble_size, cfg.seed);
  const auto lyap = local_lyapunov(pot, std::move(ensemble), cfg.periods, {});
  write_lyapunov_csv(dir / "lyapunov.csv", lyap);
  write_manifest(dir, cfg, extra);
  return 0;
}

int run_tc_scan(const CommonArgs& args, std::vector<double> d_list, std::vector<double> h0_list) {
  RunConfig cfg = resolve(args);
  const fs::path dir(args.out_dir);
  fs::create_directories(dir);
  const DoubleWellPotential pot(cfg.sys);

  PropagatorOptions opt;
  opt.dt = cfg.dt();
  opt.sample_stride = std::max(1, cfg.steps_per_period / cfg.samples_per_period);

  std::ostringstream report;
  report << "{\n  \"fits\": [\n";
  bool first = true;
  auto emit = [&](const std::string& kind, double value, const TransitionFit& fit) {
    if (!first) report << ",\n";
    first = false;
    report << "    {\"" << kind << "\": " << value << ", \"t_c\": " << fit.t_c
           << ", \"threshold\": " << fit.threshold << ", \"slope\": " << fit.slope
           << ", \"intercept\": " << fit.intercept << ", \"r2\": " << fit.r2
           << ", \"applicable\": " << (fit.applicable ? "true" : "false") << "}";
  };

  std::vector<double> tc_d, logd;
  if (!d_list.empty()) {
    const auto f0 =
        gaussian_state(cfg.grid.make(), cfg.initial, cfg.sys.hbar, cfg.initial_entropy == 0.0);
    const auto family = sweep_D(f0, pot, d_list, cfg.periods, opt, cfg.workers);
    // sweep-common threshold: geometric mean between the smallest initial
    // transient level and the shared plateau
    double base = 1e300, plateau = 0;
    for (const auto& s : family) {
      const auto fit = transition_time(s, ThresholdRule::PerSeriesGeometricMean);
      base = std::min(base, fit.initial_level);
      plateau = std::max(plateau, fit.plateau_level);
    }
    const double threshold = std::sqrt(std::max(base, 1e-300) * plateau);
    for (size_t i = 0; i < family.size(); ++i) {
      const auto fit = transition_time(family[i], ThresholdRule::Fixed, threshold);
      emit("D", d_list[i], fit);
      std::ostringstream name;
      name << "rates_D" << d_list[i] << ".csv";
      family[i].write_csv((dir / name.str()).string());
      if (fit.applicable) {
        tc_d.push_back(fit.t_c);
        logd.push_back(std::log10(d_list[i]));
      }
    }
  }
  for (const double h0 : h0_list) {
    RunConfig c2 = cfg;
    c2.initial_entropy = h0;
    const double g = std::exp(0.5 * h0);
    c2.initial.sigma_x *= g;
    c2.initial.sigma_p *= g;
    auto f = gaussian_state(c2.grid.make(), c2.initial, c2.sys.hbar, h0 == 0.0);
    const auto series = rate_series(f, pot, cfg.bath, cfg.periods, opt);
    const auto fit = transition_time(series, ThresholdRule::PerSeriesGeometricMean);
    emit("H0", h0, fit);
    std::ostringstream name;
    name << "rates_H" << h0 << ".csv";
    series.write_csv((dir / name.str()).string());
  }
  report << "\n  ]";
  if (tc_d.size() >= 3) {
    const auto lf = linear_fit(logd, tc_d);
    report << ",\n  \"tc_vs_log10D\": {\"slope\": " << lf.slope
           << ", \"intercept\": " << lf.intercept << ", \"r2\": " << lf.r2 << "}";
  }
  report << "\n}\n";
  write_text_file((dir / "fits.json").string(), report.str());
  write_manifest(dir, cfg, {{"status", "ok"}});
  return 0;
}

int run_tunneling(const CommonArgs& args, double d_override, int switch_on, int snapshots) {
  CommonArgs a2 = args;
  if (a2.preset_name.empty()) a2.preset_name = "tunneling";
  RunConfig cfg = resolve(a2);
  if (d_override >= 0) cfg.bath.D = d_override;
  if (switch_on >= 0) cfg.switch_on = switch_on;
  const fs::path dir(args.out_dir);
  fs::create_directories(dir);
  const DoubleWellPotential pot(cfg.sys);
  const Axis axis{cfg.grid.nx, cfg.grid.x_min, cfg.grid.x_max};

  const auto psi0 = gaussian_wavepacket(axis, cfg.initial.x0, cfg.initial.p0, cfg.initial.sigma_x,
                                        cfg.sys.hbar);
  const auto spec = floquet_spectrum(pot, axis, cfg.sys.hbar, cfg.dt());
  const int n = select_basis_size(spec, psi0, cfg.floquet_n, cfg.bath.D);
  const auto basis = build_floquet_basis(spec, pot, n, cfg.floquet_nsub, psi0);
  const auto gen = build_generator(basis, cfg.bath.D);
  const auto sigma0 = sigma_from_coefficients(basis.expand(psi0));
  const auto traj =
      propagate_sigma(gen, basis, sigma0, static_cast<int>(cfg.periods), cfg.switch_on);

  std::ofstream out(dir / "sigma.csv");
  out << "k,mean_x,h_vn,p_left,p_right\n";
  out.precision(17);
  for (size_t k = 0; k < traj.sigmas.size(); ++k) {
    const auto obs = sigma_observables(basis, traj.sigmas[k]);
    out << traj.times[k] << ',' << obs.mean_x << ',' << obs.h_vn << ',' << obs.p_left << ','
        << obs.p_right << '\n';
  }
  if (snapshots > 0) {
    const PhaseGrid grid = PhaseGrid::make(cfg.grid.nx, cfg.grid.np, cfg.grid.x_min,
                                           cfg.grid.x_max, cfg.grid.p_min, cfg.grid.p_max);
    const size_t every = std::max<size_t>(1, traj.sigmas.size() / snapshots);
    for (size_t k = 0; k < traj.sigmas.size(); k += every) {
      std::ostringstream name;
      name << "wigner_" << std::setfill('0') << std::setw(5) << static_cast<int>(traj.times[k])
           << ".bin";
      write_snapshot(sigma_to_wigner(basis, traj.sigmas[k], grid), SnapshotMode::Quantum,
                     (dir / name.str()).string());
    }
  }
  std::map<std::string, std::string> extra{
      {"status", traj.saturation_flagged ? "saturation-flagged" : "ok"},
      {"basis_size", std::to_string(n)},
      {"unitarity_defect", std::to_string(spec.unitarity_defect)},
      {"generator_trace_defect", std::to_string(gen.trace_defect)},
      {"max_h_vn", std::to_string(traj.max_h_vn)},
      {"sigma_min_eigenvalue", std::to_string(traj.min_eigenvalue)},
      {"wigner_subtime_convention", "period-start"}};
  write_manifest(dir, cfg, extra);
  if (traj.saturation_flagged)
    std::cerr << "warning: von Neumann entropy near saturation; run flagged unreliable\n";
  return 0;
}

int run_floquet(const CommonArgs& args) {
  RunConfig cfg = resolve(args);
  const fs::path dir(args.out_dir);
  fs::create_directories(dir);
  const DoubleWellPotential pot(cfg.sys);
  const Axis axis{cfg.grid.nx, cfg.grid.x_min, cfg.grid.x_max};

  const auto psi0 = gaussian_wavepacket(axis, cfg.initial.x0, cfg.initial.p0, cfg.initial.sigma_x,
                                        cfg.sys.hbar);
  const auto spec = floquet_spectrum(pot, axis, cfg.sys.hbar, cfg.dt());
  const auto basis =
      build_floquet_basis(spec, pot, std::min(cfg.floquet_n, axis.n), cfg.floquet_nsub, psi0);
  const auto energies = mean_energies(basis, pot);
  std::ofstream out(dir / "quasienergies.csv");
  out << "index,quasienergy,mean_energy\n";
  out.precision(17);
  for (int i = 0; i < basis.n; ++i)
    out << i << ',' << basis.quasienergies[i] << ',' << energies[i] << '\n';
  write_manifest(dir, cfg,
                 {{"status", "ok"},
                  {"unitarity_defect", std::to_string(spec.unitarity_defect)},
                  {"expansion_fidelity", std::to_string(basis.expansion_fidelity(psi0))}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phase-space decoherence experiments for the driven double well"};
  app.require_subcommand(1);

  CommonArgs common;
  std::string mode = "quantum";
  int snapshots = 0, n_seeds = 64, n_periods = 200, switch_on = -1;
  double d_override = -1;
  std::vector<double> d_list, h0_list;

  std::string resume_from;
  auto* evolve = app.add_subcommand("evolve", "evolve a state and record observables");
  add_common(evolve, common);
  evolve->add_option("--mode", mode, "quantum | classical | schrodinger");
  evolve->add_option("--snapshots", snapshots, "number of field snapshots to keep");
  evolve->add_option("--from", resume_from, "resume from a field snapshot");

  auto* poincare = app.add_subcommand("poincare", "stroboscopic section point cloud");
  add_common(poincare, common);
  poincare->add_option("--seeds", n_seeds, "trajectories sampled from the initial Gaussian");
  poincare->add_option("--sections", n_periods, "number of stroboscopic periods");

  auto* sweep = app.add_subcommand("entropy-sweep", "entropy production rates over D");
  add_common(sweep, common);
  sweep->add_option("--D", d_list, "diffusion constants")->delimiter(',');

  auto* tc = app.add_subcommand("tc-scan", "transition-time scaling scan");
  add_common(tc, common);
  tc->add_option("--D", d_list, "diffusion constants for the D scan")->delimiter(',');
  tc->add_option("--H0", h0_list, "initial entropies for the H(0) scan")->delimiter(',');

  auto* tun = app.add_subcommand("tunneling", "Floquet open evolution with delayed coupling");
  add_common(tun, common);
  tun->add_option("--D", d_override, "diffusion constant");
  tun->add_option("--switch-on", switch_on, "coupling switch-on period");
  tun->add_option("--snapshots", snapshots, "number of reconstructed Wigner snapshots");

  auto* flq = app.add_subcommand("floquet", "basis construction and quasienergy table");
  add_common(flq, common);

  CLI11_PARSE(app, argc, argv);

  try {
    if (evolve->parsed()) return run_evolve(common, mode, snapshots, resume_from);
    if (poincare->parsed()) return run_poincare(common, n_seeds, n_periods);
    if (sweep->parsed()) return run_entropy_sweep(common, d_list);
    if (tc->parsed()) return run_tc_scan(common, d_list, h0_list);
    if (tun->parsed()) return run_tunneling(common, d_override, switch_on, snapshots);
    if (flq->parsed()) return run_floquet(common);
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const grid_error& e) {
    std::cerr << "grid error: " << e.what() << "\n";
    return 2;
  } catch (const stability_error& e) {
    std::cerr << "run aborted: " << e.what() << "\n";
    return 3;
  } catch (const io_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
