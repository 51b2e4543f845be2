#include "dwell/observables.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <thread>

#include "dwell/fft.hpp"
#include "dwell/quantum.hpp"

namespace dwell {

std::pair<double, double> linear_entropy(const WignerField& f) {
  const double purity = f.purity();
  if (!(purity > 0)) throw fit_error("linear_entropy: nonpositive purity");
  return {purity, -std::log(purity)};
}

namespace {

// <λ²> over the p-spectrum; the Parseval weights cancel in the ratio.
double mean_lambda_sq(const WignerField& f, RowFft& fft,
                      Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>& spec) {
  fft.forward(f.values.data(), spec.data());
  const double dlam = kTwoPi / f.grid.p.extent();
  double s0 = 0.0, s2 = 0.0;
  const int nlam = static_cast<int>(spec.cols());
  for (int i = 0; i < spec.rows(); ++i)
    for (int j = 0; j < nlam; ++j) {
      const double wgt = (j == 0 || j == nlam - 1) ? 1.0 : 2.0;
      const double v = wgt * std::norm(spec(i, j));
      const double lam = j * dlam;
      s0 += v;
      s2 += v * lam * lam;
    }
  if (s0 <= 0) throw fit_error("entropy_rate_eq8: empty field");
  return s2 / s0;
}

}  // namespace

double entropy_rate_eq8(const WignerField& f, double D) {
  if (D == 0.0) return 0.0;
  RowFft fft(f.grid.nx(), f.grid.np());
  Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> spec(f.grid.nx(),
                                                                            f.grid.np() / 2 + 1);
  return 2.0 * D * mean_lambda_sq(f, fft, spec);
}

double h_ceiling(const PhaseGrid& grid, double hbar) {
  return std::log(grid.x.extent() * grid.p.extent() / (kTwoPi * hbar));
}

void ObservableSeries::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw io_error("ObservableSeries: cannot open '" + path + "'");
  out << "time,mean_x,mean_p,var_x,var_p,energy,purity,h_lin,dhdt_measured,dhdt_eq8,neg_frac\n";
  out.precision(17);
  for (const auto& r : records) {
    out << r.time << ',' << r.mean_x << ',' << r.mean_p << ',' << r.var_x << ',' << r.var_p << ','
        << r.energy << ',' << r.purity << ',' << r.h_lin << ',' << r.dhdt_measured << ','
        << r.dhdt_eq8 << ',' << r.neg_frac << '\n';
  }
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> ObservableSeries::period_averaged_rate() const {
  if (records.empty()) throw fit_error("period_averaged_rate: empty series");
  const double t_end = records.back().time;
  const int nper = static_cast<int>(std::floor(t_end + 1e-9));
  if (nper < 1) throw fit_error("period_averaged_rate: series shorter than one period");
  Eigen::VectorXd times(nper), rates(nper);
  for (int k = 0; k < nper; ++k) {
    double acc = 0.0;
    int cnt = 0;
    for (const auto& r : records)
      if (r.time > k && r.time <= k + 1 + 1e-9) {
        acc += r.dhdt_eq8;
        ++cnt;
      }
    times[k] = k + 0.5;
    rates[k] = cnt > 0 ? acc / cnt : 0.0;
  }
  return {times, rates};
}

std::vector<double> ObservableSeries::times() const {
  std::vector<double> v;
  v.reserve(records.size());
  for (const auto& r : records) v.push_back(r.time);
  return v;
}

std::vector<double> ObservableSeries::mean_x() const {
  std::vector<double> v;
  v.reserve(records.size());
  for (const auto& r : records) v.push_back(r.mean_x);
  return v;
}

struct ObservableRecorder::Impl {
  const Potential& pot;
  double D;
  ObservableSeries series;
  std::unique_ptr<RowFft> fft;
  Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> spec;

  Impl(const Potential& p, double d) : pot(p), D(d) {}

  void sample(const WignerField& f) {
    if (!fft) {
      fft = std::make_unique<RowFft>(f.grid.nx(), f.grid.np());
      spec.resize(f.grid.nx(), f.grid.np() / 2 + 1);
      series.h_ceiling = h_ceiling(f.grid, f.hbar);
      series.label_D = D;
    }
    ObsRecord r;
    r.time = f.time;
    const Moments m = moments(f);
    r.mean_x = m.mean_x;
    r.mean_p = m.mean_p;
    r.var_x = m.var_x;
    r.var_p = m.var_p;
    double e = 0.0, pos = 0.0, absmass = 0.0;
    for (int i = 0; i < f.grid.nx(); ++i) {
      const double x = f.grid.x.point(i);
      const double v0 = pot.v0(x);
      for (int j = 0; j < f.grid.np(); ++j) {
        const double w = f.values(i, j);
        const double p = f.grid.p.point(j);
        e += w * (0.5 * p * p / pot.mass() + v0);
        pos += w;
        absmass += std::abs(w);
      }
    }
    const double cell = f.grid.cell();
    r.energy = e * cell;
    r.neg_frac = absmass > 0 ? (absmass - pos) / (2.0 * absmass) : 0.0;
    auto [purity, h] = linear_entropy(f);
    r.purity = purity;
    r.h_lin = h;
    const double period = pot.reference_period();
    r.dhdt_eq8 = D > 0 ? 2.0 * D * mean_lambda_sq(f, *fft, spec) * period : 0.0;
    series.records.push_back(r);
  }
};

ObservableRecorder::ObservableRecorder(const Potential& pot, double D)
    : impl_(new Impl(pot, D)) {}

ObservableRecorder::~ObservableRecorder() { delete impl_; }

FieldSink ObservableRecorder::sink() {
  return [this](const WignerField& f) { impl_->sample(f); };
}

ObservableSeries ObservableRecorder::take() {
  ObservableSeries s = std::move(impl_->series);
  const int n = static_cast<int>(s.records.size());
  for (int i = 1; i + 1 < n; ++i) {
    const double dt = s.records[i + 1].time - s.records[i - 1].time;
    if (dt > 0)
      s.records[i].dhdt_measured = (s.records[i + 1].h_lin - s.records[i - 1].h_lin) / dt;
  }
  if (n >= 2) {
    s.records[0].dhdt_measured = s.records[1].dhdt_measured;
    s.records[n - 1].dhdt_measured = s.records[n - 2].dhdt_measured;
  }
  double hmax = 0.0;
  for (const auto& r : s.records) hmax = std::max(hmax, r.h_lin);
  s.saturated = s.h_ceiling > 0 && hmax > 0.8 * s.h_ceiling;
  return s;
}

ObservableSeries rate_series(WignerField f, const Potential& pot, const BathParams& bath,
                             double t_final_periods, const PropagatorOptions& opt,
                             bool classical_mode) {
  ObservableRecorder rec(pot, bath.D);
  evolve_wigner(f, pot, bath, t_final_periods, opt,
                classical_mode ? WignerMode::Classical : WignerMode::Quantum, rec.sink());
  return rec.take();
}

std::vector<ObservableSeries> sweep_D(const WignerField& f0, const Potential& pot,
                                      const std::vector<double>& d_list, double t_final_periods,
                                      const PropagatorOptions& opt, int workers) {
  std::vector<ObservableSeries> out(d_list.size());
  std::vector<std::exception_ptr> errors(d_list.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= d_list.size()) return;
      try {
        BathParams bath{d_list[i], 0.0};
        out[i] = rate_series(f0, pot, bath, t_final_periods, opt, false);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const int nw = std::max(1, workers);
  for (int i = 0; i < nw; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

TransitionFit transition_time(const ObservableSeries& series, ThresholdRule rule,
                              std::optional<double> fixed_threshold) {
  const int n = static_cast<int>(series.records.size());
  if (n < 16) throw fit_error("transition_time: series too short");
  const double dt = series.records[1].time - series.records[0].time;
  const int spp = std::max(1, static_cast<int>(std::llround(1.0 / dt)));  // samples per period

  auto median_of = [](std::vector<double> v) {
    if (v.empty()) throw fit_error("transition_time: empty window");
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };

  TransitionFit fit;
  // initial transient level: first quarter period of samples
  {
    std::vector<double> head;
    for (int i = 0; i < std::max(3, spp / 4) && i < n; ++i)
      head.push_back(series.records[i].dhdt_eq8);
    fit.initial_level = median_of(head);
  }
  // plateau: median over the last third
  {
    std::vector<double> tail;
    for (int i = 2 * n / 3; i < n; ++i) tail.push_back(series.records[i].dhdt_eq8);
    fit.plateau_level = median_of(tail);
  }

  if (rule == ThresholdRule::Fixed) {
    if (!fixed_threshold) throw config_error("transition_time: Fixed rule needs a threshold");
    fit.threshold = *fixed_threshold;
  } else {
    fit.threshold = std::sqrt(std::max(fit.initial_level, 0.0) * std::max(fit.plateau_level, 0.0));
  }

  const double jump = fit.initial_level > 0
                          ? fit.plateau_level / fit.initial_level
                          : std::numeric_limits<double>::infinity();
  if (!(jump >= 4.0) || !(fit.threshold > fit.initial_level)) return fit;  // not applicable

  // first sustained crossing: rate reaches the threshold and stays above a
  // third of it for the following period (driving-frequency dips allowed)
  int ic = -1;
  for (int i = 1; i < n; ++i) {
    if (series.records[i].dhdt_eq8 < fit.threshold) continue;
    bool sustained = true;
    for (int j = i; j < std::min(n, i + spp); ++j)
      if (series.records[j].dhdt_eq8 < fit.threshold / 3.0) {
        sustained = false;
        break;
      }
    if (sustained) {
      ic = i;
      break;
    }
  }
  if (ic < 0) return fit;
  fit.applicable = true;

  // refine by log interpolation across the crossing pair
  const double r0 = std::max(series.records[ic - 1].dhdt_eq8, 1e-300);
  const double r1 = std::max(series.records[ic].dhdt_eq8, 1e-300);
  double frac = r1 > r0 ? (std::log(fit.threshold) - std::log(r0)) / (std::log(r1) - std::log(r0))
                        : 1.0;
  frac = std::clamp(frac, 0.0, 1.0);
  fit.t_c = series.records[ic - 1].time + frac * dt;

  // transient growth diagnostics: log-linear fit from 2x the initial level
  // up to the crossing
  std::vector<double> xs, ys;
  for (int i = 0; i <= ic; ++i) {
    const double r = series.records[i].dhdt_eq8;
    if (r >= 2.0 * fit.initial_level && r > 0) {
      xs.push_back(series.records[i].time);
      ys.push_back(std::log(r));
    }
  }
  if (xs.size() >= 3) {
    const LinearFit lf = linear_fit(xs, ys);
    fit.slope = lf.slope;
    fit.intercept = lf.intercept;
    fit.r2 = lf.r2;
  }
  return fit;
}

LinearFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  const int n = static_cast<int>(xs.size());
  if (n < 2 || ys.size() != xs.size()) throw fit_error("linear_fit: need >= 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
    syy += ys[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0) throw fit_error("linear_fit: degenerate abscissa");
  LinearFit f;
  f.slope = (n * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / n;
  const double ss_tot = syy - sy * sy / n;
  const double ss_res = ss_tot - f.slope * (sxy - sx * sy / n);
  f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

std::optional<double> correspondence_gap(const ObservableSeries& quantum,
                                         const ObservableSeries& classical,
                                         double baseline_gap) {
  const size_t n = std::min(quantum.records.size(), classical.records.size());
  if (n < 2) throw fit_error("correspondence_gap: empty series");
  const double threshold = 3.0 * baseline_gap;
  // sustain window: half a period of samples
  const double dt = quantum.records[1].time - quantum.records[0].time;
  const int sustain = std::max(1, static_cast<int>(std::llround(0.5 / dt)));
  int run = 0;
  for (size_t i = 0; i < n; ++i) {
    const double gap = std::abs(quantum.records[i].mean_x - classical.records[i].mean_x);
    if (gap > threshold) {
      if (++run >= sustain)
        return quantum.records[i - static_cast<size_t>(run) + 1].time;
    } else {
      run = 0;
    }
  }
  return std::nullopt;
}

double max_gap(const ObservableSeries& quantum, const ObservableSeries& classical) {
  const size_t n = std::min(quantum.records.size(), classical.records.size());
  double g = 0.0;
  for (size_t i = 0; i < n; ++i)
    g = std::max(g, std::abs(quantum.records[i].mean_x - classical.records[i].mean_x));
  return g;
}

double critical_width(double D, double lambda) {
  if (!(lambda > 0)) throw config_error("critical_width: lambda must be positive");
  return std::sqrt(2.0 * D / lambda);
}

double d_min(double L, double hbar) {
  if (!(L > 0)) throw config_error("d_min: L must be positive");
  return hbar * hbar / (L * L);
}

double t_hbar_estimate(double lambda, double chi, double sigma_q0, double hbar) {
  if (!(lambda > 0)) throw config_error("t_hbar_estimate: lambda must be positive");
  return std::log(chi * sigma_q0 / hbar) / lambda;
}

}  // namespace dwell
