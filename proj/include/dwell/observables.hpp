// observables.hpp — entropy and purity, entropy-production rate, moments,
// correspondence diagnostics, transition-time detection and scaling fits.
//
// Rates are reported per reference period (times are in periods); the
// phase-space integrals behind them are evaluated spectrally.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dwell/model.hpp"
#include "dwell/phasespace.hpp"
#include "dwell/propagator.hpp"

namespace dwell {

// purity = 2πħ ∫W² dxdp,  H_lin = −log purity.
std::pair<double, double> linear_entropy(const WignerField& f);

// Instantaneous rate of linear entropy production
//   dH/dt = 2D <(∂_p W)²> / <W²>
// in absolute time units (multiply by the period for per-period rates).
double entropy_rate_eq8(const WignerField& f, double D);

struct ObsRecord {
  double time = 0.0;  // periods
  double mean_x = 0.0, mean_p = 0.0, var_x = 0.0, var_p = 0.0;
  double energy = 0.0;  // undriven <p²/2m + v0(x)>
  double purity = 0.0;
  double h_lin = 0.0;
  double dhdt_measured = 0.0;  // centered difference of h_lin, per period
  double dhdt_eq8 = 0.0;       // Eq.-(8)-style exact rate, per period
  double neg_frac = 0.0;       // (∫|W| − ∫W) / (2∫|W|)
};

struct ObservableSeries {
  std::vector<ObsRecord> records;
  bool saturated = false;     // H_lin approached its grid ceiling
  double h_ceiling = 0.0;
  double label_D = 0.0;       // diffusion constant of the run (bookkeeping)

  void write_csv(const std::string& path) const;
  // Period-bucket averages of the Eq.-(8) rate: one (t_k, rate_k) per period.
  std::pair<Eigen::VectorXd, Eigen::VectorXd> period_averaged_rate() const;
  std::vector<double> times() const;
  std::vector<double> mean_x() const;
};

// Largest representable linear entropy on the grid (uniform distribution).
double h_ceiling(const PhaseGrid& grid, double hbar);

// FieldSink that accumulates an ObservableSeries along an evolution.
class ObservableRecorder {
 public:
  ObservableRecorder(const Potential& pot, double D);
  ~ObservableRecorder();
  ObservableRecorder(const ObservableRecorder&) = delete;
  ObservableRecorder& operator=(const ObservableRecorder&) = delete;

  FieldSink sink();
  // Fills dhdt_measured (centered differences) and the saturation flag.
  ObservableSeries take();

 private:
  struct Impl;
  Impl* impl_;
};

// Drives an open quantum (or classical) run and returns the recorded series.
ObservableSeries rate_series(WignerField f, const Potential& pot, const BathParams& bath,
                             double t_final_periods, const PropagatorOptions& opt,
                             bool classical_mode = false);

// Family of rate series over a list of diffusion constants. Members run
// concurrently on `workers` threads; results are ordered like d_list.
std::vector<ObservableSeries> sweep_D(const WignerField& f0, const Potential& pot,
                                      const std::vector<double>& d_list, double t_final_periods,
                                      const PropagatorOptions& opt, int workers = 2);

enum class ThresholdRule {
  PerSeriesGeometricMean,  // sqrt(initial transient level x plateau level)
  Fixed,                   // caller-supplied level (sweep-common)
};

struct TransitionFit {
  double t_c = 0.0;       // periods
  double threshold = 0.0;  // rate level used, per period
  double r2 = 0.0;         // of the log-linear transient fit
  double slope = 0.0;      // transient growth rate of log(rate), 1/period
  double intercept = 0.0;
  double initial_level = 0.0;
  double plateau_level = 0.0;
  bool applicable = false;  // two-regime structure present
};

// Transition time between the diffusion-dominated transient and the
// dynamics-dominated plateau: first period-averaged crossing of the
// threshold, refined by a log-linear fit of the transient.
TransitionFit transition_time(const ObservableSeries& series, ThresholdRule rule,
                              std::optional<double> fixed_threshold = std::nullopt);

struct LinearFit {
  double slope = 0.0, intercept = 0.0, r2 = 0.0;
};
LinearFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys);

// First time |<x>_q − <x>_cl| exceeds 3x the baseline gap, sustained for
// half a period. Series must share their sample times. Returns nullopt when
// no breakdown occurs.
std::optional<double> correspondence_gap(const ObservableSeries& quantum,
                                         const ObservableSeries& classical, double baseline_gap);

// Largest |<x>_q − <x>_cl| over the common length (baseline estimation).
double max_gap(const ObservableSeries& quantum, const ObservableSeries& classical);

// Closed-form estimates. lambda is in absolute 1/time units.
double critical_width(double D, double lambda);
double d_min(double L, double hbar);
double t_hbar_estimate(double lambda, double chi, double sigma_q0, double hbar);

}  // namespace dwell
