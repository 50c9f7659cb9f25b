#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <vector>

#include "pursuit/model.hpp"

namespace pursuit::dde {

struct EngineOptions {
  // Drivers of one step interval are independent given the committed
  // history; they may be split across this many threads. Results do not
  // depend on the value.
  unsigned workers = 1;
};

// Sampled driver positions X_i(n dt) for n in [-history_steps, committed].
//
// Periodic truncation stores drivers 0..N-1 and answers for every index via
// X_{i+N} = X_i + P. Cone truncation stores the dependency cone of the
// requested range; drivers past the range carry shorter horizons.
class TrajectorySet {
 public:
  const model::Scenario& scenario() const { return *scenario_; }

  double dt() const { return dt_; }
  long history_steps() const { return history_steps_; }
  std::size_t steps_per_interval() const { return steps_per_interval_; }
  bool periodic() const { return periodic_; }

  // Requested drivers: 0..N-1 (periodic) or [first, last] (cone).
  long first_driver() const { return first_; }
  long last_driver() const { return last_; }

  // Last committed step and time of the requested drivers.
  long committed_steps() const { return target_steps_; }
  double committed_until() const { return static_cast<double>(target_steps_) * dt_; }

  // Stored driver range, [first_driver, last_driver] or wider in cone mode.
  long stored_first() const { return first_; }
  long stored_last() const { return first_ + static_cast<long>(tracks_.size()) - 1; }

  bool has_driver(long i) const;
  long committed_steps(long i) const;

  // Exact stored sample of driver i at step n (periodic closure applied).
  double sample(long i, long n) const;

 private:
  friend TrajectorySet integrate(const model::Scenario&, EngineOptions);
  friend void extend(TrajectorySet&, double, EngineOptions);

  struct Track {
    std::vector<double> x;  // x[n + history_steps]
    long committed = 0;
    long target = 0;
    long delay_steps = 0;  // integer part of tau_i / dt
    double delay_frac = 0.0;
  };

  double velocity_at(std::size_t k, long n) const;
  void advance(std::size_t k, long to);
  void run_rounds(unsigned workers);
  void add_track(long i);
  void set_targets(long n_target);
  std::pair<std::size_t, double> locate(long i) const;

  std::shared_ptr<const model::Scenario> scenario_;
  double dt_ = 0.0;
  long history_steps_ = 0;
  std::size_t steps_per_interval_ = 1;
  bool periodic_ = true;
  double period_shift_ = 0.0;
  long first_ = 0;
  long last_ = 0;
  long target_steps_ = 0;
  std::vector<Track> tracks_;
};

// Method of steps: on each interval (k xi, (k+1) xi] every driver's
// velocity F(X_{i+1}(t - tau_i) - X_i(t - tau_i)) only reads committed
// history, so the interval is integrated driver by driver with the
// composite trapezoid rule and linear interpolation of off-grid delayed
// values. Throws ValidationError for an invalid scenario, ConfigError for an
// undersized cone and NumericError on the first non-finite sample.
TrajectorySet integrate(const model::Scenario& s, EngineOptions opts = {});

// Continues an integration to a later horizon. The result equals a direct
// integration to that horizon bit for bit.
void extend(TrajectorySet& ts, double T_new, EngineOptions opts = {});

// Linear interpolation between samples, exact at sample times. Throws
// RangeError outside [-window, committed] and ConfigError for a driver not
// stored in cone mode.
double lookup(const TrajectorySet& ts, long i, double t);

// X_{i+1} - X_i sampled on the step grid over [t_begin, t_end].
struct GapSeries {
  long i = 0;
  long first_step = 0;
  double dt = 0.0;
  std::vector<double> gap;

  double time(std::size_t k) const { return static_cast<double>(first_step + static_cast<long>(k)) * dt; }
};

GapSeries gap_series(const TrajectorySet& ts, long i, double t_begin, double t_end);

// CSV `t,i,x`, ordered by time then driver, 17 significant digits. Covers
// the requested drivers from the start of the history window.
void write_csv(const TrajectorySet& ts, std::ostream& out, std::size_t stride = 1);

}  // namespace pursuit::dde
