#include "pursuit/dde_engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <thread>

#include "pursuit/errors.hpp"

namespace pursuit::dde {

namespace {

constexpr double kGridSnap = 1e-9;

long ceil_steps(double t, double dt) { return static_cast<long>(std::ceil(t / dt - kGridSnap)); }
long floor_steps(double t, double dt) { return static_cast<long>(std::floor(t / dt + kGridSnap)); }

struct BadSample {
  long step = std::numeric_limits<long>::max();
  long driver = 0;
};

bool earlier(const BadSample& a, const BadSample& b) {
  return a.step < b.step || (a.step == b.step && a.driver < b.driver);
}

}  // namespace

// ---------------------------------------------------------------------------

bool TrajectorySet::has_driver(long i) const { return periodic_ || (i >= stored_first() && i <= stored_last()); }

std::pair<std::size_t, double> TrajectorySet::locate(long i) const {
  if (periodic_) {
    const long N = static_cast<long>(tracks_.size());
    const long r = ((i % N) + N) % N;
    const long q = (i - r) / N;
    return {static_cast<std::size_t>(r), static_cast<double>(q) * period_shift_};
  }
  if (i < stored_first() || i > stored_last())
    throw ConfigError("driver " + std::to_string(i) + " is outside the stored cone [" +
                      std::to_string(stored_first()) + ", " + std::to_string(stored_last()) + "]");
  return {static_cast<std::size_t>(i - first_), 0.0};
}

long TrajectorySet::committed_steps(long i) const { return tracks_[locate(i).first].committed; }

double TrajectorySet::sample(long i, long n) const {
  const auto [k, shift] = locate(i);
  const Track& tr = tracks_[k];
  if (n < -history_steps_ || n > tr.committed)
    throw RangeError("step " + std::to_string(n) + " of driver " + std::to_string(i) + " is not committed");
  return tr.x[static_cast<std::size_t>(n + history_steps_)] + shift;
}

// Value of `src` at step n minus the reaction time of `self`.
static inline double delayed_value(const std::vector<double>& src, long idx, double frac) {
  const auto j = static_cast<std::size_t>(idx);
  return frac == 0.0 ? src[j] : (1.0 - frac) * src[j] + frac * src[j - 1];
}

double TrajectorySet::velocity_at(std::size_t k, long n) const {
  const Track& tr = tracks_[k];
  std::size_t nb = k + 1;
  double shift = 0.0;
  if (nb == tracks_.size()) {  // only reachable in periodic mode
    nb = 0;
    shift = period_shift_;
  }
  const long idx = n - tr.delay_steps + history_steps_;
  const double gap = delayed_value(tracks_[nb].x, idx, tr.delay_frac) + shift - delayed_value(tr.x, idx, tr.delay_frac);
  return model::eval_velocity_unchecked(scenario_->velocity, gap);
}

void TrajectorySet::advance(std::size_t k, long to) {
  Track& tr = tracks_[k];
  const double half_dt = 0.5 * dt_;
  double g_prev = velocity_at(k, tr.committed);
  for (long n = tr.committed + 1; n <= to; ++n) {
    const double g = velocity_at(k, n);
    const auto j = static_cast<std::size_t>(n + history_steps_);
    tr.x[j] = tr.x[j - 1] + half_dt * (g_prev + g);
    g_prev = g;
  }
  tr.committed = to;
}

void TrajectorySet::run_rounds(unsigned workers) {
  const long m = static_cast<long>(steps_per_interval_);
  long lowest = std::numeric_limits<long>::max();
  long highest = 0;
  for (const auto& tr : tracks_) {
    if (tr.committed < tr.target) lowest = std::min(lowest, tr.committed);
    highest = std::max(highest, tr.target);
  }
  if (lowest == std::numeric_limits<long>::max()) return;

  std::vector<std::size_t> todo;
  std::vector<long> from;
  std::vector<BadSample> bad;
  for (long bound = (lowest / m + 1) * m;; bound += m) {
    todo.clear();
    from.clear();
    for (std::size_t k = 0; k < tracks_.size(); ++k) {
      if (tracks_[k].committed < std::min(bound, tracks_[k].target)) {
        todo.push_back(k);
        from.push_back(tracks_[k].committed);
      }
    }
    bad.assign(todo.size(), BadSample{});

    auto work = [&](std::size_t begin, std::size_t end) {
      for (std::size_t w = begin; w < end; ++w) {
        const std::size_t k = todo[w];
        const long to = std::min(bound, tracks_[k].target);
        advance(k, to);
        const auto& x = tracks_[k].x;
        for (long n = from[w] + 1; n <= to; ++n) {
          if (!std::isfinite(x[static_cast<std::size_t>(n + history_steps_)])) {
            bad[w] = {n, first_ + static_cast<long>(k)};
            break;
          }
        }
      }
    };

    const std::size_t nthreads = std::min<std::size_t>(std::max(1u, workers), todo.size());
    if (nthreads <= 1) {
      work(0, todo.size());
    } else {
      std::vector<std::jthread> pool;
      const std::size_t chunk = (todo.size() + nthreads - 1) / nthreads;
      for (std::size_t b = 0; b < todo.size(); b += chunk) pool.emplace_back(work, b, std::min(todo.size(), b + chunk));
    }

    BadSample first_bad;
    for (const auto& b : bad)
      if (earlier(b, first_bad)) first_bad = b;
    if (first_bad.step != std::numeric_limits<long>::max())
      throw NumericError("non-finite position for driver " + std::to_string(first_bad.driver) +
                         " at t=" + std::to_string(static_cast<double>(first_bad.step) * dt_));

    if (bound >= highest) break;
  }
}

void TrajectorySet::add_track(long i) {
  const auto& s = *scenario_;
  Track tr;
  const double q = model::driver_delay(s, i) / dt_;
  const double qr = std::round(q);
  if (std::abs(q - qr) <= kGridSnap * qr) {
    tr.delay_steps = static_cast<long>(qr);
    tr.delay_frac = 0.0;
  } else {
    tr.delay_steps = static_cast<long>(std::floor(q));
    tr.delay_frac = q - std::floor(q);
  }
  tr.x.resize(static_cast<std::size_t>(history_steps_ + 1));
  for (long n = -history_steps_; n <= 0; ++n) {
    double v = 0.0;
    try {
      v = model::eval_initial(s.initial, i, static_cast<double>(n) * dt_, s.scale);
    } catch (const RangeError& e) {
      throw ConfigError(std::string("initial data unavailable: ") + e.what());
    }
    if (!std::isfinite(v))
      throw NumericError("non-finite initial position for driver " + std::to_string(i) +
                         " at t=" + std::to_string(static_cast<double>(n) * dt_));
    tr.x[static_cast<std::size_t>(n + history_steps_)] = v;
  }
  tracks_.push_back(std::move(tr));
}

void TrajectorySet::set_targets(long n_target) {
  target_steps_ = n_target;
  const long m = static_cast<long>(steps_per_interval_);
  for (std::size_t k = 0; k < tracks_.size(); ++k) {
    auto& tr = tracks_[k];
    const long i = first_ + static_cast<long>(k);
    tr.target = (periodic_ || i <= last_) ? n_target : std::max(0L, n_target - (i - last_) * m);
    tr.target = std::max(tr.target, tr.committed);
    tr.x.resize(static_cast<std::size_t>(history_steps_ + tr.target + 1));
  }
}

// ---------------------------------------------------------------------------

namespace {

// Highest driver index whose initial data the cone over [first, last] needs.
long cone_reach(long last, double T, double xi) { return last + static_cast<long>(std::ceil(T / xi - kGridSnap)) + 1; }

void require_cone_data(const model::Scenario& s, long first, long reach) {
  const auto span = model::driver_span(s.initial);
  if (span.bounded && (span.first > first || span.last < reach))
    throw ConfigError("cone truncation needs initial data for drivers [" + std::to_string(first) + ", " +
                      std::to_string(reach) + "], table holds [" + std::to_string(span.first) + ", " +
                      std::to_string(span.last) + "]");
}

}  // namespace

TrajectorySet integrate(const model::Scenario& s, EngineOptions opts) {
  if (const auto* cone = std::get_if<model::ConeTruncation>(&s.truncation))
    require_cone_data(s, cone->first, cone_reach(cone->last, s.T, s.delay.xi()));
  model::require_valid(s);

  TrajectorySet ts;
  ts.scenario_ = std::make_shared<const model::Scenario>(s);
  ts.dt_ = s.dt;
  ts.steps_per_interval_ = model::steps_per_interval(s);
  ts.history_steps_ = floor_steps(s.initial.window, s.dt);

  long reach = 0;
  if (const auto* per = std::get_if<model::PeriodicTruncation>(&s.truncation)) {
    ts.periodic_ = true;
    ts.period_shift_ = per->P;
    ts.first_ = 0;
    ts.last_ = static_cast<long>(per->N) - 1;
    reach = ts.last_;
  } else {
    const auto& cone = std::get<model::ConeTruncation>(s.truncation);
    ts.periodic_ = false;
    ts.first_ = cone.first;
    ts.last_ = cone.last;
    reach = cone_reach(cone.last, s.T, s.delay.xi());
  }
  for (long i = ts.first_; i <= reach; ++i) ts.add_track(i);

  ts.set_targets(ceil_steps(s.T, s.dt));
  ts.run_rounds(opts.workers);
  return ts;
}

void extend(TrajectorySet& ts, double T_new, EngineOptions opts) {
  const long n_new = ceil_steps(T_new, ts.dt_);
  if (n_new < ts.target_steps_) throw ConfigError("extend: new horizon precedes the committed one");
  if (n_new == ts.target_steps_) return;

  auto s = std::make_shared<model::Scenario>(*ts.scenario_);
  s->T = T_new;
  if (auto* cone = std::get_if<model::ConeTruncation>(&s->truncation)) {
    cone->horizon = std::max(cone->horizon, T_new);
    const long reach = cone_reach(ts.last_, T_new, s->delay.xi());
    require_cone_data(*s, ts.first_, reach);
    ts.scenario_ = s;
    while (ts.stored_last() < reach) ts.add_track(ts.stored_last() + 1);
  } else {
    ts.scenario_ = s;
  }
  ts.set_targets(n_new);
  ts.run_rounds(opts.workers);
}

double lookup(const TrajectorySet& ts, long i, double t) {
  const double dt = ts.dt();
  const double window = ts.scenario().initial.window;
  const double hi = static_cast<double>(ts.committed_steps(i)) * dt;
  const double tol = kGridSnap * dt;
  if (!(t >= -window - tol) || !(t <= hi + tol))
    throw RangeError("lookup: t=" + std::to_string(t) + " outside [" + std::to_string(-window) + ", " +
                     std::to_string(hi) + "] for driver " + std::to_string(i));

  const double u = t / dt;
  const double ur = std::round(u);
  const long h = ts.history_steps();
  if (std::abs(u - ur) <= kGridSnap) {
    const long n = static_cast<long>(ur);
    if (n >= -h) return ts.sample(i, n);
  }
  const long n0 = static_cast<long>(std::floor(u));
  if (n0 < -h) {
    const auto& s = ts.scenario();
    return model::eval_initial(s.initial, i, std::max(t, -window), s.scale);
  }
  const double w = u - static_cast<double>(n0);
  return (1.0 - w) * ts.sample(i, n0) + w * ts.sample(i, n0 + 1);
}

GapSeries gap_series(const TrajectorySet& ts, long i, double t_begin, double t_end) {
  if (!ts.has_driver(i) || !ts.has_driver(i + 1))
    throw ConfigError("gap_series: driver " + std::to_string(i) + " or its leader is not stored");
  const double dt = ts.dt();
  GapSeries g;
  g.i = i;
  g.dt = dt;
  g.first_step = std::max(ceil_steps(t_begin, dt), -ts.history_steps());
  const long last = floor_steps(t_end, dt);
  if (last > std::min(ts.committed_steps(i), ts.committed_steps(i + 1)))
    throw RangeError("gap_series: range ends after the committed horizon");
  for (long n = g.first_step; n <= last; ++n) g.gap.push_back(ts.sample(i + 1, n) - ts.sample(i, n));
  return g;
}

void write_csv(const TrajectorySet& ts, std::ostream& out, std::size_t stride) {
  if (stride == 0) stride = 1;
  out << "t,i,x\n";
  char buf[96];
  for (long n = -ts.history_steps(); n <= ts.committed_steps(); n += static_cast<long>(stride)) {
    const double t = static_cast<double>(n) * ts.dt();
    for (long i = ts.first_driver(); i <= ts.last_driver(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g,%ld,%.17g\n", t, i, ts.sample(i, n));
      out << buf;
    }
  }
}

}  // namespace pursuit::dde
