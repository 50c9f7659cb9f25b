#pragma once

#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include <json.hpp>

#include "pursuit/dde_engine.hpp"
#include "pursuit/defaults.hpp"
#include "pursuit/field_grid.hpp"
#include "pursuit/thresholds.hpp"

namespace pursuit::comparison {

// Space-time window of the strict comparison principle. R = +inf means the
// whole line: the boundary annulus is empty.
struct ComparisonWindow {
  double delta = 0.0;
  double t0 = 0.0;
  double R = INFINITY;
  double x0 = 0.0;
  double T = 0.0;
  thresholds::RhoFunction rho;

  bool unbounded() const { return std::isinf(R); }
};

// Throws ConfigError unless delta > 0, t0 in [0, T), R >= 0 and rho.tau > 0.
void check_window(const ComparisonWindow& w);

struct Witness {
  double x = 0.0;
  double t = 0.0;
  double tau_prime = 0.0;  // only meaningful for the initial spacing condition
  double value = 0.0;      // the offending difference v - u
  double bound = 0.0;      // what it had to respect
};

struct HypothesisFlags {
  bool boundary_ok = true;        // v >= u on the annulus R <= |x - x0| <= R + 1
  bool initial_spacing_ok = true;  // delta <= d(x, t - s) <= rho(s) d(x, t) on the core
  std::optional<Witness> boundary_witness;
  std::optional<Witness> spacing_witness;
};

struct AuditOptions {
  int tau_points = defaults::spacing_tau_points;
};

// Both fields on one grid covering [x0 - R - 1, x0 + R + 1] (or any range
// when R is infinite) and [t0 - 2 tau, T]. Witnesses are the first failures
// in (t, x) order. Throws ConfigError on misaligned or undersized grids.
HypothesisFlags check_spacing_hypothesis(const FieldGrid& v, const FieldGrid& u, const ComparisonWindow& w,
                                         AuditOptions opts = {});

struct AuditReport {
  bool boundary_ok = false;
  bool initial_spacing_ok = false;
  bool rho_ok = false;
  bool conclusion_ok = false;
  double min_slack = INFINITY;  // min of (v - u) - delta exp(-C_F rho(tau) (t - t0))
  std::optional<Witness> first_violation;
  std::optional<Witness> boundary_witness;
  std::optional<Witness> spacing_witness;

  bool hypotheses_ok() const { return boundary_ok && initial_spacing_ok && rho_ok; }
};

// Lower bound delta exp(-C_F rho(tau) (t - t0)).
double decay_bound(const ComparisonWindow& w, double t);

// Checks the hypotheses, the rho condition, and v - u >= decay_bound at every
// node of [x0 - R, x0 + R] x [t0, T).
AuditReport verify_conclusion(const FieldGrid& v, const FieldGrid& u, const ComparisonWindow& w,
                              AuditOptions opts = {});

nlohmann::ordered_json report_json(const AuditReport& r);

// Field u(i, t) = X_{i + shift}(t) for drivers [first, last] on the step grid
// over [t_begin, t_end], keeping every `time_stride`-th sample. dx = 1.
FieldGrid micro_field(const dde::TrajectorySet& ts, long first, long last, double t_begin, double t_end,
                      long shift = 0, std::size_t time_stride = 1);

struct Crossing {
  long i = 0;
  double t = 0.0;
  double gap = 0.0;
};

// Earliest (t, i) with X_{i+1}(t) <= X_i(t) over the requested drivers.
std::optional<Crossing> order_conservation_audit(const dde::TrajectorySet& ts);

// Earliest (t, i) with upper_i(t) <= lower_i(t), for two solutions sharing a
// clock; drivers [first, last] must be stored in both.
std::optional<Crossing> family_order_audit(const dde::TrajectorySet& upper, const dde::TrajectorySet& lower,
                                           long first, long last);

// CSV `i,t,gap`.
void write_crossings_csv(const std::vector<Crossing>& rows, std::ostream& out);

// (Y_j - X_j)(tau) of the order-breaking pair. Throws DomainError unless
// tau > 2 / n0 and n0 >= 1.
double order_break_closed_form(int n0, double tau);

}  // namespace pursuit::comparison
