#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace pursuit::model {

// ---------------------------------------------------------------------------
// Velocity law F(gap)
// ---------------------------------------------------------------------------

// F(x) = k + beta (x - L)^2 + alpha (x - L) on [0, 2L], constant outside.
// Nondecreasing on [0, 2L] as long as alpha > 2 beta L; the strict form
// alpha > 4 beta L is required.
struct QuadraticLaw {
  double k = 1.0;
  double beta = 0.5;
  double alpha = 3.0;
  double L_gap = 1.0;
};

// F(x) = slope * clamp(x, lo, hi).
struct LinearClamped {
  double slope = 1.0;
  double lo = 0.0;
  double hi = 1.0;
};

// Piecewise linear through (x[k], f[k]) with constant extension. C_F and
// F_sup are declared by the caller and only trusted after an audit on
// `audit_points` uniform samples plus the knots.
struct Tabulated {
  std::vector<double> x;
  std::vector<double> f;
  double C_F = 0.0;
  double F_sup = 0.0;
  std::size_t audit_points = 4096;
};

struct VelocityProfile {
  std::variant<Tabulated, QuadraticLaw, LinearClamped> law;
};

struct LipschitzData {
  double C_F = 0.0;
  double F_sup = 0.0;
};

VelocityProfile zero_velocity();

// Throws DomainError for a non-finite gap.
double eval_velocity(const VelocityProfile& v, double gap);

// Hot-path variant used by the integrators; NaN in, NaN out.
double eval_velocity_unchecked(const VelocityProfile& v, double gap) noexcept;

// Closed form for the parametric laws, audited declaration for tables.
// Throws ValidationError naming the offending sample pair.
LipschitzData lipschitz_data(const VelocityProfile& v);

// ---------------------------------------------------------------------------
// Reaction times
// ---------------------------------------------------------------------------

struct ConstantDelay {
  double tau = 1.0;
};

// tau0(x) piecewise linear in the space coordinate, constant extension.
struct TabulatedDelay {
  std::vector<double> x;
  std::vector<double> tau0;
};

struct DelayProfile {
  std::variant<ConstantDelay, TabulatedDelay> profile;

  double at(double x) const;
  double xi() const;   // inf tau0
  double tau() const;  // sup tau0
  bool is_constant() const { return std::holds_alternative<ConstantDelay>(profile); }
};

// ---------------------------------------------------------------------------
// Initial histories on [-window, 0]
// ---------------------------------------------------------------------------

// x_i(t) = i L. Macroscopic datum u0(x, t) = L x.
struct LinearHistory {
  double L_gap = 1.0;
};

// x_i(t) = i L + (-1)^i (A/2) sin(2 alpha t). Microscopic datum.
struct AlternatingSineHistory {
  double L_gap = 1.0;
  double A = 0.4;
  double alpha = 3.0;
};

// The two driver families used to break the initial order. `copy` selects
// the upper (X) or lower (Y) family; drivers other than j, j+1 follow the
// same pattern so that y_i < x_i everywhere.
enum class OrderBreakCopy { X, Y };
struct OrderBreakHistory {
  int n0 = 1;
  long j = 0;
  OrderBreakCopy copy = OrderBreakCopy::X;
};

// u0(x, t) = L x + a sin(2 pi x / period), time independent. Macroscopic
// datum: at scale eps the drivers sit at u0(i eps, t eps) / eps.
struct SinePerturbedHistory {
  double L_gap = 1.0;
  double amplitude = 0.0;
  double period = 2.0;
};

// Sampled per-driver histories on a shared time grid, linear in between.
// x[k] belongs to driver first + k.
struct TableHistory {
  std::vector<double> t;
  long first = 0;
  std::vector<std::vector<double>> x;
  double L_lip = 0.0;
};

struct InitialHistory {
  std::variant<LinearHistory, AlternatingSineHistory, OrderBreakHistory, SinePerturbedHistory,
               TableHistory>
      family;
  double window = 0.0;  // histories are defined on [-window, 0]
};

// Position of driver i at time t in [-window, 0]. `scale` is the embedding
// parameter eps for macroscopic families and is ignored by the others.
// Throws RangeError outside the window or for a driver missing from a table.
double eval_initial(const InitialHistory& h, long i, double t, double scale = 1.0);

// Lipschitz constant of the datum: closed form for named families, the
// declared value for tables.
double history_lipschitz(const InitialHistory& h);

bool is_macroscopic(const InitialHistory& h);

// Drivers stored in a table history; named families are unbounded.
struct DriverSpan {
  bool bounded = false;
  long first = 0;
  long last = 0;
};
DriverSpan driver_span(const InitialHistory& h);

// ---------------------------------------------------------------------------
// Scenario
// ---------------------------------------------------------------------------

// X_{i+N} = X_i + P closes the system.
struct PeriodicTruncation {
  std::size_t N = 1;
  double P = 1.0;
};

// Drivers [first, last] are computed exactly on [0, horizon] from the
// initial data of the dependency cone.
struct ConeTruncation {
  long first = 0;
  long last = 0;
  double horizon = 0.0;
};

using Truncation = std::variant<PeriodicTruncation, ConeTruncation>;

struct Scenario {
  VelocityProfile velocity;
  DelayProfile delay;
  InitialHistory initial;
  Truncation truncation;
  double T = 1.0;
  double dt = 1e-3;
  std::vector<double> epsilons;
  double scale = 1.0;  // eps used to embed macroscopic data and tau0
};

struct Issue {
  std::string path;
  std::string message;
};

struct ValidationReport {
  std::vector<Issue> issues;
  double tau = 0.0;
  double C_F = 0.0;
  double threshold = 0.0;  // 1/(e C_F); +inf when C_F == 0
  bool below_threshold = false;

  bool ok() const { return issues.empty(); }
  std::string describe() const;
};

std::vector<Issue> check_velocity(const VelocityProfile& v);
ValidationReport validate_scenario(const Scenario& s);

// Throws ValidationError listing every issue.
void require_valid(const Scenario& s);

// Number of time steps per step interval of length xi; throws ConfigError if
// dt does not divide xi.
std::size_t steps_per_interval(const Scenario& s);

// Reaction time of driver i: tau0(i * scale).
double driver_delay(const Scenario& s, long i);

// ---------------------------------------------------------------------------
// Ready-made scenarios
// ---------------------------------------------------------------------------

// Equally spaced, motionless drivers (x_i = i L), periodic with N = 1.
Scenario stationary_scenario(const VelocityProfile& v, double tau, double L_gap, double T);

// Quadratic law, tau = pi / (4 alpha), alternating oscillations, N = 2.
Scenario oscillation_scenario(const QuadraticLaw& p, double A, double T);

// One copy of the order-breaking pair, cone mode over drivers [j, j].
Scenario order_break_scenario(int n0, double tau, OrderBreakCopy copy, double dt);

}  // namespace pursuit::model
