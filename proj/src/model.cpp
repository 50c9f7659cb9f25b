#include "pursuit/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "pursuit/defaults.hpp"
#include "pursuit/errors.hpp"

namespace pursuit::model {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

// Linear interpolation on sorted knots with constant extension.
double interp_clamped(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const auto k = static_cast<std::size_t>(it - xs.begin());
  const double w = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
  return ys[k - 1] + w * (ys[k] - ys[k - 1]);
}

bool strictly_increasing(const std::vector<double>& xs) {
  for (std::size_t k = 1; k < xs.size(); ++k)
    if (!(xs[k] > xs[k - 1])) return false;
  return true;
}

bool all_finite(const std::vector<double>& xs) {
  return std::all_of(xs.begin(), xs.end(), [](double v) { return std::isfinite(v); });
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

LipschitzData audit_table(const Tabulated& t) {
  if (t.x.size() < 2 || t.x.size() != t.f.size())
    throw ValidationError("tabulated velocity needs matching x/f arrays of length >= 2");
  if (!strictly_increasing(t.x)) throw ValidationError("tabulated velocity: x must be strictly increasing");
  if (!all_finite(t.x) || !all_finite(t.f)) throw ValidationError("tabulated velocity: non-finite sample");
  if (t.audit_points < 2) throw ValidationError("tabulated velocity: audit grid needs >= 2 points");

  const double span = t.x.back() - t.x.front();
  const double lo = t.x.front() - 0.25 * span;
  const double hi = t.x.back() + 0.25 * span;
  std::vector<double> samples(t.x);
  samples.reserve(t.x.size() + t.audit_points);
  for (std::size_t k = 0; k < t.audit_points; ++k)
    samples.push_back(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(t.audit_points - 1));
  std::sort(samples.begin(), samples.end());
  samples.erase(std::unique(samples.begin(), samples.end()), samples.end());

  const double slack = 1e-12;
  double prev = interp_clamped(t.x, t.f, samples.front());
  if (std::abs(prev) > t.F_sup * (1 + slack) + slack)
    throw ValidationError("tabulated velocity: |F(" + fmt(samples.front()) + ")| exceeds F_sup");
  for (std::size_t k = 1; k < samples.size(); ++k) {
    const double cur = interp_clamped(t.x, t.f, samples[k]);
    const double x1 = samples[k - 1];
    const double x2 = samples[k];
    if (cur < prev)
      throw ValidationError("tabulated velocity not nondecreasing: F(" + fmt(x1) + ")=" + fmt(prev) + " > F(" +
                            fmt(x2) + ")=" + fmt(cur));
    if (cur - prev > t.C_F * (x2 - x1) * (1 + slack) + slack)
      throw ValidationError("tabulated velocity violates declared C_F=" + fmt(t.C_F) + " between x=" + fmt(x1) +
                            " and x=" + fmt(x2));
    if (std::abs(cur) > t.F_sup * (1 + slack) + slack)
      throw ValidationError("tabulated velocity: |F(" + fmt(x2) + ")| exceeds F_sup");
    prev = cur;
  }
  return {t.C_F, t.F_sup};
}

double table_eval(const TableHistory& tab, long i, double t) {
  if (i < tab.first || i >= tab.first + static_cast<long>(tab.x.size()))
    throw RangeError("driver " + std::to_string(i) + " is not in the initial table");
  return interp_clamped(tab.t, tab.x[static_cast<std::size_t>(i - tab.first)], t);
}

}  // namespace

// ---------------------------------------------------------------------------

VelocityProfile zero_velocity() {
  return VelocityProfile{Tabulated{{0.0, 1.0}, {0.0, 0.0}, 0.0, 0.0, 4096}};
}

double eval_velocity_unchecked(const VelocityProfile& v, double gap) noexcept {
  return std::visit(Overloaded{
                        [gap](const QuadraticLaw& p) {
                          const double x = std::clamp(gap, 0.0, 2.0 * p.L_gap) - p.L_gap;
                          return p.k + p.beta * x * x + p.alpha * x;
                        },
                        [gap](const LinearClamped& p) { return p.slope * std::clamp(gap, p.lo, p.hi); },
                        [gap](const Tabulated& p) { return interp_clamped(p.x, p.f, gap); },
                    },
                    v.law);
}

double eval_velocity(const VelocityProfile& v, double gap) {
  if (!std::isfinite(gap)) throw DomainError("eval_velocity: non-finite gap");
  return eval_velocity_unchecked(v, gap);
}

LipschitzData lipschitz_data(const VelocityProfile& v) {
  return std::visit(Overloaded{
                        [](const QuadraticLaw& p) {
                          // F' = 2 beta (x - L) + alpha ranges over [alpha - 2 beta L, alpha + 2 beta L].
                          const double C_F = p.alpha + 2.0 * p.beta * p.L_gap;
                          const double F_sup = std::max(std::abs(p.k + p.beta * p.L_gap * p.L_gap - p.alpha * p.L_gap),
                                                        p.k + p.beta * p.L_gap * p.L_gap + p.alpha * p.L_gap);
                          return LipschitzData{C_F, F_sup};
                        },
                        [](const LinearClamped& p) {
                          return LipschitzData{std::abs(p.slope),
                                               std::abs(p.slope) * std::max(std::abs(p.lo), std::abs(p.hi))};
                        },
                        [](const Tabulated& p) { return audit_table(p); },
                    },
                    v.law);
}

std::vector<Issue> check_velocity(const VelocityProfile& v) {
  std::vector<Issue> out;
  std::visit(Overloaded{
                 [&](const QuadraticLaw& p) {
                   if (!(p.k > 0 && p.beta > 0 && p.alpha > 0 && p.L_gap > 0) || !std::isfinite(p.k) ||
                       !std::isfinite(p.beta) || !std::isfinite(p.alpha) || !std::isfinite(p.L_gap))
                     out.push_back({"velocity", "quadratic law needs finite k, beta, alpha, L_gap > 0"});
                   if (!(p.alpha > 4.0 * p.beta * p.L_gap))
                     out.push_back({"velocity.alpha", "alpha > 4 beta L_gap violated (alpha=" + fmt(p.alpha) +
                                                          ", 4 beta L_gap=" + fmt(4.0 * p.beta * p.L_gap) + ")"});
                 },
                 [&](const LinearClamped& p) {
                   if (!std::isfinite(p.slope) || !std::isfinite(p.lo) || !std::isfinite(p.hi))
                     out.push_back({"velocity", "linear-clamped parameters must be finite"});
                   if (p.slope < 0) out.push_back({"velocity.slope", "slope must be >= 0 (F nondecreasing)"});
                   if (!(p.lo <= p.hi)) out.push_back({"velocity", "linear-clamped needs lo <= hi"});
                 },
                 [&](const Tabulated& p) {
                   try {
                     audit_table(p);
                   } catch (const ValidationError& e) {
                     out.push_back({"velocity", e.what()});
                   }
                 },
             },
             v.law);
  return out;
}

// ---------------------------------------------------------------------------

double DelayProfile::at(double x) const {
  return std::visit(Overloaded{
                        [](const ConstantDelay& d) { return d.tau; },
                        [x](const TabulatedDelay& d) { return interp_clamped(d.x, d.tau0, x); },
                    },
                    profile);
}

double DelayProfile::xi() const {
  return std::visit(Overloaded{
                        [](const ConstantDelay& d) { return d.tau; },
                        [](const TabulatedDelay& d) { return *std::min_element(d.tau0.begin(), d.tau0.end()); },
                    },
                    profile);
}

double DelayProfile::tau() const {
  return std::visit(Overloaded{
                        [](const ConstantDelay& d) { return d.tau; },
                        [](const TabulatedDelay& d) { return *std::max_element(d.tau0.begin(), d.tau0.end()); },
                    },
                    profile);
}

// ---------------------------------------------------------------------------

double eval_initial(const InitialHistory& h, long i, double t, double scale) {
  const double tol = 1e-12 * std::max(1.0, h.window);
  if (!(t <= tol && t >= -h.window - tol))
    throw RangeError("eval_initial: t=" + fmt(t) + " outside [-" + fmt(h.window) + ", 0]");
  const double di = static_cast<double>(i);
  return std::visit(Overloaded{
                        [di](const LinearHistory& p) { return di * p.L_gap; },
                        [di, i, t](const AlternatingSineHistory& p) {
                          const double sign = (i % 2 == 0) ? 1.0 : -1.0;
                          return di * p.L_gap + sign * 0.5 * p.A * std::sin(2.0 * p.alpha * t);
                        },
                        [di, i, t](const OrderBreakHistory& p) {
                          const double n0 = p.n0;
                          const double lower = di - 1.0 + n0 / (n0 + 1.0) * std::exp(n0 * t);
                          if (p.copy == OrderBreakCopy::Y) return lower;
                          return i <= p.j ? di : lower + 1.0 / (n0 + 1.0);
                        },
                        [di, scale](const SinePerturbedHistory& p) {
                          const double x = di * scale;
                          return (p.L_gap * x + p.amplitude * std::sin(2.0 * std::numbers::pi * x / p.period)) / scale;
                        },
                        [i, t](const TableHistory& p) { return table_eval(p, i, t); },
                    },
                    h.family);
}

double history_lipschitz(const InitialHistory& h) {
  return std::visit(Overloaded{
                        [](const LinearHistory& p) { return std::abs(p.L_gap); },
                        [](const AlternatingSineHistory& p) { return std::max(p.L_gap + p.A, p.A * p.alpha); },
                        [](const OrderBreakHistory& p) {
                          const double n0 = p.n0;
                          return std::max(1.0, n0 * n0 / (n0 + 1.0));
                        },
                        [](const SinePerturbedHistory& p) {
                          return std::abs(p.L_gap) + 2.0 * std::numbers::pi * std::abs(p.amplitude) / p.period;
                        },
                        [](const TableHistory& p) { return p.L_lip; },
                    },
                    h.family);
}

bool is_macroscopic(const InitialHistory& h) {
  return std::holds_alternative<LinearHistory>(h.family) || std::holds_alternative<SinePerturbedHistory>(h.family);
}

DriverSpan driver_span(const InitialHistory& h) {
  if (const auto* tab = std::get_if<TableHistory>(&h.family))
    return {true, tab->first, tab->first + static_cast<long>(tab->x.size()) - 1};
  return {};
}

// ---------------------------------------------------------------------------

std::string ValidationReport::describe() const {
  std::ostringstream os;
  if (ok()) {
    os << "valid";
  } else {
    os << issues.size() << " issue(s):";
    for (const auto& is : issues) os << "\n  " << is.path << ": " << is.message;
  }
  return os.str();
}

namespace {

void check_history(const Scenario& s, std::vector<Issue>& out) {
  const auto& h = s.initial;
  const double tau = s.delay.tau();
  if (!(h.window >= 2.0 * tau * (1 - 1e-12)))
    out.push_back({"initial.window", "history window " + fmt(h.window) + " shorter than 2 tau = " + fmt(2 * tau)});

  std::visit(Overloaded{
                 [&](const LinearHistory& p) {
                   if (!std::isfinite(p.L_gap)) out.push_back({"initial.L_gap", "must be finite"});
                 },
                 [&](const AlternatingSineHistory& p) {
                   if (!(p.L_gap > 0) || !std::isfinite(p.L_gap)) out.push_back({"initial.L_gap", "must be > 0"});
                   if (!(p.alpha > 0) || !std::isfinite(p.alpha)) out.push_back({"initial.alpha", "must be > 0"});
                   if (!(p.A > 0 && p.A < p.L_gap / 2))
                     out.push_back({"initial.A", "A in (0, L_gap/2) violated (A=" + fmt(p.A) +
                                                     ", L_gap/2=" + fmt(p.L_gap / 2) + ")"});
                 },
                 [&](const OrderBreakHistory& p) {
                   if (p.n0 < 1) out.push_back({"initial.n0", "n0 must be a positive integer"});
                 },
                 [&](const SinePerturbedHistory& p) {
                   if (!std::isfinite(p.L_gap) || !std::isfinite(p.amplitude))
                     out.push_back({"initial", "sine-perturbed parameters must be finite"});
                   if (!(p.period > 0)) out.push_back({"initial.period", "must be > 0"});
                 },
                 [&](const TableHistory& p) {
                   if (p.t.size() < 2 || !strictly_increasing(p.t)) {
                     out.push_back({"initial.t", "needs >= 2 strictly increasing times"});
                     return;
                   }
                   if (p.t.front() > -h.window * (1 - 1e-12) || p.t.back() < 0.0)
                     out.push_back({"initial.t", "table does not cover [-" + fmt(h.window) + ", 0]"});
                   if (p.x.empty()) out.push_back({"initial.x", "no drivers"});
                   if (!(p.L_lip > 0)) out.push_back({"initial.L_lip", "table needs a declared L_lip > 0"});
                   for (std::size_t k = 0; k < p.x.size(); ++k) {
                     const auto& row = p.x[k];
                     const std::string where = "initial.x[" + std::to_string(k) + "]";
                     if (row.size() != p.t.size()) {
                       out.push_back({where, "length differs from the time grid"});
                       continue;
                     }
                     if (!all_finite(row)) {
                       out.push_back({where, "non-finite sample"});
                       continue;
                     }
                     for (std::size_t m = 1; m < row.size(); ++m) {
                       if (std::abs(row[m] - row[m - 1]) > p.L_lip * (p.t[m] - p.t[m - 1]) * (1 + 1e-12)) {
                         out.push_back({where, "time Lipschitz bound L_lip violated near t=" + fmt(p.t[m])});
                         break;
                       }
                     }
                     if (k + 1 < p.x.size() && p.x[k + 1].size() == row.size()) {
                       for (std::size_t m = 0; m < row.size(); ++m) {
                         if (std::abs(p.x[k + 1][m] - row[m]) > p.L_lip * (1 + 1e-12)) {
                           out.push_back({where, "space Lipschitz bound L_lip violated at t=" + fmt(p.t[m])});
                           break;
                         }
                       }
                     }
                   }
                 },
             },
             h.family);
}

void check_truncation(const Scenario& s, std::vector<Issue>& out) {
  const auto span = driver_span(s.initial);
  if (const auto* per = std::get_if<PeriodicTruncation>(&s.truncation)) {
    if (per->N < 1) out.push_back({"truncation.N", "must be >= 1"});
    if (!std::isfinite(per->P)) out.push_back({"truncation.P", "must be finite"});
    if (per->N < 1 || !std::isfinite(per->P) || !(s.initial.window > 0)) return;
    if (span.bounded && (span.first > 0 || span.last < static_cast<long>(per->N) - 1)) {
      out.push_back({"truncation", "initial table does not hold drivers 0..N-1"});
      return;
    }
    const long N = static_cast<long>(per->N);
    const int nt = 9;
    for (long i = 0; i < N; ++i) {
      if (span.bounded && i + N > span.last) break;
      for (int k = 0; k < nt; ++k) {
        const double t = -s.initial.window * k / (nt - 1);
        double a = 0.0;
        double b = 0.0;
        try {
          a = eval_initial(s.initial, i, t, s.scale);
          b = eval_initial(s.initial, i + N, t, s.scale);
        } catch (const Error& e) {
          out.push_back({"truncation", e.what()});
          return;
        }
        if (std::abs(b - a - per->P) > 1e-9 * (1 + std::abs(per->P) + std::abs(a))) {
          out.push_back({"truncation", "x0_{i+N} = x0_i + P fails at i=" + std::to_string(i) + ", t=" + fmt(t) +
                                           " (difference " + fmt(b - a) + ", P=" + fmt(per->P) + ")"});
          return;
        }
      }
    }
  } else {
    const auto& cone = std::get<ConeTruncation>(s.truncation);
    if (cone.first > cone.last) out.push_back({"truncation", "cone needs first <= last"});
    if (!(cone.horizon >= s.T * (1 - 1e-12)))
      out.push_back({"truncation.horizon", "cone horizon " + fmt(cone.horizon) + " shorter than T = " + fmt(s.T)});
    const double xi = s.delay.xi();
    if (span.bounded && xi > 0 && std::isfinite(cone.horizon)) {
      const long need = cone.last + static_cast<long>(std::ceil(cone.horizon / xi - 1e-9)) + 1;
      if (span.first > cone.first || span.last < need)
        out.push_back({"truncation", "cone needs initial data for drivers [" + std::to_string(cone.first) + ", " +
                                         std::to_string(need) + "]"});
    }
  }
}

}  // namespace

ValidationReport validate_scenario(const Scenario& s) {
  ValidationReport rep;
  auto& out = rep.issues;

  for (auto& is : check_velocity(s.velocity)) out.push_back(std::move(is));

  bool delay_ok = true;
  std::visit(Overloaded{
                 [&](const ConstantDelay& d) {
                   if (!(d.tau > 0) || !std::isfinite(d.tau)) {
                     out.push_back({"delay.tau", "reaction time must be finite and > 0"});
                     delay_ok = false;
                   }
                 },
                 [&](const TabulatedDelay& d) {
                   if (d.x.empty() || d.x.size() != d.tau0.size() || !strictly_increasing(d.x) || !all_finite(d.x)) {
                     out.push_back({"delay", "tabulated tau0 needs matching, strictly increasing knots"});
                     delay_ok = false;
                   } else if (std::any_of(d.tau0.begin(), d.tau0.end(),
                                          [](double v) { return !(v > 0) || !std::isfinite(v); })) {
                     out.push_back({"delay.tau0", "reaction times must be finite and > 0"});
                     delay_ok = false;
                   }
                 },
             },
             s.delay.profile);

  if (!(s.T > 0) || !std::isfinite(s.T)) out.push_back({"T", "horizon must be finite and > 0"});
  if (!(s.scale > 0) || !std::isfinite(s.scale)) out.push_back({"scale", "must be finite and > 0"});
  if (!(s.dt > 0) || !std::isfinite(s.dt)) {
    out.push_back({"dt", "time step must be finite and > 0"});
  } else if (delay_ok) {
    try {
      steps_per_interval(s);
    } catch (const ConfigError& e) {
      out.push_back({"dt", e.what()});
    }
  }
  for (std::size_t k = 0; k < s.epsilons.size(); ++k) {
    if (!(s.epsilons[k] > 0) || !std::isfinite(s.epsilons[k]))
      out.push_back({"epsilons[" + std::to_string(k) + "]", "must be finite and > 0"});
    else if (k > 0 && !(s.epsilons[k] < s.epsilons[k - 1]))
      out.push_back({"epsilons[" + std::to_string(k) + "]", "list must be strictly decreasing"});
  }

  if (delay_ok) {
    check_history(s, out);
    check_truncation(s, out);
    rep.tau = s.delay.tau();
  }

  try {
    rep.C_F = lipschitz_data(s.velocity).C_F;
    rep.threshold = rep.C_F > 0 ? 1.0 / (std::numbers::e * rep.C_F) : std::numeric_limits<double>::infinity();
    rep.below_threshold = rep.tau < rep.threshold;
  } catch (const ValidationError&) {
    // already reported by check_velocity
  }
  return rep;
}

void require_valid(const Scenario& s) {
  const auto rep = validate_scenario(s);
  if (!rep.ok()) throw ValidationError("invalid scenario: " + rep.describe());
}

std::size_t steps_per_interval(const Scenario& s) {
  const double ratio = s.delay.xi() / s.dt;
  const double m = std::round(ratio);
  if (!(m >= 1) || std::abs(ratio - m) > 1e-9 * m)
    throw ConfigError("dt=" + fmt(s.dt) + " does not divide xi=" + fmt(s.delay.xi()));
  return static_cast<std::size_t>(m);
}

double driver_delay(const Scenario& s, long i) { return s.delay.at(static_cast<double>(i) * s.scale); }

// ---------------------------------------------------------------------------

Scenario stationary_scenario(const VelocityProfile& v, double tau, double L_gap, double T) {
  Scenario s;
  s.velocity = v;
  s.delay = {ConstantDelay{tau}};
  s.initial = {LinearHistory{L_gap}, 2.0 * tau};
  s.truncation = PeriodicTruncation{1, L_gap};
  s.T = T;
  s.dt = defaults::dt_fraction * tau;
  s.epsilons = defaults::epsilons();
  return s;
}

Scenario oscillation_scenario(const QuadraticLaw& p, double A, double T) {
  const double tau = std::numbers::pi / (4.0 * p.alpha);
  Scenario s;
  s.velocity = {p};
  s.delay = {ConstantDelay{tau}};
  s.initial = {AlternatingSineHistory{p.L_gap, A, p.alpha}, 2.0 * tau};
  s.truncation = PeriodicTruncation{2, 2.0 * p.L_gap};
  s.T = T;
  s.dt = defaults::dt_fraction * tau;
  s.epsilons = defaults::epsilons();
  return s;
}

Scenario order_break_scenario(int n0, double tau, OrderBreakCopy copy, double dt) {
  Scenario s;
  s.velocity = {LinearClamped{1.0, 0.0, 1.0}};
  s.delay = {ConstantDelay{tau}};
  s.initial = {OrderBreakHistory{n0, 0, copy}, 2.0 * tau};
  s.truncation = ConeTruncation{0, 0, tau};
  s.T = tau;
  s.dt = dt;
  s.epsilons = defaults::epsilons();
  return s;
}

}  // namespace pursuit::model
