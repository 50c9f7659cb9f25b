#include "pursuit/homogenization.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include "pursuit/errors.hpp"
#include "pursuit/macro_hj.hpp"

namespace pursuit::homog {

namespace {

constexpr double kSnap = 1e-9;

long floor_index(double x, double eps) { return static_cast<long>(std::floor(x / eps + kSnap)); }
long ceil_index(double x, double eps) { return static_cast<long>(std::ceil(x / eps - kSnap)); }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

const model::QuadraticLaw& require_quadratic(const model::Scenario& s) {
  const auto* law = std::get_if<model::QuadraticLaw>(&s.velocity.law);
  if (!law || !std::holds_alternative<model::AlternatingSineHistory>(s.initial.family))
    throw ConfigError("the drift quotient needs the quadratic law with alternating oscillating data");
  return *law;
}

}  // namespace

EpsilonField rescale_field(const dde::TrajectorySet& ts, double epsilon, const Region& r, double ds) {
  if (!(epsilon > 0) || !(ds > 0) || !(r.x1 >= r.x0) || !(r.t1 >= r.t0))
    throw ConfigError("rescale_field: need eps > 0, ds > 0 and a non-empty region");
  const double need = r.t1 / epsilon;
  if (ts.committed_until() < need * (1 - 1e-12)) {
    throw ConfigError("rescale_field: the micro run reaches t=" + fmt(ts.committed_until()) +
                      ", the region needs micro time " + fmt(need));
  }
  EpsilonField f;
  f.epsilon = epsilon;
  f.i_first = ceil_index(r.x0, epsilon);
  f.i_last = floor_index(r.x1, epsilon);
  if (f.i_last < f.i_first) throw ConfigError("rescale_field: no driver i eps inside [x0, x1]");
  for (long i = f.i_first; i <= f.i_last; ++i)
    if (!ts.periodic() && (!ts.has_driver(i) || static_cast<double>(ts.committed_steps(i)) * ts.dt() < need * (1 - 1e-12)))
      throw ConfigError("rescale_field: driver " + std::to_string(i) + " is not integrated up to micro time " + fmt(need));
  const auto steps = static_cast<std::size_t>(std::floor((r.t1 - r.t0) / ds + kSnap));
  for (std::size_t k = 0; k <= steps; ++k) f.s.push_back(std::min(r.t1, r.t0 + static_cast<double>(k) * ds));
  if (f.s.back() < r.t1 - kSnap * ds) f.s.push_back(r.t1);
  f.values.reserve(f.s.size() * f.drivers());
  for (double s : f.s)
    for (long i = f.i_first; i <= f.i_last; ++i) f.values.push_back(epsilon * dde::lookup(ts, i, s / epsilon));
  return f;
}

double rescaled_value(const dde::TrajectorySet& ts, double epsilon, double x, double s) {
  return epsilon * dde::lookup(ts, floor_index(x, epsilon), s / epsilon);
}

double macro_initial(const model::InitialHistory& h, double x) {
  if (const auto* p = std::get_if<model::LinearHistory>(&h.family)) return p->L_gap * x;
  if (const auto* p = std::get_if<model::AlternatingSineHistory>(&h.family)) return p->L_gap * x;
  if (const auto* p = std::get_if<model::SinePerturbedHistory>(&h.family))
    return p->L_gap * x + p->amplitude * std::sin(2 * std::numbers::pi * x / p->period);
  throw ConfigError("this initial family has no macroscopic datum");
}

model::Scenario scale_scenario(const model::Scenario& s, double epsilon, const Region& r) {
  if (!(epsilon > 0)) throw ConfigError("scale parameter must be > 0");
  model::Scenario out = s;
  out.scale = epsilon;
  out.T = r.t1 / epsilon;
  if (auto* per = std::get_if<model::PeriodicTruncation>(&out.truncation)) {
    if (const auto* sp = std::get_if<model::SinePerturbedHistory>(&s.initial.family)) {
      const double n = sp->period / epsilon;
      const double rn = std::round(n);
      if (std::abs(n - rn) > kSnap * std::max(1.0, n) || rn < 1)
        throw ConfigError("period " + fmt(sp->period) + " is not a multiple of eps=" + fmt(epsilon));
      per->N = static_cast<std::size_t>(rn);
      per->P = sp->L_gap * rn;
    }
  } else {
    auto& cone = std::get<model::ConeTruncation>(out.truncation);
    cone.first = floor_index(r.x0, epsilon);
    cone.last = floor_index(r.x1, epsilon);
    cone.horizon = out.T;
  }
  return out;
}

FieldGrid solve_macro(const model::Scenario& s, const Region& r, double dx, std::size_t slices) {
  if (slices == 0) throw ConfigError("solve_macro: need at least one slice");
  const double C_F = model::lipschitz_data(s.velocity).C_F;
  const auto g = macro::grid_for(s.velocity, r.x0 - 0.5, r.x1 + C_F * r.t1 + 0.5, dx, r.t1,
                                 r.t1 / static_cast<double>(slices));
  return macro::solve_hj(s.velocity, [&](double x) { return macro_initial(s.initial, x); }, g);
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::converging:
      return "converging";
    case Verdict::stalled:
      return "stalled";
    default:
      return "inconclusive";
  }
}

Verdict classify(const std::vector<double>& e, double tolerance) {
  if (e.empty()) return Verdict::inconclusive;
  if (std::all_of(e.begin(), e.end(), [](double v) { return v <= defaults::quadrature_tolerance; }))
    return Verdict::converging;
  bool decreasing = true;
  for (std::size_t k = 1; k < e.size(); ++k) decreasing = decreasing && e[k] < e[k - 1];
  if (decreasing && e.back() <= tolerance) return Verdict::converging;
  if (e.size() >= 3) {
    const double floor = defaults::stall_floor_factor * defaults::quadrature_tolerance;
    bool flat = true;
    for (std::size_t a = e.size() - 3; a < e.size(); ++a)
      for (std::size_t b = a + 1; b < e.size(); ++b)
        flat = flat && std::abs(e[a] - e[b]) < defaults::stall_relative_spread * std::max(e[a], e[b]);
    const double low = std::min({e[e.size() - 1], e[e.size() - 2], e[e.size() - 3]});
    if (flat && low > floor) return Verdict::stalled;
  }
  return Verdict::inconclusive;
}

ConvergenceRecord convergence_study(const model::Scenario& s, const FieldGrid& macro, const Region& r,
                                    StudyOptions opts) {
  const auto& eps = s.epsilons;
  if (eps.size() < 3) throw ConfigError("a convergence study needs at least 3 values of eps");
  for (std::size_t k = 0; k < eps.size(); ++k)
    if (!(eps[k] > 0) || (k > 0 && !(eps[k] < eps[k - 1])))
      throw ConfigError("eps list must be positive and strictly decreasing");

  ConvergenceRecord rec;
  rec.region = r;
  rec.epsilons = eps;
  rec.errors.assign(eps.size(), 0.0);
  std::vector<std::exception_ptr> failures(eps.size());

  auto run = [&](std::size_t k) {
    try {
      auto sc = scale_scenario(s, eps[k], r);
      if (opts.dt) sc.dt = *opts.dt;
      const auto ts = dde::integrate(sc);
      const auto f = rescale_field(ts, eps[k], r, macro.dt);
      double err = 0.0;
      for (std::size_t n = 0; n < f.s.size(); ++n)
        for (long i = f.i_first; i <= f.i_last; ++i)
          err = std::max(err, std::abs(f.at(i, n) - macro.at(static_cast<double>(i) * eps[k], f.s[n])));
      rec.errors[k] = err;
    } catch (...) {
      failures[k] = std::current_exception();
    }
  };

  if (opts.workers <= 1) {
    for (std::size_t k = 0; k < eps.size(); ++k) run(k);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < opts.workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t k = w; k < eps.size(); k += opts.workers) run(k);
      });
  }
  for (auto& f : failures)
    if (f) std::rethrow_exception(f);
  rec.verdict = classify(rec.errors, opts.tolerance);
  if (std::holds_alternative<model::QuadraticLaw>(s.velocity.law) &&
      std::holds_alternative<model::AlternatingSineHistory>(s.initial.family))
    rec.drift = counterexample_drift(s, eps.back(), defaults::drift_s, defaults::drift_h, opts.dt);
  return rec;
}

double counterexample_drift(const model::Scenario& s, double epsilon, double s_time, double h, std::optional<double> dt) {
  const auto& law = require_quadratic(s);
  if (!(s_time > 0) || !(h > 0) || !(epsilon > 0)) throw DomainError("drift quotient needs eps, s, h > 0");
  model::Scenario sc = s;
  sc.T = (s_time + h) / epsilon;
  // A = 0 is the motionless degenerate case, which the oscillating family
  // itself does not admit.
  if (std::get<model::AlternatingSineHistory>(s.initial.family).A == 0.0)
    sc.initial.family = model::LinearHistory{law.L_gap};
  if (!std::holds_alternative<model::PeriodicTruncation>(sc.truncation))
    sc.truncation = model::PeriodicTruncation{2, 2 * law.L_gap};
  if (dt) sc.dt = *dt;
  const auto ts = dde::integrate(sc);
  return epsilon * (dde::lookup(ts, 0, (s_time + h) / epsilon) - dde::lookup(ts, 0, s_time / epsilon)) / h;
}

double macro_drift(const model::Scenario& s, double s_time, double h) {
  const auto& law = require_quadratic(s);
  if (!(s_time > 0) || !(h > 0)) throw DomainError("drift quotient needs s, h > 0");
  // dx, dt powers of two: the linear solution is computed without rounding.
  const double C_F = model::lipschitz_data(s.velocity).C_F;
  const double dx = std::ldexp(1.0, -6);
  double dt = std::ldexp(1.0, -6);
  while (dt * C_F > dx) dt /= 2;
  const double ns = s_time / dt, nh = h / dt;
  if (ns != std::round(ns) || nh != std::round(nh))
    throw ConfigError("s and h must be multiples of the dyadic step " + fmt(dt));
  const auto steps = static_cast<std::size_t>(ns + nh);
  const double reach = C_F * (s_time + h) + 1.0;
  const auto nx = static_cast<std::size_t>(std::ceil(reach / dx)) + 2;
  macro::HjGrid g{-1.0, dx, nx, dt, steps, 1};
  std::vector<double> u0(nx);
  for (std::size_t j = 0; j < nx; ++j) u0[j] = law.L_gap * (g.x0 + static_cast<double>(j) * dx);
  const auto u = macro::solve_hj(s.velocity, u0, g);
  const std::size_t j0 = static_cast<std::size_t>(std::lround(-g.x0 / dx));
  return (u(j0, static_cast<std::size_t>(ns + nh)) - u(j0, static_cast<std::size_t>(ns))) / h;
}

double oscillation_oracle(const model::QuadraticLaw& p, double A, double tau, long i, double t) {
  const double want = std::numbers::pi / (4 * p.alpha);
  if (std::abs(tau - want) > 1e-12 * want)
    throw DomainError("the oscillating solution needs tau = pi/(4 alpha) = " + fmt(want) + " (got " + fmt(tau) + ")");
  if (!(t >= 0)) throw DomainError("oscillation oracle is stated for t >= 0");
  const double sign = ((i + 1) % 2 == 0) ? 1.0 : -1.0;
  return p.L_gap + A * sign * std::sin(2 * p.alpha * t);
}

void write_convergence_csv(const ConvergenceRecord& rec, std::ostream& out) {
  out << "epsilon,sup_error\n";
  char buf[64];
  for (std::size_t k = 0; k < rec.errors.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", rec.epsilons[k], rec.errors[k]);
    out << buf;
  }
}

void write_drift_csv(const std::vector<DriftRow>& rows, std::ostream& out) {
  out << "epsilon,s,h,quotient\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", r.epsilon, r.s, r.h, r.quotient);
    out << buf;
  }
}

nlohmann::ordered_json record_json(const ConvergenceRecord& rec) {
  nlohmann::ordered_json j;
  j["region"] = {{"x0", rec.region.x0}, {"x1", rec.region.x1}, {"t0", rec.region.t0}, {"t1", rec.region.t1}};
  j["epsilons"] = rec.epsilons;
  j["errors"] = rec.errors;
  j["verdict"] = to_string(rec.verdict);
  if (rec.drift) j["drift"] = *rec.drift;
  return j;
}

}  // namespace pursuit::homog
