#include "pursuit/comparison.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "pursuit/errors.hpp"

namespace pursuit::comparison {

namespace {

constexpr double kSnap = 1e-9;

bool close(double a, double b, double scale) { return std::abs(a - b) <= 1e-12 * std::max(1.0, scale); }

void require_same_grid(const FieldGrid& v, const FieldGrid& u) {
  if (v.nx != u.nx || v.nt != u.nt || !close(v.x0, u.x0, std::abs(v.x0)) || !close(v.dx, u.dx, v.dx) ||
      !close(v.t0, u.t0, std::abs(v.t0)) || !close(v.dt, u.dt, v.dt))
    throw ConfigError("v and u fields are not sampled on the same grid");
  if (v.nx == 0 || v.nt == 0) throw ConfigError("empty field");
}

void require_cover(const FieldGrid& g, const ComparisonWindow& w) {
  const double tau = w.rho.tau;
  std::ostringstream os;
  if (g.t0 > w.t0 - 2 * tau + kSnap * g.dt)
    os << "field starts at t=" << g.t0 << ", after t0 - 2 tau = " << w.t0 - 2 * tau << "; ";
  if (g.t_last() < w.T - kSnap * g.dt) os << "field ends at t=" << g.t_last() << ", before T = " << w.T << "; ";
  if (!w.unbounded()) {
    if (g.x0 > w.x0 - w.R - 1 + kSnap * g.dx || g.x_last() < w.x0 + w.R + 1 - kSnap * g.dx)
      os << "field x-range [" << g.x0 << ", " << g.x_last() << "] does not cover [" << w.x0 - w.R - 1 << ", "
         << w.x0 + w.R + 1 << "]; ";
  }
  const auto msg = os.str();
  if (!msg.empty()) throw ConfigError("comparison grid: " + msg.substr(0, msg.size() - 2));
}

// Node index ranges [lo, hi] of an axis restricted to [a, b]; hi < lo when empty.
std::pair<long, long> span(double origin, double step, std::size_t count, double a, double b) {
  const double lo = std::max(0.0, std::ceil((a - origin) / step - kSnap));
  const double hi = std::min(static_cast<double>(count) - 1, std::floor((b - origin) / step + kSnap));
  return {static_cast<long>(lo), static_cast<long>(hi)};
}

// Nodes with t in [a, b), the upper end excluded.
std::pair<long, long> span_open(double origin, double step, std::size_t count, double a, double b) {
  auto [lo, hi] = span(origin, step, count, a, b);
  if (hi >= lo && std::abs(origin + static_cast<double>(hi) * step - b) <= kSnap * step) --hi;
  return {lo, hi};
}

bool in_core(const ComparisonWindow& w, double x, double dx) {
  return w.unbounded() || std::abs(x - w.x0) <= w.R + kSnap * dx;
}

bool in_annulus(const ComparisonWindow& w, double x, double dx) {
  if (w.unbounded()) return false;
  const double r = std::abs(x - w.x0);
  return r >= w.R - kSnap * dx && r <= w.R + 1 + kSnap * dx;
}

}  // namespace

void check_window(const ComparisonWindow& w) {
  std::ostringstream os;
  if (!(w.delta > 0)) os << "delta must be > 0; ";
  if (!(w.t0 >= 0 && w.t0 < w.T)) os << "t0 must lie in [0, T); ";
  if (!(w.R >= 0)) os << "R must be >= 0 or infinite; ";
  if (!(w.rho.tau > 0)) os << "rho.tau must be > 0; ";
  const auto msg = os.str();
  if (!msg.empty()) throw ConfigError("comparison window: " + msg.substr(0, msg.size() - 2));
}

HypothesisFlags check_spacing_hypothesis(const FieldGrid& v, const FieldGrid& u, const ComparisonWindow& w,
                                         AuditOptions opts) {
  check_window(w);
  require_same_grid(v, u);
  require_cover(v, w);
  if (opts.tau_points < 2) throw ConfigError("need at least 2 tau' points");
  const double tau = w.rho.tau;
  HypothesisFlags out;

  if (!w.unbounded()) {
    const auto [n0, n1] = span_open(v.t0, v.dt, v.nt, w.t0 - tau, w.T);
    for (long n = n0; n <= n1 && out.boundary_ok; ++n)
      for (std::size_t j = 0; j < v.nx; ++j) {
        const double x = v.x(j);
        if (!in_annulus(w, x, v.dx)) continue;
        const double d = v(j, n) - u(j, n);
        if (d < 0) {
          out.boundary_ok = false;
          out.boundary_witness = Witness{x, v.t(n), 0.0, d, 0.0};
          break;
        }
      }
  }

  const auto [n0, n1] = span(v.t0, v.dt, v.nt, w.t0 - tau, w.t0);
  for (long n = n0; n <= n1 && out.initial_spacing_ok; ++n) {
    const double t = v.t(n);
    for (std::size_t j = 0; j < v.nx && out.initial_spacing_ok; ++j) {
      const double x = v.x(j);
      if (!in_core(w, x, v.dx)) continue;
      const double now = v(j, n) - u(j, n);
      for (int k = 0; k < opts.tau_points; ++k) {
        const double s = tau * k / (opts.tau_points - 1);
        const double past = v.at(x, t - s) - u.at(x, t - s);
        if (past < w.delta) {
          out.initial_spacing_ok = false;
          out.spacing_witness = Witness{x, t, s, past, w.delta};
          break;
        }
        const double cap = w.rho(s) * now;
        if (past > cap) {
          out.initial_spacing_ok = false;
          out.spacing_witness = Witness{x, t, s, past, cap};
          break;
        }
      }
    }
  }
  return out;
}

double decay_bound(const ComparisonWindow& w, double t) {
  return w.delta * std::exp(-w.rho.C_F * w.rho(w.rho.tau) * (t - w.t0));
}

AuditReport verify_conclusion(const FieldGrid& v, const FieldGrid& u, const ComparisonWindow& w, AuditOptions opts) {
  const auto hyp = check_spacing_hypothesis(v, u, w, opts);
  AuditReport r;
  r.boundary_ok = hyp.boundary_ok;
  r.initial_spacing_ok = hyp.initial_spacing_ok;
  r.boundary_witness = hyp.boundary_witness;
  r.spacing_witness = hyp.spacing_witness;
  r.rho_ok = thresholds::verify_condrho(w.rho).holds;

  r.conclusion_ok = true;
  const auto [n0, n1] = span_open(v.t0, v.dt, v.nt, w.t0, w.T);
  for (long n = n0; n <= n1; ++n) {
    const double t = v.t(n);
    const double bound = decay_bound(w, t);
    for (std::size_t j = 0; j < v.nx; ++j) {
      const double x = v.x(j);
      if (!in_core(w, x, v.dx)) continue;
      const double d = v(j, n) - u(j, n);
      const double slack = d - bound;
      r.min_slack = std::min(r.min_slack, slack);
      if (slack < 0 && r.conclusion_ok) {
        r.conclusion_ok = false;
        r.first_violation = Witness{x, t, 0.0, d, bound};
      }
    }
  }
  return r;
}

nlohmann::ordered_json report_json(const AuditReport& r) {
  auto witness = [](const std::optional<Witness>& w) -> nlohmann::ordered_json {
    if (!w) return nullptr;
    return {{"x", w->x}, {"t", w->t}, {"tau_prime", w->tau_prime}, {"value", w->value}, {"bound", w->bound}};
  };
  nlohmann::ordered_json j;
  j["hypothesis_ok"] = {{"boundary", r.boundary_ok}, {"initial_spacing", r.initial_spacing_ok}, {"rho", r.rho_ok}};
  j["conclusion_ok"] = r.conclusion_ok;
  j["min_slack"] = std::isfinite(r.min_slack) ? nlohmann::ordered_json(r.min_slack) : nlohmann::ordered_json(nullptr);
  j["first_violation"] = witness(r.first_violation);
  j["boundary_witness"] = witness(r.boundary_witness);
  j["spacing_witness"] = witness(r.spacing_witness);
  return j;
}

FieldGrid micro_field(const dde::TrajectorySet& ts, long first, long last, double t_begin, double t_end, long shift,
                      std::size_t time_stride) {
  if (last < first) throw ConfigError("micro_field: empty driver range");
  if (time_stride == 0) throw ConfigError("micro_field: time_stride must be >= 1");
  const double dt = ts.dt();
  const long nb = static_cast<long>(std::ceil(t_begin / dt - kSnap));
  const long ne = static_cast<long>(std::floor(t_end / dt + kSnap));
  if (nb < -ts.history_steps() || ne > ts.committed_steps() || ne < nb) {
    std::ostringstream os;
    os << "micro_field: [" << t_begin << ", " << t_end << "] outside the integrated range ["
       << -static_cast<double>(ts.history_steps()) * dt << ", " << ts.committed_until() << "]";
    throw RangeError(os.str());
  }
  const auto stride = static_cast<long>(time_stride);
  const auto nt = static_cast<std::size_t>((ne - nb) / stride + 1);
  const auto nx = static_cast<std::size_t>(last - first + 1);
  FieldGrid g = make_field(static_cast<double>(first), 1.0, nx, static_cast<double>(nb) * dt,
                           static_cast<double>(stride) * dt, nt);
  for (std::size_t n = 0; n < nt; ++n)
    for (std::size_t j = 0; j < nx; ++j)
      g(j, n) = ts.sample(first + static_cast<long>(j) + shift, nb + static_cast<long>(n) * stride);
  return g;
}

std::optional<Crossing> order_conservation_audit(const dde::TrajectorySet& ts) {
  const long first = ts.first_driver(), last = ts.last_driver();
  std::vector<long> until(static_cast<std::size_t>(last - first + 1), -1);
  long n_max = 0;
  for (long i = first; i <= last; ++i) {
    if (!ts.periodic() && !ts.has_driver(i + 1)) continue;
    const long u = ts.periodic() ? ts.committed_steps() : std::min(ts.committed_steps(i), ts.committed_steps(i + 1));
    until[static_cast<std::size_t>(i - first)] = u;
    n_max = std::max(n_max, u);
  }
  for (long n = 0; n <= n_max; ++n)
    for (long i = first; i <= last; ++i) {
      if (n > until[static_cast<std::size_t>(i - first)]) continue;
      const double gap = ts.sample(i + 1, n) - ts.sample(i, n);
      if (gap <= 0) return Crossing{i, static_cast<double>(n) * ts.dt(), gap};
    }
  return std::nullopt;
}

std::optional<Crossing> family_order_audit(const dde::TrajectorySet& upper, const dde::TrajectorySet& lower, long first,
                                           long last) {
  if (upper.dt() != lower.dt()) throw ConfigError("family_order_audit: the two runs use different time steps");
  long n_max = -1;
  for (long i = first; i <= last; ++i) {
    if (!upper.has_driver(i) || !lower.has_driver(i)) {
      std::ostringstream os;
      os << "family_order_audit: driver " << i << " not stored in both runs";
      throw ConfigError(os.str());
    }
    n_max = std::max(n_max, std::min(upper.committed_steps(i), lower.committed_steps(i)));
  }
  for (long n = 0; n <= n_max; ++n)
    for (long i = first; i <= last; ++i) {
      if (n > upper.committed_steps(i) || n > lower.committed_steps(i)) continue;
      const double gap = upper.sample(i, n) - lower.sample(i, n);
      if (gap <= 0) return Crossing{i, static_cast<double>(n) * upper.dt(), gap};
    }
  return std::nullopt;
}

void write_crossings_csv(const std::vector<Crossing>& rows, std::ostream& out) {
  out << "i,t,gap\n";
  char buf[96];
  for (const auto& c : rows) {
    std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g\n", c.i, c.t, c.gap);
    out << buf;
  }
}

double order_break_closed_form(int n0, double tau) {
  if (n0 < 1) throw DomainError("n0 must be a positive integer");
  const double n = n0;
  if (!(tau > 2.0 / n)) {
    std::ostringstream os;
    os << "the order-breaking pair needs tau > 2/n0 = " << 2.0 / n << " (got " << tau << ")";
    throw DomainError(os.str());
  }
  return n / (n + 1) * tau - 1 / (n + 1) + std::expm1(-n * tau) / (n + 1);
}

}  // namespace pursuit::comparison
