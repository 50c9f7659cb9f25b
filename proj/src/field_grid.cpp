#include "pursuit/field_grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "pursuit/errors.hpp"

namespace pursuit {

namespace {

constexpr double kSnap = 1e-9;

// Cell index and fraction for coordinate q on a uniform axis.
std::pair<std::size_t, double> cell(double q, double origin, double step, std::size_t count) {
  const double r = (q - origin) / step;
  if (count == 1) return {0, 0.0};
  const double nearest = std::round(r);
  if (std::abs(r - nearest) <= kSnap) {
    const auto k = static_cast<std::size_t>(nearest);
    if (k == count - 1) return {k - 1, 1.0};
    return {k, 0.0};
  }
  auto k = static_cast<std::size_t>(std::floor(r));
  k = std::min(k, count - 2);
  return {k, r - static_cast<double>(k)};
}

}  // namespace

bool FieldGrid::contains(double xq, double tq) const {
  if (nx == 0 || nt == 0) return false;
  const double rx = (xq - x0) / dx, rt = (tq - t0) / dt;
  return rx >= -kSnap && rx <= static_cast<double>(nx - 1) + kSnap && rt >= -kSnap &&
         rt <= static_cast<double>(nt - 1) + kSnap;
}

double FieldGrid::at(double xq, double tq) const {
  if (!contains(xq, tq)) {
    std::ostringstream os;
    os << "field lookup (" << xq << ", " << tq << ") outside [" << x0 << ", " << x_last() << "] x [" << t0 << ", "
       << t_last() << "]";
    throw RangeError(os.str());
  }
  const auto [j, fx] = cell(xq, x0, dx, nx);
  const auto [n, ft] = cell(tq, t0, dt, nt);
  auto row = [&](std::size_t m) {
    const double a = (*this)(j, m);
    return fx == 0.0 ? a : a + fx * ((*this)(j + 1, m) - a);
  };
  const double lo = row(n);
  return ft == 0.0 ? lo : lo + ft * (row(n + 1) - lo);
}

double FieldGrid::slice_lipschitz(std::size_t n) const {
  double lip = 0.0;
  for (std::size_t j = 0; j + 1 < nx; ++j) lip = std::max(lip, std::abs((*this)(j + 1, n) - (*this)(j, n)) / dx);
  return lip;
}

FieldGrid make_field(double x0, double dx, std::size_t nx, double t0, double dt, std::size_t nt) {
  if (!(dx > 0) || !(dt > 0)) throw ConfigError("field grid steps must be > 0");
  FieldGrid g{x0, dx, nx, t0, dt, nt, {}};
  g.values.assign(nx * nt, 0.0);
  return g;
}

NodeRange nodes_in(const FieldGrid& g, const Region& r) {
  NodeRange out;
  if (g.nx == 0 || g.nt == 0) return out;
  const double jlo = std::ceil((r.x0 - g.x0) / g.dx - kSnap);
  const double jhi = std::floor((r.x1 - g.x0) / g.dx + kSnap);
  const double nlo = std::ceil((r.t0 - g.t0) / g.dt - kSnap);
  const double nhi = std::floor((r.t1 - g.t0) / g.dt + kSnap);
  const double jmax = static_cast<double>(g.nx - 1), nmax = static_cast<double>(g.nt - 1);
  const double a = std::max(jlo, 0.0), b = std::min(jhi, jmax);
  const double c = std::max(nlo, 0.0), d = std::min(nhi, nmax);
  if (a > b || c > d) return out;
  out = {static_cast<std::size_t>(a), static_cast<std::size_t>(b), static_cast<std::size_t>(c),
         static_cast<std::size_t>(d), false};
  return out;
}

double sup_error(const FieldGrid& a, const FieldGrid& b, const Region& r) {
  const auto nr = nodes_in(a, r);
  if (nr.empty) throw ConfigError("comparison region contains no node of the first field");
  double err = 0.0;
  std::size_t used = 0;
  for (std::size_t n = nr.n0; n <= nr.n1; ++n)
    for (std::size_t j = nr.j0; j <= nr.j1; ++j) {
      const double xq = a.x(j), tq = a.t(n);
      if (!b.contains(xq, tq)) continue;
      err = std::max(err, std::abs(a(j, n) - b.at(xq, tq)));
      ++used;
    }
  if (used == 0) throw ConfigError("comparison region does not meet the second field");
  return err;
}

void write_field_csv(const FieldGrid& g, std::ostream& out) {
  out << "t,x,u\n";
  char buf[96];
  for (std::size_t n = 0; n < g.nt; ++n)
    for (std::size_t j = 0; j < g.nx; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", g.t(n), g.x(j), g(j, n));
      out << buf;
    }
}

}  // namespace pursuit
