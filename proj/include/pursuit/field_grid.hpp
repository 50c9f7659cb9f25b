#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

namespace pursuit {

// Compact space-time box [x0, x1] x [t0, t1].
struct Region {
  double x0 = 0.0;
  double x1 = 0.0;
  double t0 = 0.0;
  double t1 = 0.0;
};

// Position-valued field sampled on a uniform space-time grid. Node (j, n)
// sits at x0 + j dx, t0 + n dt; values are stored slice by slice.
struct FieldGrid {
  double x0 = 0.0;
  double dx = 1.0;
  std::size_t nx = 0;
  double t0 = 0.0;
  double dt = 1.0;
  std::size_t nt = 0;
  std::vector<double> values;

  double x(std::size_t j) const { return x0 + static_cast<double>(j) * dx; }
  double t(std::size_t n) const { return t0 + static_cast<double>(n) * dt; }
  double x_last() const { return x(nx - 1); }
  double t_last() const { return t(nt - 1); }

  double& operator()(std::size_t j, std::size_t n) { return values[n * nx + j]; }
  double operator()(std::size_t j, std::size_t n) const { return values[n * nx + j]; }

  bool contains(double xq, double tq) const;

  // Bilinear interpolation, exact at nodes. Throws RangeError outside the grid.
  double at(double xq, double tq) const;

  // Largest |u(x_{j+1}) - u(x_j)| / dx over slice n.
  double slice_lipschitz(std::size_t n) const;
};

FieldGrid make_field(double x0, double dx, std::size_t nx, double t0, double dt, std::size_t nt);

// Node index ranges of `g` inside `r`; empty when they do not meet.
struct NodeRange {
  std::size_t j0 = 0, j1 = 0;  // inclusive
  std::size_t n0 = 0, n1 = 0;
  bool empty = true;
};
NodeRange nodes_in(const FieldGrid& g, const Region& r);

// max |a - b| over the nodes of `a` inside the region, with `b` interpolated
// onto them. Throws ConfigError when the region misses either grid.
double sup_error(const FieldGrid& a, const FieldGrid& b, const Region& r);

// CSV `t,x,u`, 17 significant digits.
void write_field_csv(const FieldGrid& g, std::ostream& out);

}  // namespace pursuit
