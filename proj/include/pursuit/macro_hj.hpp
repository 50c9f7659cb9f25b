#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "pursuit/field_grid.hpp"
#include "pursuit/model.hpp"

namespace pursuit::macro {

// Space grid x0 + j dx (j < nx), `steps` time steps of size dt starting at
// t = 0, one stored slice every `stride` steps.
struct HjGrid {
  double x0 = 0.0;
  double dx = 1.0;
  std::size_t nx = 0;
  double dt = 0.0;
  std::size_t steps = 0;
  std::size_t stride = 1;
};

struct HjOptions {
  unsigned workers = 1;
  // When set, the initial slice must be Lipschitz with this constant.
  std::optional<double> lipschitz;
};

// Grid covering [x_begin, x_end] x [0, T] with the given dx, slices stored
// every `store_every` (which must divide T) and the largest dt <= cfl dx / C_F
// dividing `store_every`.
HjGrid grid_for(const model::VelocityProfile& v, double x_begin, double x_end, double dx, double T,
                double store_every, double cfl = 0.9);

// Upwind update u_j <- u_j + dt F((u_{j+1} - u_j) / dx). The node past the
// right edge continues the initial end slope. Throws ConfigError on a CFL
// violation or a bad grid, ValidationError on a non-finite or
// non-Lipschitz initial slice.
FieldGrid solve_hj(const model::VelocityProfile& v, const std::vector<double>& u0, const HjGrid& g, HjOptions opts = {});
FieldGrid solve_hj(const model::VelocityProfile& v, const std::function<double(double)>& u0, const HjGrid& g,
                   HjOptions opts = {});

}  // namespace pursuit::macro
