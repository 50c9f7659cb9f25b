#include "pursuit/macro_hj.hpp"

#include <algorithm>
#include <barrier>
#include <cmath>
#include <sstream>
#include <thread>

#include "pursuit/errors.hpp"

namespace pursuit::macro {

HjGrid grid_for(const model::VelocityProfile& v, double x_begin, double x_end, double dx, double T,
                double store_every, double cfl) {
  if (!(dx > 0) || !(x_end > x_begin) || !(T > 0) || !(store_every > 0) || !(cfl > 0 && cfl <= 1))
    throw ConfigError("grid_for: need dx > 0, x_end > x_begin, T > 0, store_every > 0, cfl in (0, 1]");
  const double slices = T / store_every;
  const double nslices = std::round(slices);
  if (std::abs(slices - nslices) > 1e-9 * std::max(1.0, slices))
    throw ConfigError("grid_for: store_every must divide T");
  const double C_F = model::lipschitz_data(v).C_F;
  const auto per_slice =
      C_F > 0 ? static_cast<std::size_t>(std::max(1.0, std::ceil(store_every * C_F / (cfl * dx) - 1e-12))) : 1;
  HjGrid g;
  g.x0 = x_begin;
  g.dx = dx;
  g.nx = static_cast<std::size_t>(std::ceil((x_end - x_begin) / dx - 1e-9)) + 1;
  g.stride = per_slice;
  g.dt = store_every / static_cast<double>(per_slice);
  g.steps = static_cast<std::size_t>(nslices) * per_slice;
  return g;
}

namespace {

void check_grid(const model::VelocityProfile& v, const HjGrid& g) {
  if (g.nx < 2) throw ConfigError("solve_hj: need at least 2 nodes");
  if (!(g.dx > 0) || !(g.dt > 0)) throw ConfigError("solve_hj: dx and dt must be > 0");
  if (g.stride == 0 || g.steps % g.stride != 0) throw ConfigError("solve_hj: stride must divide steps");
  const double C_F = model::lipschitz_data(v).C_F;
  if (g.dt * C_F > g.dx * (1 + 1e-12)) {
    std::ostringstream os;
    os.precision(17);
    os << "CFL violated: dt=" << g.dt << " > dx/C_F=" << g.dx / C_F;
    throw ConfigError(os.str());
  }
}

void check_slice(const std::vector<double>& u0, const HjGrid& g, const HjOptions& opts) {
  if (u0.size() != g.nx) throw ConfigError("solve_hj: initial slice size differs from nx");
  for (std::size_t j = 0; j < u0.size(); ++j)
    if (!std::isfinite(u0[j])) {
      std::ostringstream os;
      os << "initial slice not finite at node " << j;
      throw ValidationError(os.str());
    }
  if (!opts.lipschitz) return;
  const double L = *opts.lipschitz;
  for (std::size_t j = 0; j + 1 < u0.size(); ++j) {
    const double q = std::abs(u0[j + 1] - u0[j]) / g.dx;
    if (q > L * (1 + 1e-9) + 1e-12) {
      std::ostringstream os;
      os << "initial slice not " << L << "-Lipschitz between nodes " << j << " and " << j + 1 << " (quotient " << q
         << ")";
      throw ValidationError(os.str());
    }
  }
}

}  // namespace

FieldGrid solve_hj(const model::VelocityProfile& v, const std::vector<double>& u0, const HjGrid& g, HjOptions opts) {
  check_grid(v, g);
  check_slice(u0, g, opts);

  FieldGrid out = make_field(g.x0, g.dx, g.nx, 0.0, g.dt * static_cast<double>(g.stride), g.steps / g.stride + 1);
  std::copy(u0.begin(), u0.end(), out.values.begin());

  const std::size_t nx = g.nx;
  const double edge_speed = model::eval_velocity(v, (u0[nx - 1] - u0[nx - 2]) / g.dx);
  std::vector<double> cur = u0, next(nx);

  auto update = [&](std::size_t a, std::size_t b) {
    for (std::size_t j = a; j < b; ++j) {
      if (j + 1 < nx)
        next[j] = cur[j] + g.dt * model::eval_velocity_unchecked(v, (cur[j + 1] - cur[j]) / g.dx);
      else
        next[j] = cur[j] + g.dt * edge_speed;
    }
  };

  std::size_t step = 0;
  bool bad = false;
  auto commit = [&]() noexcept {
    for (double u : next)
      if (!std::isfinite(u)) bad = true;
    cur.swap(next);
    ++step;
    if (step % g.stride == 0) std::copy(cur.begin(), cur.end(), out.values.begin() + (step / g.stride) * nx);
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(opts.workers, static_cast<unsigned>(nx / 64 + 1)));
  if (workers == 1) {
    while (step < g.steps && !bad) {
      update(0, nx);
      commit();
    }
  } else {
    std::barrier sync(static_cast<std::ptrdiff_t>(workers), commit);
    auto body = [&](unsigned w) {
      const std::size_t a = nx * w / workers, b = nx * (w + 1) / workers;
      for (std::size_t k = 0; k < g.steps; ++k) {
        update(a, b);
        sync.arrive_and_wait();
      }
    };
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(body, w);
    body(0);
  }
  if (bad) throw NumericError("solve_hj produced a non-finite value");
  return out;
}

FieldGrid solve_hj(const model::VelocityProfile& v, const std::function<double(double)>& u0, const HjGrid& g,
                   HjOptions opts) {
  std::vector<double> slice(g.nx);
  for (std::size_t j = 0; j < g.nx; ++j) slice[j] = u0(g.x0 + static_cast<double>(j) * g.dx);
  return solve_hj(v, slice, g, opts);
}

}  // namespace pursuit::macro
