#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "pursuit/errors.hpp"
#include "pursuit/macro_hj.hpp"

using namespace pursuit;
using namespace pursuit::macro;
using model::LinearClamped;
using model::QuadraticLaw;
using model::VelocityProfile;

namespace {

const VelocityProfile kQuadratic{QuadraticLaw{1.0, 0.5, 3.0, 1.0}};
const VelocityProfile kTransport{LinearClamped{1.0, -1.0, 2.0}};

HjGrid dyadic_grid(std::size_t nx, std::size_t steps, std::size_t stride = 1) {
  return {-2.0, std::ldexp(1.0, -6), nx, std::ldexp(1.0, -9), steps, stride};
}

double kink_error(double dx, double cfl) {
  HjGrid g{-1.0, dx, static_cast<std::size_t>(std::lround(3.0 / dx)) + 1, cfl * dx, 0, 1};
  g.steps = static_cast<std::size_t>(std::lround(0.5 / g.dt));
  g.stride = g.steps;
  const auto u = solve_hj(kTransport, [](double x) { return std::abs(x); }, g);
  FieldGrid exact = u;
  for (std::size_t n = 0; n < exact.nt; ++n)
    for (std::size_t j = 0; j < exact.nx; ++j) exact(j, n) = std::abs(exact.x(j) + exact.t(n));
  return sup_error(u, exact, {-0.5, 0.5, 0.5, 0.5});
}

}  // namespace

TEST_CASE("linear data is transported exactly") {
  const auto g = dyadic_grid(257, 512, 64);
  const auto u = solve_hj(kQuadratic, [](double x) { return x; }, g);
  CHECK(u.nt == 9);
  const double FL = model::eval_velocity(kQuadratic, 1.0);
  FieldGrid exact = u;
  for (std::size_t n = 0; n < u.nt; ++n)
    for (std::size_t j = 0; j < u.nx; ++j) exact(j, n) = u.x(j) + FL * u.t(n);
  CHECK(sup_error(u, exact, {-2.0, 2.0, 0.0, 1.0}) <= 1e-12);
  CHECK(sup_error(u, u, {-2.0, 2.0, 0.0, 1.0}) == 0.0);
  CHECK(u.at(0.5, 1.0) == doctest::Approx(0.5 + FL).epsilon(1e-14));
}

TEST_CASE("zero law keeps the initial slice") {
  const auto g = dyadic_grid(65, 100, 10);
  const auto u = solve_hj(model::zero_velocity(), [](double x) { return std::sin(3 * x); }, g);
  for (std::size_t n = 0; n < u.nt; ++n)
    for (std::size_t j = 0; j < u.nx; ++j) CHECK(u(j, n) == u(j, 0));
}

TEST_CASE("kink transport") {
  const double coarse = kink_error(1.0 / 200, 0.5);
  const double fine = kink_error(1.0 / 400, 0.5);
  const double finer = kink_error(1.0 / 800, 0.5);
  INFO("coarse=" << coarse << " fine=" << fine << " finer=" << finer);
  // Below unit CFL the kink error decays like sqrt(dx), not dx.
  CHECK(coarse <= std::sqrt(1.0 / 200));
  CHECK(coarse / fine == doctest::Approx(std::sqrt(2.0)).epsilon(0.05));
  CHECK(fine / finer == doctest::Approx(std::sqrt(2.0)).epsilon(0.05));
  // Unit CFL shifts nodes exactly.
  CHECK(kink_error(1.0 / 256, 1.0) <= 1e-14);
}

TEST_CASE("discrete comparison principle") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  const auto g = dyadic_grid(200, 600, 50);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(g.nx), b(g.nx);
    double ya = 0, yb = 0.5;
    for (std::size_t j = 0; j < g.nx; ++j) {
      ya += g.dx * (1 + 0.9 * d(rng));
      yb += g.dx * (1 + 0.9 * d(rng));
      a[j] = ya;
      b[j] = std::max(yb, ya);  // b >= a nodewise
    }
    // same edge slope, so the edge nodes move together
    a.back() = a[g.nx - 2] + g.dx;
    b.back() = b[g.nx - 2] + g.dx;
    const auto ua = solve_hj(kQuadratic, a, g);
    const auto ub = solve_hj(kQuadratic, b, g);
    for (std::size_t k = 0; k < ua.values.size(); ++k) REQUIRE(ua.values[k] <= ub.values[k]);
  }
}

TEST_CASE("constant and translation invariance") {
  const auto g = dyadic_grid(129, 256, 32);
  std::vector<double> u0(g.nx);
  for (std::size_t j = 0; j < g.nx; ++j) u0[j] = std::ldexp(std::round(std::ldexp(std::sin(double(j) / 7) + double(j) / 64, 20)), -20);

  SUBCASE("adding a constant") {
    std::vector<double> shifted = u0;
    for (double& v : shifted) v += 8.0;
    const auto a = solve_hj(kTransport, u0, g);
    const auto b = solve_hj(kTransport, shifted, g);
    for (std::size_t k = 0; k < a.values.size(); ++k) REQUIRE(std::abs(b.values[k] - (a.values[k] + 8.0)) <= 1e-12);
  }
  SUBCASE("shifting by one cell") {
    std::vector<double> next(u0.begin() + 1, u0.end());
    next.push_back(2 * u0.back() - u0[u0.size() - 2]);
    const auto a = solve_hj(kQuadratic, u0, g);
    const auto b = solve_hj(kQuadratic, next, g);
    for (std::size_t n = 0; n < a.nt; ++n)
      for (std::size_t j = 0; j + 1 < a.nx; ++j) REQUIRE(b(j, n) == a(j + 1, n));
  }
  SUBCASE("threads do not change results") {
    HjGrid big = g;
    big.nx = 4096;
    std::vector<double> w(big.nx);
    for (std::size_t j = 0; j < big.nx; ++j) w[j] = double(j) * big.dx + 0.1 * std::sin(double(j) / 13);
    const auto a = solve_hj(kQuadratic, w, big, {1, {}});
    const auto b = solve_hj(kQuadratic, w, big, {4, {}});
    CHECK(a.values == b.values);
  }
}

TEST_CASE("Lipschitz constants do not grow") {
  const auto g = dyadic_grid(300, 800, 40);
  const auto u = solve_hj(kQuadratic, [](double x) { return x + 0.3 * std::sin(5 * x); }, g, {1, 2.5});
  const double lip0 = u.slice_lipschitz(0);
  for (std::size_t n = 1; n < u.nt; ++n) CHECK(u.slice_lipschitz(n) <= lip0 * (1 + 1e-12));
}

TEST_CASE("error reporting") {
  auto g = dyadic_grid(65, 10);
  g.dt = 0.5;
  CHECK_THROWS_AS(solve_hj(kQuadratic, [](double x) { return x; }, g), ConfigError);
  g = dyadic_grid(65, 10, 3);
  CHECK_THROWS_AS(solve_hj(kQuadratic, [](double x) { return x; }, g), ConfigError);
  g = dyadic_grid(65, 10);
  CHECK_THROWS_AS(solve_hj(kQuadratic, [](double x) { return 5 * x; }, g, {1, 2.0}), ValidationError);
  CHECK_THROWS_AS(solve_hj(kQuadratic, [](double x) { return x > -1.5 ? NAN : x; }, g), ValidationError);

  const auto u = solve_hj(kQuadratic, [](double x) { return x; }, g);
  CHECK_THROWS_AS(sup_error(u, u, {10.0, 11.0, 0.0, 1.0}), ConfigError);
  CHECK_THROWS_AS(u.at(5.0, 0.0), RangeError);

  std::ostringstream os;
  write_field_csv(u, os);
  CHECK(os.str().rfind("t,x,u\n0,-2,-2\n", 0) == 0);
}

TEST_CASE("grid_for honours the CFL bound and storage times") {
  const auto g = grid_for(kQuadratic, -1.0, 5.0, 1e-3, 1.0, 0.1);
  CHECK(g.dt * 4.0 <= 0.9 * g.dx * (1 + 1e-12));
  CHECK(g.steps % g.stride == 0);
  CHECK(static_cast<double>(g.stride) * g.dt == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(g.x0 + static_cast<double>(g.nx - 1) * g.dx >= 5.0 - 1e-12);
  CHECK_THROWS_AS(grid_for(kQuadratic, -1.0, 5.0, 1e-3, 1.0, 0.3), ConfigError);
}
