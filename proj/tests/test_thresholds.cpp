#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "pursuit/errors.hpp"
#include "pursuit/thresholds.hpp"

using namespace pursuit;
using namespace pursuit::thresholds;

TEST_CASE("threshold formulas") {
  CHECK(homogenization_threshold(1.0) == doctest::Approx(0.36787944117144233).epsilon(1e-15));
  CHECK(homogenization_threshold(4.0) == doctest::Approx(0.09196986029286058).epsilon(1e-15));
  CHECK(constant_rho_threshold(2.0) == 0.125);
  double prev = homogenization_threshold(0.5);
  for (double c = 1.0; c < 1e6; c *= 3) {
    const double t = homogenization_threshold(c);
    CHECK(t < prev);
    prev = t;
  }
  CHECK_THROWS_AS(homogenization_threshold(0.0), DomainError);
  CHECK_THROWS_AS(homogenization_threshold(-1.0), DomainError);
  CHECK_THROWS_AS(constant_rho_threshold(0.0), DomainError);
}

TEST_CASE("constant rho interval") {
  const auto iv = constant_rho_interval(0.2, 1.0);
  REQUIRE(iv);
  // roots of 0.2 x^2 - x + 1
  CHECK(iv->lo == doctest::Approx((1 - std::sqrt(0.2)) / 0.4).epsilon(1e-14));
  CHECK(iv->hi == doctest::Approx((1 + std::sqrt(0.2)) / 0.4).epsilon(1e-14));
  CHECK_FALSE(constant_rho_interval(0.25, 1.0));
  CHECK_FALSE(constant_rho_interval(0.3, 1.0));

  const RhoFunction ok{ConstantRho{2.0}, 0.2, 1.0};
  const auto c1 = verify_condrho(ok);
  CHECK(c1.holds);
  CHECK(c1.min_margin == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(c1.witness == doctest::Approx(0.2).epsilon(1e-15));

  const RhoFunction bad{ConstantRho{2.0}, 0.3, 1.0};
  const auto c2 = verify_condrho(bad);
  CHECK_FALSE(c2.holds);
  CHECK(c2.min_margin == doctest::Approx(-0.2).epsilon(1e-12));
  CHECK(c2.witness == doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("construct_rho reference values") {
  const auto rho = construct_rho(0.3, 1.0, 1.05);
  const auto& e = std::get<ExponentialRho>(rho.kind);
  CHECK(e.gamma0 == doctest::Approx(oracle::smallest_gamma_root(0.3, 1.0, 1.05)).epsilon(1e-13));
  CHECK(e.gamma0 == doctest::Approx(1.926170680101133).epsilon(1e-12));
  CHECK(rho(0.0) == doctest::Approx(1.05).epsilon(1e-15));
  // fixed point gamma0 = lambda exp(lambda gamma0 C_F tau)
  CHECK(std::abs(e.gamma0 - 1.05 * std::exp(1.05 * e.gamma0 * 0.3)) <= 1e-12);
  const auto cert = verify_condrho(rho);
  CHECK(cert.holds);
  CHECK(cert.min_margin > 0);

  CHECK_NOTHROW(construct_rho(0.36, 1.0, 1.01));
  CHECK_THROWS_AS(construct_rho(0.37, 1.0), InfeasibleError);
  CHECK_THROWS_AS(construct_rho(0.37, 1.0, 1.01), InfeasibleError);
  CHECK_THROWS_AS(construct_rho(0.3, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(construct_rho(0.3, 1.0, 1.2), DomainError);
  CHECK_THROWS_AS(construct_rho(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(construct_rho(0.1, -2.0), DomainError);
}

TEST_CASE("default lambda is the geometric midpoint") {
  const double tau = 0.1, cf = 2.0;
  const double up = std::sqrt(1.0 / (std::numbers::e * tau * cf));
  const auto rho = construct_rho(tau, cf);
  CHECK(std::get<ExponentialRho>(rho.kind).lambda == doctest::Approx(std::sqrt(up)).epsilon(1e-15));
}

TEST_CASE("verify_condrho grid and export") {
  const auto rho = construct_rho(0.3, 1.0, 1.05);
  CHECK_THROWS_AS(verify_condrho(rho, 15), ConfigError);
  CHECK_NOTHROW(verify_condrho(rho, 16));
  const auto j = certificate_json(rho, verify_condrho(rho));
  CHECK(j["kind"] == "exponential");
  CHECK(j["params"]["lambda"].get<double>() == 1.05);
  CHECK(j.contains("min_margin"));
  CHECK(j.contains("witness"));
  CHECK(j["tau"].get<double>() == 0.3);
}

TEST_CASE("iff property on random parameters") {
  std::mt19937_64 rng(20261019);
  std::uniform_real_distribution<double> logc(std::log(0.05), std::log(50.0));
  std::uniform_real_distribution<double> below(0.01, 0.99);
  std::uniform_real_distribution<double> above(1.0, 5.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const double cf = std::exp(logc(rng));
    const double tau = below(rng) / (std::numbers::e * cf);
    const double up = lambda_upper(tau, cf);
    bool any = false;
    for (int trial = 0; trial < 8 && !any; ++trial) {
      const double lam = 1.0 + (up - 1.0) * (0.05 + 0.9 * unit(rng));
      const auto rho = construct_rho(tau, cf, lam);
      const auto cert = verify_condrho(rho);
      any = cert.holds;
      // monotone on ordered pairs, rho(0) > 1
      CHECK(rho(0.0) > 1.0);
      for (int p = 0; p < 10; ++p) {
        double a = unit(rng) * tau, b = unit(rng) * tau;
        if (a > b) std::swap(a, b);
        CHECK(rho(a) <= rho(b));
      }
    }
    CHECK(any);
  }
  for (int k = 0; k < 100; ++k) {
    const double cf = std::exp(logc(rng));
    const double tau = above(rng) / (std::numbers::e * cf);
    for (double lam : {1.0001, 1.01, 1.5, 3.0}) CHECK_THROWS_AS(construct_rho(tau, cf, lam), InfeasibleError);
    CHECK_THROWS_AS(construct_rho(tau, cf), InfeasibleError);
  }
}

TEST_CASE("constant rho decisions match the discriminant") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> cfd(0.1, 10.0);
  std::uniform_real_distribution<double> td(0.0, 1.0);
  std::uniform_real_distribution<double> rd(0.5, 8.0);
  int feasible = 0;
  for (int k = 0; k < 200; ++k) {
    const double cf = cfd(rng);
    const double tau = td(rng) * 0.4 / cf + 1e-6;
    const double r = rd(rng);
    const bool got = verify_condrho(RhoFunction{ConstantRho{r}, tau, cf}).holds;
    CHECK(got == oracle::constant_rho_by_discriminant(tau, cf, r));
    feasible += got;
  }
  CHECK(feasible > 20);
}
