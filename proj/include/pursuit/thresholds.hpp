#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>

#include <json.hpp>

#include "pursuit/defaults.hpp"

namespace pursuit::thresholds {

struct ConstantRho {
  double value = 2.0;
};

// rho(s) = lambda exp(lambda gamma0 C_F s), the derivative of
// U(s) = (exp(lambda gamma0 C_F s) - 1) / (gamma0 C_F).
struct ExponentialRho {
  double lambda = 1.0;
  double gamma0 = 1.0;
};

// Spacing function on [0, tau] for a law with Lipschitz constant C_F.
struct RhoFunction {
  std::variant<ConstantRho, ExponentialRho> kind;
  double tau = 0.0;
  double C_F = 0.0;

  double operator()(double s) const;
  // Integral of rho over [0, s], closed form for both kinds.
  double integral(double s) const;
  std::string kind_name() const;
};

// 1 / (e C_F): spacing functions exist iff tau is below it.
double homogenization_threshold(double C_F);

// 1 / (4 C_F): constant spacing functions exist iff tau is below it.
double constant_rho_threshold(double C_F);

// Open interval of admissible constants, the roots of C_F tau x^2 - x + 1.
// Empty when tau >= 1 / (4 C_F).
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};
std::optional<Interval> constant_rho_interval(double tau, double C_F);

// Open range (1, sqrt(1 / (e tau C_F))) of admissible lambda and its
// geometric midpoint.
double lambda_upper(double tau, double C_F);
double default_lambda(double tau, double C_F);

// Smallest positive root of ln g - lambda g tau C_F = ln lambda, by
// bisection on [lambda, 1 / (lambda tau C_F)].
double solve_gamma0(double tau, double C_F, double lambda);

// Exponential spacing function for tau < 1/(e C_F). Throws InfeasibleError
// at or above the threshold and DomainError for lambda outside its range or
// non-positive inputs.
RhoFunction construct_rho(double tau, double C_F, std::optional<double> lambda = std::nullopt);

struct Certificate {
  bool holds = false;
  double min_margin = 0.0;  // min over the grid of rho(s) - 1 - C_F rho(tau) int_0^s rho
  double witness = 0.0;     // s where the minimum occurs
  std::size_t grid_points = 0;
};

// Checks 1 + C_F rho(tau) int_0^s rho < rho(s) on a uniform grid of [0, tau].
// Strict: the computed margin must be > 0. Throws ConfigError below 16 points.
Certificate verify_condrho(const RhoFunction& rho, std::size_t grid_points = defaults::condrho_grid_points);

// {tau, C_F, kind, params, min_margin, witness}
nlohmann::ordered_json certificate_json(const RhoFunction& rho, const Certificate& cert);

}  // namespace pursuit::thresholds
