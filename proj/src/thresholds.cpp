#include "pursuit/thresholds.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "pursuit/errors.hpp"

namespace pursuit::thresholds {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0) || !std::isfinite(v)) {
    std::ostringstream os;
    os << name << " must be finite and > 0 (got " << v << ")";
    throw DomainError(os.str());
  }
}

}  // namespace

double RhoFunction::operator()(double s) const {
  if (const auto* c = std::get_if<ConstantRho>(&kind)) return c->value;
  const auto& e = std::get<ExponentialRho>(kind);
  return e.lambda * std::exp(e.lambda * e.gamma0 * C_F * s);
}

double RhoFunction::integral(double s) const {
  if (const auto* c = std::get_if<ConstantRho>(&kind)) return c->value * s;
  const auto& e = std::get<ExponentialRho>(kind);
  return std::expm1(e.lambda * e.gamma0 * C_F * s) / (e.gamma0 * C_F);
}

std::string RhoFunction::kind_name() const {
  return std::holds_alternative<ConstantRho>(kind) ? "constant" : "exponential";
}

double homogenization_threshold(double C_F) {
  require_positive(C_F, "C_F");
  return 1.0 / (std::numbers::e * C_F);
}

double constant_rho_threshold(double C_F) {
  require_positive(C_F, "C_F");
  return 1.0 / (4.0 * C_F);
}

std::optional<Interval> constant_rho_interval(double tau, double C_F) {
  require_positive(C_F, "C_F");
  require_positive(tau, "tau");
  const double a = C_F * tau;
  const double disc = 1.0 - 4.0 * a;
  if (disc <= 0) return std::nullopt;
  const double sq = std::sqrt(disc);
  // The small root in cancellation-free form.
  return Interval{2.0 / (1.0 + sq), (1.0 + sq) / (2.0 * a)};
}

double lambda_upper(double tau, double C_F) { return std::sqrt(1.0 / (std::numbers::e * tau * C_F)); }

double default_lambda(double tau, double C_F) { return std::sqrt(lambda_upper(tau, C_F)); }

double solve_gamma0(double tau, double C_F, double lambda) {
  const double rate = lambda * tau * C_F;
  const double target = std::log(lambda);
  auto h = [&](double g) { return std::log(g) - rate * g - target; };

  // h is increasing on (0, gamma_max]; h(lambda) = -lambda^2 tau C_F < 0.
  double lo = lambda;
  double hi = 1.0 / rate;
  if (!(h(hi) > 0))
    throw InfeasibleError("ln g - lambda g tau C_F = ln lambda has no root (h(gamma_max) <= ln lambda)");
  for (int it = 0; it < 400 && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (h(mid) < 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

RhoFunction construct_rho(double tau, double C_F, std::optional<double> lambda) {
  require_positive(tau, "tau");
  require_positive(C_F, "C_F");
  if (!(std::numbers::e * tau * C_F < 1.0)) {
    std::ostringstream os;
    os.precision(17);
    os << "no spacing function exists: tau=" << tau << " >= 1/(e C_F)=" << homogenization_threshold(C_F);
    throw InfeasibleError(os.str());
  }
  const double upper = lambda_upper(tau, C_F);
  const double lam = lambda.value_or(default_lambda(tau, C_F));
  if (!(lam > 1.0 && lam < upper)) {
    std::ostringstream os;
    os.precision(17);
    os << "lambda=" << lam << " outside (1, " << upper << ")";
    throw DomainError(os.str());
  }
  const double g0 = solve_gamma0(tau, C_F, lam);
  return RhoFunction{ExponentialRho{lam, g0}, tau, C_F};
}

Certificate verify_condrho(const RhoFunction& rho, std::size_t grid_points) {
  if (grid_points < 16) throw ConfigError("verify_condrho needs at least 16 grid points");
  const double rho_tau = rho(rho.tau);
  Certificate cert;
  cert.grid_points = grid_points;
  cert.min_margin = INFINITY;
  for (std::size_t k = 0; k < grid_points; ++k) {
    const double s = rho.tau * static_cast<double>(k) / static_cast<double>(grid_points - 1);
    const double margin = rho(s) - (1.0 + rho.C_F * rho_tau * rho.integral(s));
    if (margin < cert.min_margin) {
      cert.min_margin = margin;
      cert.witness = s;
    }
  }
  cert.holds = cert.min_margin > 0.0;
  return cert;
}

nlohmann::ordered_json certificate_json(const RhoFunction& rho, const Certificate& cert) {
  nlohmann::ordered_json j;
  j["tau"] = rho.tau;
  j["C_F"] = rho.C_F;
  j["kind"] = rho.kind_name();
  if (const auto* c = std::get_if<ConstantRho>(&rho.kind)) {
    j["params"] = {{"value", c->value}};
  } else {
    const auto& e = std::get<ExponentialRho>(rho.kind);
    j["params"] = {{"lambda", e.lambda}, {"gamma0", e.gamma0}};
  }
  j["holds"] = cert.holds;
  j["min_margin"] = cert.min_margin;
  j["witness"] = cert.witness;
  return j;
}

}  // namespace pursuit::thresholds
