#pragma once

// Random configurations for the strict comparison audit, shared by the unit
// tests and the acceptance run.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "pursuit/comparison.hpp"
#include "pursuit/dde_engine.hpp"
#include "pursuit/thresholds.hpp"

namespace cases {

struct ControlCase {
  pursuit::FieldGrid v;
  pursuit::FieldGrid u;
  pursuit::comparison::ComparisonWindow w;
};

inline pursuit::model::QuadraticLaw random_law(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  pursuit::model::QuadraticLaw p;
  p.k = 0.5 + 1.5 * U(rng);
  p.L_gap = 0.5 + 1.5 * U(rng);
  p.beta = 0.05 + 0.45 * U(rng);
  p.alpha = 4 * p.beta * p.L_gap * (1.2 + 1.8 * U(rng));
  return p;
}

// Drivers at rest on [-2 tau, 0], rows i L + noise_i with noise in
// [-0.35 L, 0.35 L], so every gap is at least 0.3 L.
inline pursuit::model::TableHistory resting_table(std::mt19937_64& rng, double L, double tau, long N, double lift = 0.0,
                                                  const std::vector<double>* base = nullptr,
                                                  std::vector<double>* noise_out = nullptr) {
  std::uniform_real_distribution<double> U(-0.35, 0.35);
  pursuit::model::TableHistory tab{{-2 * tau, 0.0}, 0, {}, 2 * L};
  std::vector<double> noise(static_cast<std::size_t>(N));
  for (long i = 0; i < N; ++i) noise[static_cast<std::size_t>(i)] = base ? (*base)[static_cast<std::size_t>(i)] : U(rng) * L;
  // Close the period: row N repeats row 0 shifted by N L.
  for (long i = 0; i <= 2 * N; ++i) {
    const double p = static_cast<double>(i) * L + noise[static_cast<std::size_t>(i % N)] + lift;
    tab.x.push_back({p, p});
  }
  if (noise_out) *noise_out = noise;
  return tab;
}

inline pursuit::model::Scenario resting_scenario(const pursuit::model::QuadraticLaw& law, double tau, long N,
                                                 pursuit::model::TableHistory tab, double T) {
  pursuit::model::Scenario s;
  s.velocity = {law};
  s.delay = {pursuit::model::ConstantDelay{tau}};
  s.initial = {std::move(tab), 2 * tau};
  s.truncation = pursuit::model::PeriodicTruncation{static_cast<std::size_t>(N), static_cast<double>(N) * law.L_gap};
  s.T = T;
  s.dt = tau / 200;
  return s;
}

// Even k: v = X_{i+1}, u = X_i of one periodic run, R infinite.
// Odd k: u and v are two runs whose data differ by a per-driver lift >= 0.2 L,
// audited on a finite window.
inline ControlCase positive_control(std::mt19937_64& rng, int k) {
  using namespace pursuit;
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const auto law = random_law(rng);
  const double C_F = model::lipschitz_data(model::VelocityProfile{law}).C_F;
  const double tau = (0.3 + 0.6 * U(rng)) / (std::numbers::e * C_F);
  const long N = 10;
  const double T = 10 * tau;
  const auto rho = thresholds::construct_rho(tau, C_F);

  ControlCase c;
  if (k % 2 == 0) {
    const auto ts = dde::integrate(resting_scenario(law, tau, N, resting_table(rng, law.L_gap, tau, N), T));
    c.u = comparison::micro_field(ts, 0, N - 1, -2 * tau, T);
    c.v = comparison::micro_field(ts, 0, N - 1, -2 * tau, T, 1);
  } else {
    std::vector<double> noise;
    auto lower = resting_table(rng, law.L_gap, tau, N, 0.0, nullptr, &noise);
    // Lift stays below the smallest gap so the upper run keeps its order.
    std::vector<double> lifted = noise;
    for (auto& x : lifted) x += (0.2 + 0.1 * U(rng)) * law.L_gap;
    auto upper = resting_table(rng, law.L_gap, tau, N, 0.0, &lifted);
    const auto a = dde::integrate(resting_scenario(law, tau, N, lower, T));
    const auto b = dde::integrate(resting_scenario(law, tau, N, upper, T));
    c.u = comparison::micro_field(a, 0, N - 1, -2 * tau, T);
    c.v = comparison::micro_field(b, 0, N - 1, -2 * tau, T);
  }
  double delta = INFINITY;
  for (std::size_t j = 0; j < c.v.nx; ++j) delta = std::min(delta, c.v(j, 0) - c.u(j, 0));
  c.w = {delta, 0.0, k % 2 == 0 ? INFINITY : 3.0, 4.0, T, rho};
  return c;
}

}  // namespace cases
