#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pursuit/dde_engine.hpp"
#include "pursuit/defaults.hpp"
#include "pursuit/field_grid.hpp"
#include "pursuit/model.hpp"

namespace pursuit::homog {

inline Region default_region() {
  return {defaults::region_x0, defaults::region_x1, defaults::region_t0, defaults::region_t1};
}

// u^eps(i eps, s) = eps X_i(s / eps) at the drivers i eps inside the region
// and the rescaled times s_k = t0 + k ds (the last one clipped to t1).
struct EpsilonField {
  double epsilon = 0.0;
  long i_first = 0;
  long i_last = -1;
  std::vector<double> s;
  std::vector<double> values;  // values[k * (i_last - i_first + 1) + (i - i_first)]

  std::size_t drivers() const { return static_cast<std::size_t>(i_last - i_first + 1); }
  double at(long i, std::size_t k) const { return values[k * drivers() + static_cast<std::size_t>(i - i_first)]; }
};

// Throws ConfigError when the run stops before t1 / eps (the message names
// the micro time required) or a driver of the region is not stored.
EpsilonField rescale_field(const dde::TrajectorySet& ts, double epsilon, const Region& r, double ds);

// Floor rule: eps X_{floor(x / eps)}(s / eps), time interpolated.
double rescaled_value(const dde::TrajectorySet& ts, double epsilon, double x, double s);

// Macroscopic datum u0(x) of an initial family: L x for linear and
// alternating data, L x + a sin(2 pi x / period) for sine-perturbed data.
// Throws ConfigError for families without one.
double macro_initial(const model::InitialHistory& h, double x);

// Micro scenario at scale eps: embeds macroscopic data through s.scale,
// sets the horizon t1 / eps, adapts periodic closures (N = period / eps for
// sine-perturbed data) and cone ranges to the region.
model::Scenario scale_scenario(const model::Scenario& s, double epsilon, const Region& r);

// Monotone-scheme solution of the macroscopic equation on a grid wide enough
// that the region is untouched by the right edge up to t1.
FieldGrid solve_macro(const model::Scenario& s, const Region& r, double dx, std::size_t slices = 90);

enum class Verdict { converging, stalled, inconclusive };
std::string to_string(Verdict v);

struct StudyOptions {
  std::optional<double> dt;  // micro step override
  unsigned workers = 1;      // epsilons run concurrently when > 1
  double tolerance = defaults::convergence_tolerance;
};

struct ConvergenceRecord {
  Region region;
  std::vector<double> epsilons;
  std::vector<double> errors;
  Verdict verdict = Verdict::inconclusive;
  std::optional<double> drift;  // counter-example mode only
};

// converging: every error below the quadrature tolerance, or strictly
// decreasing errors ending below `tolerance`. stalled: the last three errors
// agree pairwise within 10% and exceed 10x the quadrature tolerance.
Verdict classify(const std::vector<double>& errors, double tolerance = defaults::convergence_tolerance);

// For each eps: integrate the scaled micro system, rescale, and take the sup
// error against `macro` at the grid points (i eps, s) of the region, s on the
// macro slices. Throws ConfigError for fewer than 3 or non-decreasing eps.
ConvergenceRecord convergence_study(const model::Scenario& s, const FieldGrid& macro, const Region& r,
                                    StudyOptions opts = {});

// eps (X_0((s+h)/eps) - X_0(s/eps)) / h for the oscillating quadratic case.
// Throws ConfigError for other laws or data, DomainError for s, h <= 0.
double counterexample_drift(const model::Scenario& s, double epsilon, double s_time, double h,
                            std::optional<double> dt = std::nullopt);

// The same quotient for the macroscopic solution from linear data, on an
// exact dyadic grid. Throws ConfigError when s or h is not on that grid.
double macro_drift(const model::Scenario& s, double s_time, double h);

// Closed-form gap of the oscillating solution. Throws DomainError unless
// tau = pi / (4 alpha), or for t < 0.
double oscillation_oracle(const model::QuadraticLaw& p, double A, double tau, long i, double t);

struct DriftRow {
  double epsilon, s, h, quotient;
};

void write_convergence_csv(const ConvergenceRecord& rec, std::ostream& out);
void write_drift_csv(const std::vector<DriftRow>& rows, std::ostream& out);
nlohmann::ordered_json record_json(const ConvergenceRecord& rec);

}  // namespace pursuit::homog
