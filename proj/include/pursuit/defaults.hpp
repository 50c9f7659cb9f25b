#pragma once

#include <vector>

// Every default used by the ready-made scenarios and the CLI lives here.
namespace pursuit::defaults {

// Time step as a fraction of the reaction time.
inline constexpr double dt_fraction = 1e-3;

// Scale parameters of a convergence study.
inline std::vector<double> epsilons() { return {0.1, 0.05, 0.025, 0.0125}; }

// Compact comparison region [x0, x1] x [t0, t1] of the rescaled field.
inline constexpr double region_x0 = -1.0;
inline constexpr double region_x1 = 1.0;
inline constexpr double region_t0 = 0.1;
inline constexpr double region_t1 = 1.0;

// Uniform tau' grid for the initial spacing condition.
inline constexpr int spacing_tau_points = 64;

// Sample grid used to audit a tabulated velocity law.
inline constexpr int velocity_audit_points = 4096;

// Grid used to certify the rho-function inequality.
inline constexpr int condrho_grid_points = 1025;

// Counter-example drift: evaluation time, window and scale parameters.
inline constexpr double drift_s = 1.0;
inline constexpr double drift_h = 0.5;
inline std::vector<double> drift_epsilons() { return {0.1, 0.01, 0.001}; }

// Stall detection: relative spread of the last three errors, and the floor
// they must exceed as a multiple of the micro quadrature tolerance.
inline constexpr double stall_relative_spread = 0.10;
inline constexpr double stall_floor_factor = 10.0;
inline constexpr double quadrature_tolerance = 1e-6;

// Final error a converging study must reach.
inline constexpr double convergence_tolerance = 1e-2;

}  // namespace pursuit::defaults
