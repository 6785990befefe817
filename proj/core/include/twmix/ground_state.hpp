#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "twmix/grid.hpp"

namespace twmix {

struct Trap1D {
  double omega = 2.0 * 3.14159265358979323846 * 5.0;  // rad/s
  double mass = 1.4431609e-25;                        // kg
};

// Normalized (sum psi^2 dx = 1) single-particle harmonic ground state.
std::vector<double> harmonic_ground_state(const Grid1D& g, const Trap1D& trap);

// Thomas-Fermi chemical potential and profile for total coupling g = N * u1d.
double thomas_fermi_mu(const Trap1D& trap, double g_total);
std::vector<double> thomas_fermi_profile(const Grid1D& g, const Trap1D& trap, double g_total);

struct GroundStateResult {
  std::vector<double> psi;  // normalized to sum psi^2 dx = 1
  double mu = 0;            // J
  double energy = 0;        // J, per particle
  std::size_t iterations = 0;
};

// Imaginary-time split-step relaxation of the 1D mean-field equation with
// total coupling g_total = N * u1d (J m). Starts from the Thomas-Fermi
// profile (or the harmonic ground state when g_total is small/zero).
// Converged when the relative energy change per step drops below tol.
GroundStateResult solve_ground_state(const Grid1D& g, const Trap1D& trap, double g_total,
                                     double dtau = 2e-6, double tol = 1e-10,
                                     std::size_t max_iter = 200000);

// sum psi^4 dx for a normalized real profile (units 1/m).
double quartic_integral(const Grid1D& g, std::span<const double> psi);

// Per-particle-pair interaction rate chi = u1d * sum psi^4 dx / hbar.
double chi_from_profile(const Grid1D& g, std::span<const double> psi, double u1d);

// 1D coupling from 3D scattering length via transverse area: u1d = u0 / (pi r_perp^2).
double u1d_from_scattering(double a_s, double r_perp, double mass);

struct InteractionCalibration {
  double u1d = 0;  // J m
  double chi = 0;  // 1/s
  GroundStateResult ground;
};

// Finds u1d such that n_total * chi(u1d) matches the target rate, where the
// profile itself depends on u1d (fixed point, converged to ~1e-10 relative).
// When interacting is false the profile is the bare harmonic ground state
// and the solve is direct.
InteractionCalibration calibrate_interaction(const Grid1D& g, const Trap1D& trap,
                                             double n_total, double nt_chi_target,
                                             bool interacting = true);

}
