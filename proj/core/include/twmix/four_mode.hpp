#pragma once

#include <complex>
#include <span>
#include <vector>

#include "twmix/ensemble.hpp"
#include "twmix/observables.hpp"
#include "twmix/rng.hpp"

namespace twmix {

// Single-mode-per-component model of the mixing process: two pump modes
// (aL, bR) feed the amplified pair (aR, bL) through a chi * a b^+ a^+ b type
// quartic coupling, all modes sharing one spatial profile.
struct FourModeParams {
  double chi = 0.134;  // per-particle interaction rate, 1/s
  double n_aL = 1e5;   // mean input occupations
  double n_bL = 1e3;
  double n_aR = 1e3;
  double n_bR = 1e5;
  double phase_aR = 0;  // seed phases, rad
  double phase_bL = 0;
  double omega_0 = 0;  // residual single-particle detunings, rad/s; the
  double omega_k = 0;  // resonant part of the coupling cancels them exactly
  double dt = 1e-7;    // integrator step, s

  double n_total() const { return n_aL + n_bL + n_aR + n_bR; }
};

struct FourModeState {
  std::complex<double> aL, bL, aR, bR;
  double total_mod2() const;
};

FourModeState sample_four_mode(const FourModeParams& p, RngStream& rng);

// Fixed-step RK4 for the interaction-picture equations of motion. The
// requested duration is split into ceil(duration / p.dt) equal steps.
void evolve_four_mode(FourModeState& s, const FourModeParams& p, double duration);

// Exactly conserved bilinears of the flow (per trajectory): used as
// integrator diagnostics. Returns {|aL|^2+|aR|^2, |bL|^2+|bR|^2, |aR|^2+|bR|^2}.
std::array<double, 3> four_mode_invariants(const FourModeState& s);

// Undepleted-pump reference: mean pair occupation and number-difference
// variance of the amplified pair for gain parameter r, seed occupation n0.
double undepleted_pair_population(double n0, double r);
double undepleted_pair_variance(double n0, double r);

// Calibration product: chi such that n_total * chi equals the given rate.
double chi_from_calibration(double nt_chi, double n_total);

// Ensemble scan over a list of evolution times (ascending). Each trajectory
// is integrated incrementally through the whole list.
std::vector<ScanPoint> four_mode_scan(const FourModeParams& p,
                                      std::span<const double> times,
                                      const EnsembleOptions& opt);

}
