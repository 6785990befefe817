#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "twmix/ensemble.hpp"
#include "twmix/four_mode.hpp"
#include "twmix/observables.hpp"

namespace twmix {

// 2x2 mode-mixing matrix acting on (a, b).
struct Mat2 {
  std::complex<double> m00{1, 0}, m01{0, 0}, m10{0, 0}, m11{1, 0};

  // Symmetric 50/50 coupler: a' = (a - i b)/sqrt(2), b' = (b - i a)/sqrt(2).
  static Mat2 beam_splitter();
  // Phase phi applied to the b component.
  static Mat2 phase_on_b(double phi);

  Mat2 operator*(const Mat2& rhs) const;
};

SideGram transform(const SideGram& g, const Mat2& u);
void transform_all(std::span<SideGram> grams, const Mat2& u);

// Readout ensemble at a fixed preparation time, one Gram pair per
// trajectory, ready for pulse sequences.
struct PreparedEnsemble {
  std::vector<SideGram> left, right;  // slot i = trajectory i
  std::size_t modes_left = 1, modes_right = 1;
  double mean_total = 0;  // corrected mean total occupation
};

// Single-mode-model preparation: evolve, then wrap each trajectory's four
// amplitudes as rank-one Grams (aL,bL | aR,bR). The optional sink receives
// each trajectory's raw state.
using StateSink = std::function<void(std::size_t, const FourModeState&)>;
PreparedEnsemble prepare_four_mode(const FourModeParams& p, double t_mix,
                                   const EnsembleOptions& opt,
                                   const StateSink& sink = {});

// Mixing pulses applied per side before the interrogation pulse. phi0 nulls
// the mean imbalance after the first coupler, phi1 after the second.
struct PulsePhases {
  double phi0_left = 0, phi0_right = 0;
  double phi1_left = 0, phi1_right = 0;
};

struct BalanceResult {
  double phi = 0;
  bool flat = false;  // objective had no structure (already balanced input)
};

// Phase that nulls <N_a - N_b> after phase_on_b(phi) followed by a
// coupler, acting on the ensemble-mean Gram. Of the two zero crossings it
// always picks the one with Re(C e^{-i phi}) > 0, so the two sides of the
// interferometer end up on mirror-image working points instead of an
// arbitrary pairing of fringe branches.
BalanceResult balance_phase(const SideGram& mean_gram);

// Balances both sides through the first two couplers, placing the two sides'
// second-pulse working points a half turn apart so the differential readout
// sits on the squeezed quadrature (see balance_pulses in the source).
PulsePhases balance_pulses(const PreparedEnsemble& e);

// Ensemble after phase(phi0), coupler, phase(phi1), coupler, per side.
struct StagedEnsemble {
  std::vector<SideGram> left, right;
  std::size_t modes_left = 1, modes_right = 1;
  double mean_total = 0;
};
StagedEnsemble apply_preparation_pulses(const PreparedEnsemble& e, const PulsePhases& ph);

struct SweepOptions {
  std::size_t n_phi = 64;    // uniform interrogation grid on [0, 2pi)
  bool differential = true;  // add pi to the right side's interrogation phase
};

struct SweepPoint {
  double phi2 = 0;
  double mean_s = 0;
  double var_s = 0;  // ordering floor removed
  double var_s_over_nt = 0;
  double delta_phi_sqrt_nt = 0;  // phase sensitivity in shot-noise units
  ModePopulations mean_n;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  PulsePhases pulses;
  double mean_total = 0;
  double min_delta_phi_sqrt_nt = 0;
  double phi2_at_min = 0;
  // Fringe contrast of <N_aL>(phi2) and of the combined signal <S>(phi2).
  double visibility_population = 0;
  double visibility_signal = 0;
};

// Full sequence: balance, apply preparation pulses, then sweep the
// interrogation phase. S = (N_aL - N_bL) - (N_bR - N_aR); the sensitivity is
// sqrt(Var S) / |d<S>/dphi2| with the slope from periodic central
// differences, reported as delta_phi * sqrt(N_t).
SweepResult sensitivity_sweep(const PreparedEnsemble& e, const SweepOptions& opt);

// Sensitivity at a frozen working point (no re-balancing, no re-optimizing):
// slope from a symmetric pair phi2 +- h around the frozen phase.
struct WorkingPoint {
  PulsePhases pulses;
  double phi2 = 0;
  bool differential = true;
};
double delta_phi_sqrt_nt_at(const PreparedEnsemble& e, const WorkingPoint& wp,
                            double h = 0.0245436926061703);  // 2 pi / 256

}
