#pragma once

#include <array>
#include <complex>
#include <span>
#include <vector>

#include "twmix/ensemble.hpp"
#include "twmix/rng.hpp"

namespace twmix {

enum class InputStatistics { number_stabilized, poissonian };

// Twist-based comparison scheme: one source mode split 50/50, self-phase
// modulation shears the relative-phase distribution, two more couplers with
// tunable phases read out the squeezed quadrature.
struct OatParams {
  double n_total = 2e5;
  double chi = 0.134;        // self-interaction rate of component a, 1/s
  double asymmetry = 0.058;  // (chi_a - chi_b) / (chi_a + chi_b)
  double chi_cross = 0;      // cross-component rate, 1/s
  InputStatistics input = InputStatistics::number_stabilized;

  double chi_a() const { return chi; }
  double chi_b() const { return chi * (1.0 - asymmetry) / (1.0 + asymmetry); }
  // Shear rate: coefficient of the number-difference term in the relative
  // phase evolution.
  double chi_shear() const { return 0.5 * (chi_a() + chi_b()) - chi_cross; }
};

struct TwoMode {
  std::complex<double> a{0, 0}, b{0, 0};
};

// Mode a filled per the configured statistics, mode b vacuum.
TwoMode sample_oat_input(const OatParams& p, RngStream& rng);

// Self/cross phase modulation for time t, symmetric-ordering corrected.
void kerr_phase(TwoMode& s, const OatParams& p, double t);

// Per-trajectory vector k = (|a|^2, |b|^2, Re a conj(b), Im a conj(b)) after
// splitter + twist. Every later pulse is linear, so the readout signal is a
// fixed linear form in k: ensemble mean and covariance of k determine the
// signal statistics at any readout angles exactly.
struct TwistedMoments {
  std::array<double, 4> mean{};
  std::array<std::array<double, 4>, 4> cov{};
  std::size_t n_traj = 0;
};

TwistedMoments twisted_moments(const OatParams& p, double t_twist,
                               std::span<const TwoMode> inputs);
std::vector<TwoMode> sample_oat_inputs(const OatParams& p, const EnsembleOptions& opt);

// Population-difference statistics after phase(theta), coupler, phase(phi),
// coupler. var_s has the two-mode ordering floor removed; mean_total is the
// corrected total occupation.
struct ReadoutStats {
  double mean_s = 0, var_s = 0, mean_total = 0;
};
ReadoutStats readout_stats(const TwistedMoments& m, double theta, double phi);

// Sensitivity in shot-noise units at (theta, phi), slope from phi +- h.
double oat_delta_phi_sqrt_nt(const TwistedMoments& m, double theta, double phi, double h);

struct OatOperatingPoint {
  double t_twist = 0;  // s
  double twist = 0;    // dimensionless n_total * chi_shear * t
  double theta = 0, phi = 0;
  double delta_phi_sqrt_nt = 0;
};

// Grid + golden-section search over (twist, theta, phi), inputs shared
// across all candidate twists.
OatOperatingPoint optimize_oat(const OatParams& p, const EnsembleOptions& opt);

}
