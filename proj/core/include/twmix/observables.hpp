#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

namespace twmix {

// Mean occupations of the four wave-mixing modes. Labels: a/b are the two
// internal states, L/R the two momentum classes (0 and the recoil k0), so
// aL and bR are the pumps, aR and bL the seeded/amplified pair.
struct ModePopulations {
  double aL = 0, bL = 0, aR = 0, bR = 0;
  double total() const { return aL + bL + aR + bR; }
};

// Number-difference variance v for the six mode pairings, same order always:
// (aR,bL) (aL,bR) (aL,bL) (aR,bR) (aL,aR) (bL,bR).
inline constexpr std::array<const char*, 6> kPairNames = {
    "aR_bL", "aL_bR", "aL_bL", "aR_bR", "aL_aR", "bL_bR"};

struct PairVariances {
  std::array<double, 6> v{};
  double aR_bL() const { return v[0]; }
  double aL_bR() const { return v[1]; }
};

struct ScanPoint {
  double t = 0;    // evolution time, s
  double tau = 0;  // dimensionless gain N_t * chi * t
  ModePopulations mean_n;
  PairVariances pairs;
  // Optional per-point ensemble-mean densities (multimode scans only),
  // vacuum floor removed; empty otherwise.
  std::vector<double> density_a, density_b;
};

// Second-moment summary of the two fields over one spatial region:
//   A = sum |psi_a|^2 dx, B = sum |psi_b|^2 dx, C = sum psi_a conj(psi_b) dx.
// Mode-mixing pulses act on it as G -> U G U^dagger, so interferometry on a
// stored ensemble needs only these four reals per side per trajectory.
// `modes` counts the grid modes in the region (1 for single-mode models);
// occupation estimates subtract half a quantum per mode.
struct SideGram {
  double A = 0, B = 0;
  std::complex<double> C{0, 0};
  std::size_t modes = 1;

  double pop_a() const { return A - 0.5 * static_cast<double>(modes); }
  double pop_b() const { return B - 0.5 * static_cast<double>(modes); }
};

}
