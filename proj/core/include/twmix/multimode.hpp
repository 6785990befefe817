#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "twmix/ensemble.hpp"
#include "twmix/grid.hpp"
#include "twmix/interferometer.hpp"
#include "twmix/observables.hpp"
#include "twmix/rng.hpp"

namespace twmix {

using cplx = std::complex<double>;

struct FieldPair {
  std::vector<cplx> a, b;
};

struct MultimodeParams {
  Grid1D grid;
  double x_split = 0.4e-3;          // boundary between L and R readout regions, m
  double k0 = 16110731.55687293;    // two-photon recoil 4 pi / 780 nm, rad/m
  double mass = 1.4431609e-25;      // kg
  double dt = 2e-7;                 // split-step time step, s
  double u1d = 0;                   // 1D coupling, J m
  std::vector<double> psi0;         // normalized shared spatial profile
  double n_aL = 1e5, n_bL = 1e3, n_aR = 1e3, n_bR = 1e5;
  double phase_aR = 0, phase_bL = 0;  // seed phases, rad
  double separation_time = 70e-3;     // free flight before readout, s

  double n_total() const { return n_aL + n_bL + n_aR + n_bR; }
};

// Both fields share the profile; the R components ride on exp(i k0 x).
// Each grid point gets an independent half-quantum vacuum sample per field,
// scaled by 1/sqrt(dx) (field normalization). Point order: a then b at each i.
FieldPair sample_multimode(const MultimodeParams& p, RngStream& rng);

// Strang-split evolution under kinetic + trap-free local interaction
// u1d * (n_a + n_b - vacuum floor), both fields phase-shifted identically.
// Consecutive kinetic half-steps are merged internally.
void evolve_multimode(FieldPair& f, const MultimodeParams& p, double duration);

// One-shot spectral free flight (kinetic only). Checks that no occupied band
// sits close enough to the grid edge to wrap around during the flight;
// throws NumericalError if it would.
void free_propagate(FieldPair& f, const MultimodeParams& p, double duration);

// Occupations of the four readout modes: L is x < x_split, R the rest, with
// the half-quantum-per-grid-mode floor removed.
struct RegionSplit {
  std::size_t n_left = 0, n_right = 0;
};
RegionSplit region_split(const MultimodeParams& p);
ModePopulations region_populations(const FieldPair& f, const MultimodeParams& p);

// Gram summaries of the two regions, for interferometry.
std::pair<SideGram, SideGram> side_grams(const FieldPair& f, const MultimodeParams& p);

// Modal occupation spectrum |c_k|^2 dx / n (mean 1/2 for vacuum), FFT order.
std::vector<double> mode_occupations(std::span<const cplx> field, const Grid1D& g);

struct MultimodeScanOptions {
  std::vector<double> times;     // ascending mixing times, s
  bool with_separation = true;   // free flight before each readout
  bool record_density = false;   // accumulate post-flight mean densities
};

// Incremental ensemble scan: each trajectory is evolved once through the
// whole time list, with a separated copy read out at every point.
std::vector<ScanPoint> multimode_scan(const MultimodeParams& p,
                                      const MultimodeScanOptions& scan,
                                      const EnsembleOptions& opt);

// Per-trajectory readout ensemble at a single mixing time, ready for pulse
// sequences. The optional sink receives each trajectory's separated fields
// (called under a lock, in arbitrary order).
using FieldSink = std::function<void(std::size_t, const FieldPair&)>;

PreparedEnsemble prepare_multimode(const MultimodeParams& p, double t_mix,
                                   const EnsembleOptions& opt,
                                   const FieldSink& sink = {});

}
