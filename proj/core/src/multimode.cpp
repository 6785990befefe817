#include "twmix/multimode.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "twmix/constants.hpp"
#include "twmix/errors.hpp"
#include "twmix/fft.hpp"
#include "twmix/ground_state.hpp"
#include "twmix/statistics.hpp"

namespace twmix {

namespace {

inline cplx unit_phase(double ph) {
#if defined(__GNUC__) && defined(__linux__)
  double s, c;
  ::sincos(ph, &s, &c);
  return {c, s};
#else
  return {std::cos(ph), std::sin(ph)};
#endif
}

void check_finite(const FieldPair& f, const char* what) {
  for (const auto& v : f.a)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw NumericalError(std::string(what) + ": non-finite field values");
  for (const auto& v : f.b)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw NumericalError(std::string(what) + ": non-finite field values");
}

}  // namespace

FieldPair sample_multimode(const MultimodeParams& p, RngStream& rng) {
  const Grid1D& g = p.grid;
  const double inv_sqrt_dx = 1.0 / std::sqrt(g.dx());
  const double ra_l = std::sqrt(p.n_aL);
  const double rb_r = std::sqrt(p.n_bR);
  const cplx seed_a = std::polar(std::sqrt(p.n_aR), p.phase_aR);
  const cplx seed_b = std::polar(std::sqrt(p.n_bL), p.phase_bL);

  FieldPair f;
  f.a.resize(g.n);
  f.b.resize(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    const cplx recoil = unit_phase(p.k0 * g.x(i));
    const double base = p.psi0[i];
    f.a[i] = (ra_l + seed_a * recoil) * base + rng.complex_normal(0.5) * inv_sqrt_dx;
    f.b[i] = (seed_b + rb_r * recoil) * base + rng.complex_normal(0.5) * inv_sqrt_dx;
  }
  return f;
}

void evolve_multimode(FieldPair& f, const MultimodeParams& p, double duration) {
  if (duration < 0) throw NumericalError("negative evolution time");
  if (duration == 0) return;
  if (!(p.dt > 0)) throw ConfigError("split-step time must be positive");

  const Grid1D& g = p.grid;
  const std::size_t n = g.n;
  const auto n_steps = static_cast<std::size_t>(std::ceil(duration / p.dt));
  const double h = duration / static_cast<double>(n_steps);

  Fft1D fft(n);
  std::vector<cplx> kin_half(n), kin_full(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double k = g.k(i);
    const double w = kHbar * k * k / (2.0 * p.mass);  // kinetic rate, rad/s
    kin_half[i] = unit_phase(-0.5 * w * h);
    kin_full[i] = unit_phase(-w * h);
  }

  const auto kinetic = [&](const std::vector<cplx>& phase) {
    fft.forward(f.a.data());
    fft.forward(f.b.data());
    for (std::size_t i = 0; i < n; ++i) {
      f.a[i] *= phase[i];
      f.b[i] *= phase[i];
    }
    fft.inverse(f.a.data());
    fft.inverse(f.b.data());
  };

  // Local phase from the total density; both fields see the same factor.
  // The symmetric-ordering floor (half a quantum per field per point) is
  // removed from the density before it drives the phase.
  const double floor = 1.0 / g.dx();
  const double rate = p.u1d * h / kHbar;
  const auto nonlinear = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      const double nt = std::norm(f.a[i]) + std::norm(f.b[i]) - floor;
      const cplx c = unit_phase(-rate * nt);
      f.a[i] *= c;
      f.b[i] *= c;
    }
  };

  // Strang splitting with interior half-steps merged.
  kinetic(kin_half);
  for (std::size_t s = 0; s + 1 < n_steps; ++s) {
    nonlinear();
    kinetic(kin_full);
  }
  nonlinear();
  kinetic(kin_half);

  check_finite(f, "mixing evolution");
}

void free_propagate(FieldPair& f, const MultimodeParams& p, double duration) {
  if (duration < 0) throw NumericalError("negative flight time");
  if (duration == 0) return;

  const Grid1D& g = p.grid;
  const std::size_t n = g.n;
  Fft1D fft(n);
  fft.forward(f.a.data());
  fft.forward(f.b.data());

  // Spectral guard. Occupations with the vacuum floor removed, smoothed over
  // five neighboring modes (circular: the two grid edges are adjacent in k).
  const double spec_w = g.dx() / static_cast<double>(n);
  std::vector<double> occ(n);
  for (std::size_t i = 0; i < n; ++i)
    occ[i] = (std::norm(f.a[i]) + std::norm(f.b[i])) * spec_w - 1.0;
  std::vector<double> smooth(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0;
    for (int d = -2; d <= 2; ++d) s += occ[(i + n + static_cast<std::size_t>(d + 2) - 2) % n];
    smooth[i] = s / 5.0;
  }
  double peak = 0;
  for (const double v : smooth) peak = std::max(peak, v);
  // Smoothed vacuum occupancy fluctuates around zero with spread ~0.3, so a
  // band only counts as occupied once it is far outside that noise.
  const double thresh = std::max(1e-6 * peak, 4.0);
  double k_occupied = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (smooth[i] <= thresh) continue;
    k_occupied = std::max(k_occupied, std::abs(g.k(i)));
  }
  // The flight itself is exact per mode; the only failure mode is an occupied
  // band translating past the box length and wrapping into the readout.
  if (kHbar * k_occupied * duration / p.mass > g.length)
    throw NumericalError("free flight: fastest occupied band would wrap around the grid");

  for (std::size_t i = 0; i < n; ++i) {
    const double k = g.k(i);
    const cplx ph = unit_phase(-kHbar * k * k * duration / (2.0 * p.mass));
    f.a[i] *= ph;
    f.b[i] *= ph;
  }
  fft.inverse(f.a.data());
  fft.inverse(f.b.data());
}

RegionSplit region_split(const MultimodeParams& p) {
  RegionSplit r;
  for (std::size_t i = 0; i < p.grid.n; ++i)
    if (p.grid.x(i) < p.x_split) ++r.n_left;
  r.n_right = p.grid.n - r.n_left;
  if (r.n_left == 0 || r.n_right == 0)
    throw ConfigError("readout split must cut the grid into two nonempty regions");
  return r;
}

ModePopulations region_populations(const FieldPair& f, const MultimodeParams& p) {
  const auto [gl, gr] = side_grams(f, p);
  return {gl.pop_a(), gl.pop_b(), gr.pop_a(), gr.pop_b()};
}

std::pair<SideGram, SideGram> side_grams(const FieldPair& f, const MultimodeParams& p) {
  const Grid1D& g = p.grid;
  const RegionSplit split = region_split(p);

  // 4 partial streams per region, reduced pairwise for determinism.
  std::vector<double> la(split.n_left), lb(split.n_left), lcr(split.n_left), lci(split.n_left);
  std::vector<double> ra(split.n_right), rb(split.n_right), rcr(split.n_right), rci(split.n_right);
  std::size_t il = 0, ir = 0;
  for (std::size_t i = 0; i < g.n; ++i) {
    const cplx a = f.a[i], b = f.b[i];
    const cplx cross = a * std::conj(b);
    if (g.x(i) < p.x_split) {
      la[il] = std::norm(a);
      lb[il] = std::norm(b);
      lcr[il] = cross.real();
      lci[il] = cross.imag();
      ++il;
    } else {
      ra[ir] = std::norm(a);
      rb[ir] = std::norm(b);
      rcr[ir] = cross.real();
      rci[ir] = cross.imag();
      ++ir;
    }
  }
  const double dx = g.dx();
  SideGram left{pairwise_sum(la) * dx, pairwise_sum(lb) * dx,
                {pairwise_sum(lcr) * dx, pairwise_sum(lci) * dx}, split.n_left};
  SideGram right{pairwise_sum(ra) * dx, pairwise_sum(rb) * dx,
                 {pairwise_sum(rcr) * dx, pairwise_sum(rci) * dx}, split.n_right};
  return {left, right};
}

std::vector<double> mode_occupations(std::span<const cplx> field, const Grid1D& g) {
  if (field.size() != g.n) throw NumericalError("field/grid size mismatch");
  std::vector<cplx> c(field.begin(), field.end());
  Fft1D fft(g.n);
  fft.forward(c.data());
  const double spec_w = g.dx() / static_cast<double>(g.n);
  std::vector<double> occ(g.n);
  for (std::size_t i = 0; i < g.n; ++i) occ[i] = std::norm(c[i]) * spec_w;
  return occ;
}

namespace {

// Shared reduction: per-trajectory corrected region occupations -> means and
// the six pairwise number-difference variances.
void reduce_scan_point(const std::vector<double>& store, std::size_t j,
                       std::size_t n_traj, const RegionSplit& split, ScanPoint& pt) {
  std::vector<double> cols[4];
  for (auto& c : cols) c.resize(n_traj);
  for (std::size_t i = 0; i < n_traj; ++i)
    for (int m = 0; m < 4; ++m) cols[m][i] = store[(j * n_traj + i) * 4 + m];
  pt.mean_n = {mean(cols[0]), mean(cols[1]), mean(cols[2]), mean(cols[3])};
  const std::size_t nl = split.n_left, nr = split.n_right;
  pt.pairs.v[0] = number_difference_variance(cols[2], cols[1], nr, nl);
  pt.pairs.v[1] = number_difference_variance(cols[0], cols[3], nl, nr);
  pt.pairs.v[2] = number_difference_variance(cols[0], cols[1], nl, nl);
  pt.pairs.v[3] = number_difference_variance(cols[2], cols[3], nr, nr);
  pt.pairs.v[4] = number_difference_variance(cols[0], cols[2], nl, nr);
  pt.pairs.v[5] = number_difference_variance(cols[1], cols[3], nl, nr);
}

}  // namespace

std::vector<ScanPoint> multimode_scan(const MultimodeParams& p,
                                      const MultimodeScanOptions& scan,
                                      const EnsembleOptions& opt) {
  const std::size_t n_times = scan.times.size();
  if (n_times == 0) return {};
  for (std::size_t j = 0; j + 1 < n_times; ++j)
    if (scan.times[j + 1] < scan.times[j]) throw ConfigError("scan times must be ascending");
  if (scan.times[0] < 0) throw ConfigError("scan times must be nonnegative");
  if (opt.n_traj < 2) throw ConfigError("scan needs at least two trajectories");
  if (p.psi0.size() != p.grid.n) throw ConfigError("profile/grid size mismatch");

  const RegionSplit split = region_split(p);
  const std::size_t n = p.grid.n;

  std::vector<double> store(n_times * opt.n_traj * 4);
  // Densities are accumulated per chunk, then merged in chunk order.
  const std::size_t n_chunks = opt.n_chunks();
  std::vector<double> dens;
  if (scan.record_density) dens.assign(n_chunks * n_times * 2 * n, 0.0);

  for_each_trajectory(opt, [&](std::size_t i, RngStream& rng) {
    FieldPair f = sample_multimode(p, rng);
    double t_prev = 0;
    for (std::size_t j = 0; j < n_times; ++j) {
      evolve_multimode(f, p, scan.times[j] - t_prev);
      t_prev = scan.times[j];
      FieldPair sep = f;
      if (scan.with_separation) free_propagate(sep, p, p.separation_time);
      const ModePopulations pops = region_populations(sep, p);
      double* slot = &store[(j * opt.n_traj + i) * 4];
      slot[0] = pops.aL;
      slot[1] = pops.bL;
      slot[2] = pops.aR;
      slot[3] = pops.bR;
      if (scan.record_density) {
        double* da = &dens[((opt.chunk_of(i) * n_times + j) * 2 + 0) * n];
        double* db = &dens[((opt.chunk_of(i) * n_times + j) * 2 + 1) * n];
        for (std::size_t q = 0; q < n; ++q) {
          da[q] += std::norm(sep.a[q]);
          db[q] += std::norm(sep.b[q]);
        }
      }
    }
  });

  const double chi = chi_from_profile(p.grid, p.psi0, p.u1d);
  std::vector<ScanPoint> result(n_times);
  for (std::size_t j = 0; j < n_times; ++j) {
    ScanPoint& pt = result[j];
    pt.t = scan.times[j];
    pt.tau = chi * p.n_total() * scan.times[j];
    reduce_scan_point(store, j, opt.n_traj, split, pt);
    if (scan.record_density) {
      pt.density_a.assign(n, 0.0);
      pt.density_b.assign(n, 0.0);
      for (std::size_t c = 0; c < n_chunks; ++c) {
        const double* da = &dens[((c * n_times + j) * 2 + 0) * n];
        const double* db = &dens[((c * n_times + j) * 2 + 1) * n];
        for (std::size_t q = 0; q < n; ++q) {
          pt.density_a[q] += da[q];
          pt.density_b[q] += db[q];
        }
      }
      const double inv_traj = 1.0 / static_cast<double>(opt.n_traj);
      const double vac = 0.5 / p.grid.dx();
      for (std::size_t q = 0; q < n; ++q) {
        pt.density_a[q] = pt.density_a[q] * inv_traj - vac;
        pt.density_b[q] = pt.density_b[q] * inv_traj - vac;
      }
    }
  }
  return result;
}

PreparedEnsemble prepare_multimode(const MultimodeParams& p, double t_mix,
                                   const EnsembleOptions& opt, const FieldSink& sink) {
  if (opt.n_traj < 2) throw ConfigError("ensemble needs at least two trajectories");
  if (p.psi0.size() != p.grid.n) throw ConfigError("profile/grid size mismatch");
  const RegionSplit split = region_split(p);

  PreparedEnsemble e;
  e.left.resize(opt.n_traj);
  e.right.resize(opt.n_traj);
  e.modes_left = split.n_left;
  e.modes_right = split.n_right;

  std::mutex sink_mutex;
  for_each_trajectory(opt, [&](std::size_t i, RngStream& rng) {
    FieldPair f = sample_multimode(p, rng);
    evolve_multimode(f, p, t_mix);
    free_propagate(f, p, p.separation_time);
    const auto [gl, gr] = side_grams(f, p);
    e.left[i] = gl;
    e.right[i] = gr;
    if (sink) {
      std::lock_guard lock(sink_mutex);
      sink(i, f);
    }
  });

  std::vector<double> totals(opt.n_traj);
  for (std::size_t i = 0; i < opt.n_traj; ++i)
    totals[i] = e.left[i].pop_a() + e.left[i].pop_b() + e.right[i].pop_a() + e.right[i].pop_b();
  e.mean_total = mean(totals);
  return e;
}

}  // namespace twmix
