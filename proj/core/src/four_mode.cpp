#include "twmix/four_mode.hpp"

#include <array>
#include <cmath>
#include <complex>

#include "twmix/errors.hpp"
#include "twmix/statistics.hpp"

namespace twmix {

namespace {

using cplx = std::complex<double>;
using Vec4 = std::array<cplx, 4>;  // aL, bL, aR, bR

// Interaction picture: the mixing term is exactly resonant (the momentum-0
// and recoil energies cancel pairwise), so omega_0/omega_k only rotate the
// modes locally. The mean-field phase uses the Weyl-corrected total.
Vec4 rhs(const Vec4& s, const FourModeParams& p) {
  const double nt = std::norm(s[0]) + std::norm(s[1]) + std::norm(s[2]) + std::norm(s[3]) - 2.0;
  const cplx i_chi(0.0, -p.chi);
  Vec4 d;
  d[0] = i_chi * (nt * s[0] + std::conj(s[3]) * s[1] * s[2]) + cplx(0.0, -p.omega_0) * s[0];
  d[1] = i_chi * (nt * s[1] + std::conj(s[2]) * s[0] * s[3]) + cplx(0.0, -p.omega_0) * s[1];
  d[2] = i_chi * (nt * s[2] + std::conj(s[1]) * s[0] * s[3]) + cplx(0.0, -p.omega_k) * s[2];
  d[3] = i_chi * (nt * s[3] + std::conj(s[0]) * s[1] * s[2]) + cplx(0.0, -p.omega_k) * s[3];
  return d;
}

Vec4 axpy(const Vec4& x, double a, const Vec4& y) {
  return {x[0] + a * y[0], x[1] + a * y[1], x[2] + a * y[2], x[3] + a * y[3]};
}

}  // namespace

double FourModeState::total_mod2() const {
  return std::norm(aL) + std::norm(bL) + std::norm(aR) + std::norm(bR);
}

FourModeState sample_four_mode(const FourModeParams& p, RngStream& rng) {
  // Fixed draw order: aL, bL, aR, bR.
  FourModeState s;
  s.aL = sample_coherent(std::sqrt(p.n_aL), rng);
  s.bL = sample_coherent(std::polar(std::sqrt(p.n_bL), p.phase_bL), rng);
  s.aR = sample_coherent(std::polar(std::sqrt(p.n_aR), p.phase_aR), rng);
  s.bR = sample_coherent(std::sqrt(p.n_bR), rng);
  return s;
}

void evolve_four_mode(FourModeState& state, const FourModeParams& p, double duration) {
  if (duration < 0) throw NumericalError("negative evolution time");
  if (duration == 0) return;
  if (!(p.dt > 0)) throw ConfigError("integrator step must be positive");

  const auto n = static_cast<std::size_t>(std::ceil(duration / p.dt));
  const double h = duration / static_cast<double>(n);

  Vec4 s{state.aL, state.bL, state.aR, state.bR};
  for (std::size_t step = 0; step < n; ++step) {
    const Vec4 k1 = rhs(s, p);
    const Vec4 k2 = rhs(axpy(s, 0.5 * h, k1), p);
    const Vec4 k3 = rhs(axpy(s, 0.5 * h, k2), p);
    const Vec4 k4 = rhs(axpy(s, h, k3), p);
    for (int m = 0; m < 4; ++m)
      s[m] += (h / 6.0) * (k1[m] + 2.0 * k2[m] + 2.0 * k3[m] + k4[m]);
  }

  for (const auto& v : s)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw NumericalError("four-mode integration produced non-finite amplitudes");

  state = {s[0], s[1], s[2], s[3]};
}

std::array<double, 3> four_mode_invariants(const FourModeState& s) {
  return {std::norm(s.aL) + std::norm(s.aR),
          std::norm(s.bL) + std::norm(s.bR),
          std::norm(s.aR) + std::norm(s.bR)};
}

double undepleted_pair_population(double n0, double r) {
  return (n0 + 0.5) * std::cosh(2.0 * r) - 0.5;
}

double undepleted_pair_variance(double n0, double r) {
  const double denom = (2.0 * n0 + 1.0) * std::cosh(2.0 * r) - 1.0;
  // n0 = 0, r = 0 is a 0/0; the coherent-vacuum limit is exactly the shot-noise level.
  if (denom == 0.0) return 1.0;
  return 2.0 * n0 / denom;
}

double chi_from_calibration(double nt_chi, double n_total) {
  if (!(n_total > 0)) throw ConfigError("total occupation must be positive");
  return nt_chi / n_total;
}

std::vector<ScanPoint> four_mode_scan(const FourModeParams& p,
                                      std::span<const double> times,
                                      const EnsembleOptions& opt) {
  const std::size_t n_times = times.size();
  if (n_times == 0) return {};
  for (std::size_t j = 0; j + 1 < n_times; ++j)
    if (times[j + 1] < times[j]) throw ConfigError("scan times must be ascending");
  if (times[0] < 0) throw ConfigError("scan times must be nonnegative");
  if (opt.n_traj < 2) throw ConfigError("scan needs at least two trajectories");

  // store[(j * n_traj + i) * 4 + m]: corrected occupation of mode m,
  // trajectory i, time j.
  std::vector<double> store(n_times * opt.n_traj * 4);
  for_each_trajectory(opt, [&](std::size_t i, RngStream& rng) {
    FourModeState s = sample_four_mode(p, rng);
    double t_prev = 0;
    for (std::size_t j = 0; j < n_times; ++j) {
      evolve_four_mode(s, p, times[j] - t_prev);
      t_prev = times[j];
      double* slot = &store[(j * opt.n_traj + i) * 4];
      slot[0] = std::norm(s.aL) - 0.5;
      slot[1] = std::norm(s.bL) - 0.5;
      slot[2] = std::norm(s.aR) - 0.5;
      slot[3] = std::norm(s.bR) - 0.5;
    }
  });

  std::vector<ScanPoint> result(n_times);
  std::vector<double> cols[4];
  for (auto& c : cols) c.resize(opt.n_traj);
  for (std::size_t j = 0; j < n_times; ++j) {
    for (std::size_t i = 0; i < opt.n_traj; ++i)
      for (int m = 0; m < 4; ++m) cols[m][i] = store[(j * opt.n_traj + i) * 4 + m];
    ScanPoint& pt = result[j];
    pt.t = times[j];
    pt.tau = p.chi * p.n_total() * times[j];
    pt.mean_n = {mean(cols[0]), mean(cols[1]), mean(cols[2]), mean(cols[3])};
    // pair order: (aR,bL) (aL,bR) (aL,bL) (aR,bR) (aL,aR) (bL,bR)
    pt.pairs.v[0] = number_difference_variance(cols[2], cols[1]);
    pt.pairs.v[1] = number_difference_variance(cols[0], cols[3]);
    pt.pairs.v[2] = number_difference_variance(cols[0], cols[1]);
    pt.pairs.v[3] = number_difference_variance(cols[2], cols[3]);
    pt.pairs.v[4] = number_difference_variance(cols[0], cols[2]);
    pt.pairs.v[5] = number_difference_variance(cols[1], cols[3]);
  }
  return result;
}

}  // namespace twmix
