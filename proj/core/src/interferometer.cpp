#include "twmix/interferometer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>

#include "twmix/errors.hpp"
#include "twmix/statistics.hpp"

namespace twmix {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInvSqrt2 = 0.7071067811865475244;

SideGram mean_gram(std::span<const SideGram> grams) {
  const std::size_t n = grams.size();
  std::vector<double> a(n), b(n), cr(n), ci(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = grams[i].A;
    b[i] = grams[i].B;
    cr[i] = grams[i].C.real();
    ci[i] = grams[i].C.imag();
  }
  return {mean(a), mean(b), {mean(cr), mean(ci)}, grams.empty() ? 1 : grams[0].modes};
}

}  // namespace

Mat2 Mat2::beam_splitter() {
  const std::complex<double> d(kInvSqrt2, 0.0), o(0.0, -kInvSqrt2);
  return {d, o, o, d};
}

Mat2 Mat2::phase_on_b(double phi) {
  return {{1, 0}, {0, 0}, {0, 0}, std::polar(1.0, phi)};
}

Mat2 Mat2::operator*(const Mat2& r) const {
  return {m00 * r.m00 + m01 * r.m10, m00 * r.m01 + m01 * r.m11,
          m10 * r.m00 + m11 * r.m10, m10 * r.m01 + m11 * r.m11};
}

SideGram transform(const SideGram& g, const Mat2& u) {
  // G' = U G U^dagger with G = [[A, C], [conj(C), B]].
  const std::complex<double> g00(g.A, 0.0), g11(g.B, 0.0);
  const std::complex<double> g01 = g.C, g10 = std::conj(g.C);
  // rows of U G
  const std::complex<double> t00 = u.m00 * g00 + u.m01 * g10;
  const std::complex<double> t01 = u.m00 * g01 + u.m01 * g11;
  const std::complex<double> t10 = u.m10 * g00 + u.m11 * g10;
  const std::complex<double> t11 = u.m10 * g01 + u.m11 * g11;
  SideGram out;
  out.A = std::real(t00 * std::conj(u.m00) + t01 * std::conj(u.m01));
  out.B = std::real(t10 * std::conj(u.m10) + t11 * std::conj(u.m11));
  out.C = t00 * std::conj(u.m10) + t01 * std::conj(u.m11);
  out.modes = g.modes;
  return out;
}

void transform_all(std::span<SideGram> grams, const Mat2& u) {
  for (auto& g : grams) g = transform(g, u);
}

PreparedEnsemble prepare_four_mode(const FourModeParams& p, double t_mix,
                                   const EnsembleOptions& opt, const StateSink& sink) {
  if (opt.n_traj < 2) throw ConfigError("ensemble needs at least two trajectories");
  PreparedEnsemble e;
  e.left.resize(opt.n_traj);
  e.right.resize(opt.n_traj);
  e.modes_left = 1;
  e.modes_right = 1;

  std::mutex sink_mutex;
  for_each_trajectory(opt, [&](std::size_t i, RngStream& rng) {
    FourModeState s = sample_four_mode(p, rng);
    evolve_four_mode(s, p, t_mix);
    e.left[i] = {std::norm(s.aL), std::norm(s.bL), s.aL * std::conj(s.bL), 1};
    e.right[i] = {std::norm(s.aR), std::norm(s.bR), s.aR * std::conj(s.bR), 1};
    if (sink) {
      std::lock_guard lock(sink_mutex);
      sink(i, s);
    }
  });

  std::vector<double> totals(opt.n_traj);
  for (std::size_t i = 0; i < opt.n_traj; ++i)
    totals[i] = e.left[i].pop_a() + e.left[i].pop_b() + e.right[i].pop_a() + e.right[i].pop_b();
  e.mean_total = mean(totals);
  return e;
}

BalanceResult balance_phase(const SideGram& g) {
  // The imbalance is -2 Im(C e^{-i phi}): zeros at arg(C) and arg(C) + pi.
  // Take the arg(C) branch, so Re(C e^{-i phi}) = |C| > 0 on every side.
  const double scale = std::abs(g.A) + std::abs(g.B);
  if (std::abs(g.C) <= 1e-12 * std::max(scale, 1.0)) return {0.0, true};
  return {std::arg(g.C), false};
}

PulsePhases balance_pulses(const PreparedEnsemble& e) {
  PulsePhases ph;
  const Mat2 bs = Mat2::beam_splitter();

  SideGram ml = mean_gram(e.left);
  SideGram mr = mean_gram(e.right);
  ph.phi0_left = balance_phase(ml).phi;
  ph.phi0_right = balance_phase(mr).phi;
  ml = transform(ml, bs * Mat2::phase_on_b(ph.phi0_left));
  mr = transform(mr, bs * Mat2::phase_on_b(ph.phi0_right));
  ph.phi1_left = balance_phase(ml).phi;
  // Each balance condition leaves the branch (phi vs phi + pi) free. Taking
  // the second-pulse branches a half turn apart flips the sign of one side's
  // staged mean coherence, so with the pi interrogation offset the two side
  // fringes add in S -- and the second couplers then rotate the sides' number
  // squeezing into relative-phase squeezing with opposite handedness, which
  // is what lets the differential readout reach the squeezed pair quadrature.
  // Any other pairing yields either a flat fringe or the amplified quadrature.
  ph.phi1_right = balance_phase(mr).phi + std::numbers::pi;
  return ph;
}

StagedEnsemble apply_preparation_pulses(const PreparedEnsemble& e, const PulsePhases& ph) {
  const Mat2 bs = Mat2::beam_splitter();
  const Mat2 ul = bs * Mat2::phase_on_b(ph.phi1_left) * bs * Mat2::phase_on_b(ph.phi0_left);
  const Mat2 ur = bs * Mat2::phase_on_b(ph.phi1_right) * bs * Mat2::phase_on_b(ph.phi0_right);

  StagedEnsemble st;
  st.left = e.left;
  st.right = e.right;
  st.modes_left = e.modes_left;
  st.modes_right = e.modes_right;
  st.mean_total = e.mean_total;
  transform_all(st.left, ul);
  transform_all(st.right, ur);
  return st;
}

namespace {

struct PhasePointStats {
  double mean_s = 0, var_s = 0;
  ModePopulations mean_n;
};

// Differential readout drives the right side at phi2 + pi, so S responds to
// a phase common to both sides; without the offset the common phase cancels
// in S and the instrument measures the left-right phase difference instead.
PhasePointStats interrogate(const StagedEnsemble& st, double phi2, bool differential) {
  const Mat2 bs = Mat2::beam_splitter();
  const Mat2 ul = bs * Mat2::phase_on_b(phi2);
  const Mat2 ur = bs * Mat2::phase_on_b(phi2 + (differential ? std::numbers::pi : 0.0));

  const std::size_t n = st.left.size();
  std::vector<double> s(n), naL(n), nbL(n), naR(n), nbR(n);
  for (std::size_t i = 0; i < n; ++i) {
    const SideGram gl = transform(st.left[i], ul);
    const SideGram gr = transform(st.right[i], ur);
    naL[i] = gl.pop_a();
    nbL[i] = gl.pop_b();
    naR[i] = gr.pop_a();
    nbR[i] = gr.pop_b();
    s[i] = (naL[i] - nbL[i]) - (nbR[i] - naR[i]);
  }

  PhasePointStats out;
  out.mean_s = mean(s);
  const double floor = 0.5 * static_cast<double>(st.modes_left + st.modes_right);
  out.var_s = sample_variance(s) - floor;
  out.mean_n = {mean(naL), mean(nbL), mean(naR), mean(nbR)};
  return out;
}

}  // namespace

SweepResult sensitivity_sweep(const PreparedEnsemble& e, const SweepOptions& opt) {
  if (opt.n_phi < 4) throw ConfigError("interrogation sweep needs at least four points");

  SweepResult res;
  res.pulses = balance_pulses(e);
  const StagedEnsemble st = apply_preparation_pulses(e, res.pulses);
  res.mean_total = e.mean_total;
  if (!(res.mean_total > 0)) throw NumericalError("nonpositive mean total occupation");

  const std::size_t n = opt.n_phi;
  res.points.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double phi2 = kTwoPi * static_cast<double>(j) / static_cast<double>(n);
    const PhasePointStats ps = interrogate(st, phi2, opt.differential);
    SweepPoint& pt = res.points[j];
    pt.phi2 = phi2;
    pt.mean_s = ps.mean_s;
    pt.var_s = ps.var_s;
    pt.var_s_over_nt = ps.var_s / res.mean_total;
    pt.mean_n = ps.mean_n;
  }

  const double dphi = kTwoPi / static_cast<double>(n);
  res.min_delta_phi_sqrt_nt = std::numeric_limits<double>::infinity();
  const double sqrt_nt = std::sqrt(res.mean_total);
  for (std::size_t j = 0; j < n; ++j) {
    const double up = res.points[(j + 1) % n].mean_s;
    const double dn = res.points[(j + n - 1) % n].mean_s;
    const double slope = (up - dn) / (2.0 * dphi);
    SweepPoint& pt = res.points[j];
    if (std::abs(slope) < 1e-12 * res.mean_total || pt.var_s < 0) {
      pt.delta_phi_sqrt_nt = std::numeric_limits<double>::infinity();
    } else {
      pt.delta_phi_sqrt_nt = std::sqrt(pt.var_s) / std::abs(slope) * sqrt_nt;
    }
    if (pt.delta_phi_sqrt_nt < res.min_delta_phi_sqrt_nt) {
      res.min_delta_phi_sqrt_nt = pt.delta_phi_sqrt_nt;
      res.phi2_at_min = pt.phi2;
    }
  }

  double pop_max = -std::numeric_limits<double>::infinity();
  double pop_min = std::numeric_limits<double>::infinity();
  double s_max = -std::numeric_limits<double>::infinity();
  double s_min = std::numeric_limits<double>::infinity();
  for (const auto& pt : res.points) {
    pop_max = std::max(pop_max, pt.mean_n.aL);
    pop_min = std::min(pop_min, pt.mean_n.aL);
    s_max = std::max(s_max, pt.mean_s);
    s_min = std::min(s_min, pt.mean_s);
  }
  res.visibility_population = (pop_max - pop_min) / (pop_max + pop_min);
  res.visibility_signal = (s_max - s_min) / (2.0 * res.mean_total);
  return res;
}

double delta_phi_sqrt_nt_at(const PreparedEnsemble& e, const WorkingPoint& wp, double h) {
  const StagedEnsemble st = apply_preparation_pulses(e, wp.pulses);
  if (!(e.mean_total > 0)) throw NumericalError("nonpositive mean total occupation");

  const PhasePointStats at = interrogate(st, wp.phi2, wp.differential);
  const PhasePointStats up = interrogate(st, wp.phi2 + h, wp.differential);
  const PhasePointStats dn = interrogate(st, wp.phi2 - h, wp.differential);
  const double slope = (up.mean_s - dn.mean_s) / (2.0 * h);
  if (std::abs(slope) < 1e-12 * e.mean_total || at.var_s < 0)
    return std::numeric_limits<double>::infinity();
  return std::sqrt(at.var_s) / std::abs(slope) * std::sqrt(e.mean_total);
}

}  // namespace twmix
