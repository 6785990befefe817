// Desk-scale acceptance suite. Each criterion prints exactly one PASS/FAIL
// verdict line (plus indented measurement notes) and the binary exits
// nonzero if any criterion fails. All tolerances are pinned here, next to
// the checks that use them.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "twmix/config.hpp"
#include "twmix/constants.hpp"
#include "twmix/ensemble.hpp"
#include "twmix/fft.hpp"
#include "twmix/four_mode.hpp"
#include "twmix/grid.hpp"
#include "twmix/ground_state.hpp"
#include "twmix/interferometer.hpp"
#include "twmix/multimode.hpp"
#include "twmix/oat.hpp"
#include "twmix/observables.hpp"
#include "twmix/rng.hpp"
#include "twmix/robustness.hpp"
#include "twmix/statistics.hpp"

namespace {

using namespace twmix;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

struct Criterion {
  bool ok = true;
  std::vector<std::string> notes;

  void gate(bool cond, const std::string& what) {
    notes.push_back((cond ? "ok: " : "FAILED: ") + what);
    ok = ok && cond;
  }
  void note(const std::string& s) { notes.push_back(s); }
};

double sd(std::span<const double> v) { return std::sqrt(sample_variance(v)); }

// ---------------------------------------------------------------------------
// Chunked scans: K independent runs of m trajectories each. The chunk spread
// gives an honest standard error, and the full-sample (K * m trajectory)
// statistics are reconstructed exactly from the per-chunk outputs.

std::vector<std::vector<ScanPoint>> run_chunks_fm(const FourModeParams& p,
                                                  const std::vector<double>& times,
                                                  std::size_t k_chunks, std::size_t m,
                                                  std::uint64_t seed0) {
  std::vector<std::vector<ScanPoint>> out;
  out.reserve(k_chunks);
  for (std::size_t k = 0; k < k_chunks; ++k) {
    EnsembleOptions o;
    o.n_traj = m;
    o.seed = seed0 + k;
    out.push_back(four_mode_scan(p, times, o));
  }
  return out;
}

std::vector<std::vector<ScanPoint>> run_chunks_mm(const MultimodeParams& p,
                                                  const MultimodeScanOptions& scan,
                                                  std::size_t k_chunks, std::size_t m,
                                                  std::uint64_t seed0) {
  std::vector<std::vector<ScanPoint>> out;
  out.reserve(k_chunks);
  for (std::size_t k = 0; k < k_chunks; ++k) {
    EnsembleOptions o;
    o.n_traj = m;
    o.seed = seed0 + k;
    out.push_back(multimode_scan(p, scan, o));
  }
  return out;
}

struct Pooled {
  double value = 0;  // exact full-sample statistic
  double se = 0;     // chunk-spread standard error
};

// Inverts each chunk's number-difference variance back to its raw sample
// variance (v_k = (Var_k - floor_quarter) / S_k), pools the chunks with the
// standard two-level sum-of-squares identity, and re-applies the floor.
Pooled pool_pair_variance(std::span<const double> v_k, std::span<const double> s_k,
                          std::span<const double> mu_k, double floor_quarter,
                          std::size_t m) {
  const std::size_t kk = v_k.size();
  const double n = static_cast<double>(kk * m);
  const double mu_bar = mean(mu_k);
  std::vector<double> ss(kk);
  for (std::size_t k = 0; k < kk; ++k) {
    const double var_k = v_k[k] * s_k[k] + floor_quarter;
    const double dm = mu_k[k] - mu_bar;
    ss[k] = (static_cast<double>(m) - 1.0) * var_k + static_cast<double>(m) * dm * dm;
  }
  const double var_pool = pairwise_sum(ss) / (n - 1.0);
  Pooled r;
  r.value = (var_pool - floor_quarter) / mean(s_k);
  r.se = sd(v_k) / std::sqrt(static_cast<double>(kk));
  return r;
}

// pair 0 = (aR, bL), pair 1 = (aL, bR); floor_quarter = (modes_i + modes_j)/4.
Pooled pool_scan_pair(const std::vector<std::vector<ScanPoint>>& chunks, std::size_t ti,
                      int pair, double floor_quarter, std::size_t m) {
  std::vector<double> v, s, mu;
  for (const auto& run : chunks) {
    const ScanPoint& pt = run[ti];
    if (pair == 0) {
      v.push_back(pt.pairs.v[0]);
      s.push_back(pt.mean_n.aR + pt.mean_n.bL);
      mu.push_back(pt.mean_n.aR - pt.mean_n.bL);
    } else {
      v.push_back(pt.pairs.v[1]);
      s.push_back(pt.mean_n.aL + pt.mean_n.bR);
      mu.push_back(pt.mean_n.aL - pt.mean_n.bR);
    }
  }
  return pool_pair_variance(v, s, mu, floor_quarter, m);
}

Pooled pool_scan_mean(const std::vector<std::vector<ScanPoint>>& chunks, std::size_t ti,
                      const std::function<double(const ScanPoint&)>& sel) {
  std::vector<double> vals;
  for (const auto& run : chunks) vals.push_back(sel(run[ti]));
  Pooled r;
  r.value = mean(vals);
  r.se = sd(vals) / std::sqrt(static_cast<double>(vals.size()));
  return r;
}

double total_norm(const FieldPair& f, const Grid1D& g) {
  std::vector<double> t(f.a.size());
  for (std::size_t i = 0; i < f.a.size(); ++i) t[i] = std::norm(f.a[i]) + std::norm(f.b[i]);
  return pairwise_sum(t) * g.dx();
}

// Band-limited embedding of a field onto the doubled grid: pad the spectrum
// with zeros and rescale so the represented state (values and norm) is
// unchanged. Used for paired grid-refinement checks.
std::vector<cplx> upsample_double(const std::vector<cplx>& src) {
  const std::size_t n = src.size();
  Fft1D coarse(n), fine(2 * n);
  std::vector<cplx> s = src;
  coarse.forward(s.data());
  std::vector<cplx> d(2 * n, cplx{0, 0});
  for (std::size_t j = 0; j < n / 2; ++j) d[j] = 2.0 * s[j];
  for (std::size_t j = n / 2; j < n; ++j) d[j + n] = 2.0 * s[j];
  fine.inverse(d.data());
  return d;
}

FieldPair upsample_double(const FieldPair& f) {
  FieldPair g;
  g.a = upsample_double(f.a);
  g.b = upsample_double(f.b);
  return g;
}

// Exact symmetric-ordering moments of the twisted two-mode state seeded by
// splitting a Poissonian coherent source (closed forms; chi_cross must be 0).
struct ExactMode {
  double n = 0;
  cplx a1, a2, na;  // <a>, <a^2>, <n a>
};

ExactMode exact_mode(cplx gamma, double chi, double t) {
  const double n = std::norm(gamma);
  const cplx e1 = std::polar(1.0, -chi * t);
  const cplx e2 = std::polar(1.0, -2.0 * chi * t);
  ExactMode m;
  m.n = n;
  m.a1 = gamma * std::exp(n * (e1 - 1.0));
  m.a2 = gamma * gamma * e1 * std::exp(n * (e2 - 1.0));
  m.na = m.a1 * (n * e1);
  return m;
}

TwistedMoments exact_twisted_moments(const OatParams& p, double t) {
  const double half = std::sqrt(0.5 * p.n_total);
  const ExactMode A = exact_mode(cplx{half, 0.0}, p.chi_a(), t);
  const ExactMode B = exact_mode(cplx{0.0, -half}, p.chi_b(), t);

  const double k1 = A.n + 0.5, k2 = B.n + 0.5;
  const cplx P = A.a1 * std::conj(B.a1);
  const cplx Q = A.a2 * std::conj(B.a2);
  const double R = (A.n + 0.5) * (B.n + 0.5);
  const cplx Ta = (A.na + A.a1) * std::conj(B.a1);
  const cplx Tb = A.a1 * std::conj(B.na + B.a1);

  TwistedMoments m;
  m.n_traj = 2;
  m.mean = {k1, k2, P.real(), P.imag()};
  m.cov[0][0] = A.n + 0.25;
  m.cov[1][1] = B.n + 0.25;
  m.cov[0][1] = 0.0;
  m.cov[0][2] = Ta.real() - k1 * P.real();
  m.cov[0][3] = Ta.imag() - k1 * P.imag();
  m.cov[1][2] = Tb.real() - k2 * P.real();
  m.cov[1][3] = Tb.imag() - k2 * P.imag();
  m.cov[2][2] = 0.5 * (Q.real() + R) - P.real() * P.real();
  m.cov[3][3] = 0.5 * (R - Q.real()) - P.imag() * P.imag();
  m.cov[2][3] = 0.5 * Q.imag() - P.real() * P.imag();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < i; ++j) m.cov[i][j] = m.cov[j][i];
  return m;
}

// Shared multimode setup (calibrated interaction + ground profile), built
// once and reused by C3, C4 and parts of C7.
struct Shared {
  MultimodeParams mm;
  double chi_mm = 0;
  bool mm_ready = false;
  std::string mm_error;
  double calibration_seconds = 0;
};

// ---------------------------------------------------------------------------
// C1: undepleted analytic baseline.

void criterion_1(Criterion& c) {
  const auto t0 = Clock::now();

  c.gate(undepleted_pair_variance(1000.0, 0.0) == 1.0, "v(1000, 0) == 1 exactly");
  c.gate(undepleted_pair_variance(0.0, 0.0) == 1.0, "v(0, 0) == 1 exactly");
  c.gate(undepleted_pair_variance(7.0, 0.0) == 1.0, "v(7, 0) == 1 exactly");
  c.gate(undepleted_pair_population(1000.0, 0.0) == 1000.0, "pop(1000, 0) == 1000 exactly");
  c.gate(undepleted_pair_population(1e5, 0.0) == 1e5, "pop(1e5, 0) == 1e5 exactly");
  c.gate(undepleted_pair_population(0.25, 0.0) == 0.25, "pop(0.25, 0) == 0.25 exactly");

  FourModeParams p;
  const double nt = p.n_total();
  const std::vector<double> taus = {0.125, 0.25, 1.0};
  std::vector<double> times;
  for (const double tau : taus) times.push_back(tau / (p.chi * nt));

  const std::size_t kc = 20, m = 500;  // 10^4 trajectories total
  const auto chunks = run_chunks_fm(p, times, kc, m, 1400);

  for (std::size_t ti = 0; ti < taus.size(); ++ti) {
    const double r = p.chi * std::sqrt(p.n_aL * p.n_bR) * times[ti];
    const double pop_ref = undepleted_pair_population(p.n_aR, r);
    const double v_ref = undepleted_pair_variance(p.n_aR, r);

    const Pooled paR = pool_scan_mean(chunks, ti, [](const ScanPoint& s) { return s.mean_n.aR; });
    const Pooled pbL = pool_scan_mean(chunks, ti, [](const ScanPoint& s) { return s.mean_n.bL; });
    const Pooled v = pool_scan_pair(chunks, ti, 0, 0.5, m);

    c.note(fmt("tau=%.3f: N_aR dev %+.2f SE, N_bL dev %+.2f SE, v dev %+.2f SE "
               "(refs pop=%.6g v=%.6g)",
               taus[ti], (paR.value - pop_ref) / paR.se, (pbL.value - pop_ref) / pbL.se,
               (v.value - v_ref) / v.se, pop_ref, v_ref));

    // Pump depletion shifts the pair population below the undepleted formula
    // by ~0.12% at tau=0.5 and ~0.47% at tau=1 (beyond noise at 10^4
    // trajectories), so the population is gated where the formula itself
    // holds to within sampling noise; the variance ratio is gated out to
    // tau=1 where it still does.
    if (taus[ti] <= 0.3) {
      c.gate(std::abs(paR.value - pop_ref) <= 3.0 * paR.se,
             fmt("N_aR within 3 SE of analytic at tau=%.3f", taus[ti]));
      c.gate(std::abs(pbL.value - pop_ref) <= 3.0 * pbL.se,
             fmt("N_bL within 3 SE of analytic at tau=%.3f", taus[ti]));
    }
    c.gate(std::abs(v.value - v_ref) <= 3.0 * v.se,
           fmt("v(aR,bL) within 3 SE of analytic at tau=%.3f", taus[ti]));
  }

  const double secs = seconds_since(t0);
  c.gate(secs < 60.0, fmt("runtime %.1f s < 60 s", secs));
}

// ---------------------------------------------------------------------------
// C2: depletion-limited squeezing minimum of the single-mode model.

void criterion_2(Criterion& c) {
  const auto t0 = Clock::now();

  FourModeParams p;
  const std::vector<double> taus = {6, 7, 8, 9, 9.5, 10, 10.5, 11, 12, 13, 14};
  std::vector<double> times;
  for (const double tau : taus) times.push_back(tau / (p.chi * p.n_total()));

  EnsembleOptions opt;
  opt.n_traj = 1200;
  opt.seed = 1450;
  const auto pts = four_mode_scan(p, times, opt);

  double v_min = std::numeric_limits<double>::infinity();
  double tau_min = 0;
  std::string curve;
  for (const auto& pt : pts) {
    curve += fmt(" %.4g:%.3g", pt.tau, pt.pairs.aR_bL());
    if (pt.pairs.aR_bL() < v_min) {
      v_min = pt.pairs.aR_bL();
      tau_min = pt.tau;
    }
  }
  c.note("v(aR,bL) by tau:" + curve);

  c.gate(v_min >= 0.005 && v_min <= 0.02,
         fmt("minimum v(aR,bL) = %.4g in [0.005, 0.02]", v_min));
  c.gate(tau_min >= 8.0 && tau_min <= 12.0, fmt("minimum at tau = %.4g in [8, 12]", tau_min));

  const double secs = seconds_since(t0);
  c.gate(secs < 300.0, fmt("runtime %.1f s < 300 s", secs));
}

// ---------------------------------------------------------------------------
// C3: multimode squeezing floor and small-gain agreement with the
// single-mode model.

void criterion_3(Criterion& c, const Shared& sh) {
  const auto t0 = Clock::now();
  if (!sh.mm_ready) {
    c.gate(false, "multimode setup unavailable: " + sh.mm_error);
    return;
  }
  c.note(fmt("calibration %.1f s; chi = %.8g 1/s; %zu grid points", sh.calibration_seconds,
             sh.chi_mm, sh.mm.grid.n));

  const double nt = sh.mm.n_total();
  const std::vector<double> taus = {0.5, 1, 1.5, 2, 3, 3.5, 4, 4.5, 5, 5.5, 6};
  MultimodeScanOptions scan;
  for (const double tau : taus) scan.times.push_back(tau / (sh.chi_mm * nt));

  const std::size_t kc = 12, m = 100;  // 1200 trajectories total
  const auto chunks = run_chunks_mm(sh.mm, scan, kc, m, 1500);

  const RegionSplit rs = region_split(sh.mm);
  const double floor_q =
      0.25 * static_cast<double>(rs.n_left + rs.n_right);

  std::vector<Pooled> v0(taus.size()), v1(taus.size());
  double v_floor = std::numeric_limits<double>::infinity();
  double tau_floor = 0;
  std::string curve;
  for (std::size_t ti = 0; ti < taus.size(); ++ti) {
    v0[ti] = pool_scan_pair(chunks, ti, 0, floor_q, m);
    v1[ti] = pool_scan_pair(chunks, ti, 1, floor_q, m);
    const double lo = std::min(v0[ti].value, v1[ti].value);
    curve += fmt(" %.3g:%.3g", taus[ti], lo);
    if (lo < v_floor) {
      v_floor = lo;
      tau_floor = taus[ti];
    }
  }
  c.note("min pair v by tau:" + curve);

  c.gate(v_floor >= 0.05 && v_floor <= 0.2,
         fmt("squeezed-pair floor v = %.4g in [0.05, 0.2]", v_floor));
  c.gate(tau_floor >= 3.0 && tau_floor <= 6.0,
         fmt("floor located at tau = %.4g (expected near 4-5)", tau_floor));

  // Single-mode reference on the shared small-gain grid, 10^4 trajectories.
  FourModeParams pf;
  const std::vector<double> taus_lo = {0.5, 1, 1.5, 2};
  std::vector<double> times_f;
  for (const double tau : taus_lo) times_f.push_back(tau / (pf.chi * pf.n_total()));
  const auto fm_chunks = run_chunks_fm(pf, times_f, 20, 500, 1550);

  for (std::size_t ti = 0; ti < taus_lo.size(); ++ti) {
    for (int pair = 0; pair < 2; ++pair) {
      const Pooled vm = (pair == 0) ? v0[ti] : v1[ti];
      const Pooled vf = pool_scan_pair(fm_chunks, ti, pair, 0.5, 500);
      const double gap = std::abs(vm.value - vf.value);
      const double allow = 0.10 * std::abs(vf.value) + 3.0 * std::hypot(vm.se, vf.se);
      c.gate(gap <= allow,
             fmt("pair %d at tau=%.2g: |v_mm - v_fm| = %.4g <= 0.10*v_fm + 3 SE = %.4g "
                 "(v_mm=%.4g v_fm=%.4g)",
                 pair, taus_lo[ti], gap, allow, vm.value, vf.value));
    }
  }

  const double secs = seconds_since(t0);
  c.gate(secs < 1800.0, fmt("runtime %.1f s < 1800 s", secs));
}

// ---------------------------------------------------------------------------
// C4: three-pulse interferometer sensitivity and fringe visibility.

void criterion_4(Criterion& c, const Shared& sh) {
  if (!sh.mm_ready) {
    c.gate(false, "multimode setup unavailable: " + sh.mm_error);
    return;
  }
  const double t_mix = 0.12e-3;

  EnsembleOptions opt;
  opt.n_traj = 1200;
  opt.seed = 1700;
  const PreparedEnsemble e_mm = prepare_multimode(sh.mm, t_mix, opt);
  const SweepResult res = sensitivity_sweep(e_mm, SweepOptions{});
  c.note(fmt("multimode: min dphi*sqrt(Nt) = %.4g at phi2 = %.4g; visibility pop/signal "
             "%.4f/%.4f; mean Nt = %.6g",
             res.min_delta_phi_sqrt_nt, res.phi2_at_min, res.visibility_population,
             res.visibility_signal, res.mean_total));

  c.gate(res.min_delta_phi_sqrt_nt >= 0.35 && res.min_delta_phi_sqrt_nt <= 0.55,
         fmt("multimode min dphi*sqrt(Nt) = %.4g in [0.35, 0.55]", res.min_delta_phi_sqrt_nt));
  c.gate(res.visibility_population >= 0.90 && res.visibility_population <= 0.96,
         fmt("multimode fringe visibility = %.4f in [0.90, 0.96]", res.visibility_population));

  FourModeParams pf;
  EnsembleOptions opt_f;
  opt_f.n_traj = 1200;
  opt_f.seed = 1701;
  const SweepResult res_f = sensitivity_sweep(prepare_four_mode(pf, t_mix, opt_f), SweepOptions{});
  c.note(fmt("single-mode: min dphi*sqrt(Nt) = %.4g; visibility pop %.4f",
             res_f.min_delta_phi_sqrt_nt, res_f.visibility_population));
  c.gate(res_f.visibility_population >= 0.99,
         fmt("single-mode fringe visibility = %.4f >= 0.99", res_f.visibility_population));
}

// ---------------------------------------------------------------------------
// C5: shot-noise control with uncorrelated coherent inputs.

void criterion_5(Criterion& c) {
  FourModeParams p;
  EnsembleOptions opt;
  opt.n_traj = 1200;
  opt.seed = 1800;
  const PreparedEnsemble e = prepare_four_mode(p, 0.0, opt);
  const SweepResult res = sensitivity_sweep(e, SweepOptions{});

  c.gate(res.min_delta_phi_sqrt_nt >= 0.9 && res.min_delta_phi_sqrt_nt <= 1.1,
         fmt("min dphi*sqrt(Nt) = %.4g in [0.9, 1.1]", res.min_delta_phi_sqrt_nt));

  const double tol = 5.0 * std::sqrt(2.0 / (static_cast<double>(opt.n_traj) - 1.0));
  double worst = 0;
  for (const auto& pt : res.points) worst = std::max(worst, std::abs(pt.var_s_over_nt - 1.0));
  c.gate(worst <= tol,
         fmt("V(S)/Nt - 1: worst |dev| = %.4g <= 5 SE = %.4g over %zu phases", worst, tol,
             res.points.size()));
}

// ---------------------------------------------------------------------------
// C6: robustness to source miscalibration, three schemes.

void criterion_6(Criterion& c) {
  const auto t0 = Clock::now();
  const ExperimentConfig cd;  // default epsilon list covers +-0.25%..50%

  EnsembleOptions opt;
  opt.n_traj = 1200;
  opt.seed = 1900;

  OatParams p_large;
  p_large.n_total = cd.oat_n_large;
  const RobustnessCurve rl = oat_robustness(p_large, opt, cd.epsilons);

  OatParams p_small;
  p_small.n_total = cd.oat_n_small;
  const RobustnessCurve rsm = oat_robustness(p_small, opt, cd.epsilons);

  FourModeParams pf;
  const RobustnessCurve rf = fwm_robustness(pf, 0.12e-3, opt, cd.epsilons);

  double fwm_worst = 0;
  for (const auto& pt : rf.points) fwm_worst = std::max(fwm_worst, pt.delta_phi_sqrt_nt);
  c.note(fmt("critical |eps|: twist %.4g (N=%.3g), twist %.4g (N=%.3g), mixing %.4g; "
             "worst mixing dphi*sqrt(Nt) = %.4g",
             rl.critical_epsilon, p_large.n_total, rsm.critical_epsilon, p_small.n_total,
             rf.critical_epsilon, fwm_worst));

  c.gate(rl.critical_epsilon >= 0.005 && rl.critical_epsilon <= 0.02,
         fmt("twist scheme at N=%.3g crosses shot noise at |eps| = %.4g in [0.5%%, 2%%]",
             p_large.n_total, rl.critical_epsilon));
  c.gate(rsm.critical_epsilon >= 0.20 && rsm.critical_epsilon <= 0.50,
         fmt("twist scheme at N=%.3g crosses at |eps| = %.4g in [20%%, 50%%]", p_small.n_total,
             rsm.critical_epsilon));
  c.gate(fwm_worst < 1.0,
         fmt("mixing scheme stays below shot noise at every eps up to 50%% (worst %.4g)",
             fwm_worst));
  c.gate(rl.critical_epsilon < rsm.critical_epsilon && rsm.critical_epsilon < rf.critical_epsilon,
         "strict robustness ordering: mixing > small-N twist > large-N twist");

  c.note(fmt("runtime %.1f s", seconds_since(t0)));
}

// ---------------------------------------------------------------------------
// C7: property suite (conservation, unitarity, determinism, convergence,
// small-system exactness, kinematics).

void c7_conservation_fm(Criterion& c) {
  FourModeParams p;
  const double t = 2.0 / (p.chi * p.n_total());
  EnsembleOptions opt;
  opt.n_traj = 200;
  opt.seed = 2000;

  std::vector<double> dn(opt.n_traj), di(opt.n_traj);
  for_each_trajectory(opt, [&](std::size_t i, RngStream& rng) {
    FourModeState s = sample_four_mode(p, rng);
    const auto before = four_mode_invariants(s);
    const double nt0 = before[0] + before[1];
    evolve_four_mode(s, p, t);
    const auto after = four_mode_invariants(s);
    dn[i] = std::abs(after[0] + after[1] - nt0) / nt0;
    double worst = 0;
    for (int j = 0; j < 3; ++j)
      worst = std::max(worst, std::abs(after[j] - before[j]) / before[j]);
    di[i] = worst;
  });
  const double worst_n = *std::max_element(dn.begin(), dn.end());
  const double worst_i = *std::max_element(di.begin(), di.end());
  c.gate(worst_n <= 1e-9, fmt("single-mode total occupation drift %.3g <= 1e-9", worst_n));
  c.gate(worst_i <= 1e-8, fmt("single-mode flow invariants drift %.3g <= 1e-8", worst_i));
}

void c7_conservation_mm(Criterion& c, const Shared& sh) {
  EnsembleOptions opt;
  opt.n_traj = 30;
  opt.seed = 2001;
  std::vector<double> d_mix(opt.n_traj), d_full(opt.n_traj);
  for_each_trajectory(opt, [&](std::size_t i, RngStream& rng) {
    FieldPair f = sample_multimode(sh.mm, rng);
    const double n0 = total_norm(f, sh.mm.grid);
    evolve_multimode(f, sh.mm, 0.12e-3);
    d_mix[i] = std::abs(total_norm(f, sh.mm.grid) - n0) / n0;
    free_propagate(f, sh.mm, sh.mm.separation_time);
    d_full[i] = std::abs(total_norm(f, sh.mm.grid) - n0) / n0;
  });
  const double worst_mix = *std::max_element(d_mix.begin(), d_mix.end());
  const double worst_full = *std::max_element(d_full.begin(), d_full.end());
  c.gate(worst_mix <= 1e-8, fmt("multimode mixing norm drift %.3g <= 1e-8", worst_mix));
  c.gate(worst_full <= 1e-8, fmt("multimode full-pipeline norm drift %.3g <= 1e-8", worst_full));
}

void c7_kerr_and_pulses(Criterion& c) {
  OatParams po;
  double worst_kerr = 0;
  for (std::size_t i = 0; i < 200; ++i) {
    RngStream rng(2002, i);
    TwoMode s = sample_oat_input(po, rng);
    const double n0 = std::norm(s.a) + std::norm(s.b);
    kerr_phase(s, po, 1e-3);
    const double n1 = std::norm(s.a) + std::norm(s.b);
    worst_kerr = std::max(worst_kerr, std::abs(n1 - n0) / n0);
  }
  c.gate(worst_kerr <= 1e-10, fmt("twist step occupation drift %.3g <= 1e-10", worst_kerr));

  FourModeParams p;
  EnsembleOptions opt;
  opt.n_traj = 100;
  opt.seed = 2003;
  const PreparedEnsemble e = prepare_four_mode(p, 3e-5, opt);
  const double phases[10] = {0.3, 1.7, 2.9, 4.1, 5.3, 0.7, 1.1, 3.7, 2.3, 5.9};
  Mat2 u;
  for (const double ph : phases) u = Mat2::beam_splitter() * Mat2::phase_on_b(ph) * u;
  double worst_tr = 0;
  for (std::size_t i = 0; i < e.left.size(); ++i) {
    for (const SideGram* g : {&e.left[i], &e.right[i]}) {
      const double tr0 = g->A + g->B;
      const SideGram h = transform(*g, u);
      worst_tr = std::max(worst_tr, std::abs(h.A + h.B - tr0) / tr0);
    }
  }
  c.gate(worst_tr <= 1e-10, fmt("10-pulse chain trace drift %.3g <= 1e-10", worst_tr));
}

void c7_determinism(Criterion& c, const Shared& sh) {
  FourModeParams p;
  const std::vector<double> times = {1.0 / (p.chi * p.n_total()), 2.0 / (p.chi * p.n_total())};
  EnsembleOptions o1;
  o1.n_traj = 120;
  o1.seed = 2005;
  o1.threads = 1;
  EnsembleOptions o3 = o1;
  o3.threads = 3;
  const auto pts1 = four_mode_scan(p, times, o1);
  const auto pts3 = four_mode_scan(p, times, o3);
  bool same = pts1.size() == pts3.size();
  for (std::size_t i = 0; same && i < pts1.size(); ++i) {
    same = pts1[i].mean_n.aL == pts3[i].mean_n.aL && pts1[i].mean_n.bL == pts3[i].mean_n.bL &&
           pts1[i].mean_n.aR == pts3[i].mean_n.aR && pts1[i].mean_n.bR == pts3[i].mean_n.bR &&
           pts1[i].pairs.v == pts3[i].pairs.v;
  }
  c.gate(same, "single-mode scan bit-identical for 1 vs 3 worker threads");

  if (sh.mm_ready) {
    EnsembleOptions m1;
    m1.n_traj = 6;
    m1.seed = 2006;
    m1.threads = 1;
    EnsembleOptions m2 = m1;
    m2.threads = 2;
    const PreparedEnsemble e1 = prepare_multimode(sh.mm, 0.03e-3, m1);
    const PreparedEnsemble e2 = prepare_multimode(sh.mm, 0.03e-3, m2);
    bool eq = e1.mean_total == e2.mean_total;
    for (std::size_t i = 0; eq && i < e1.left.size(); ++i)
      eq = e1.left[i].A == e2.left[i].A && e1.left[i].B == e2.left[i].B &&
           e1.left[i].C == e2.left[i].C && e1.right[i].A == e2.right[i].A &&
           e1.right[i].B == e2.right[i].B && e1.right[i].C == e2.right[i].C;
    c.gate(eq, "multimode preparation bit-identical for 1 vs 2 worker threads");
  } else {
    c.gate(false, "multimode determinism check skipped: " + sh.mm_error);
  }
}

void c7_convergence(Criterion& c, const Shared& sh) {
  const double t_conv = 0.06e-3;
  const std::size_t n_traj = 200, chunk = 10;
  const RegionSplit rs = region_split(sh.mm);

  const auto chunk_v = [&](std::span<const double> a, std::span<const double> b,
                           std::size_t k) {
    return number_difference_variance(a.subspan(k * chunk, chunk), b.subspan(k * chunk, chunk),
                                      rs.n_right, rs.n_left);
  };
  const auto paired_gate = [&](std::span<const double> aR_b, std::span<const double> bL_b,
                               std::span<const double> aR_f, std::span<const double> bL_f,
                               double rel, const char* label) {
    const double v_base = number_difference_variance(aR_b, bL_b, rs.n_right, rs.n_left);
    const double v_fine = number_difference_variance(aR_f, bL_f, rs.n_right, rs.n_left);
    std::vector<double> d(n_traj / chunk);
    for (std::size_t k = 0; k < d.size(); ++k)
      d[k] = chunk_v(aR_f, bL_f, k) - chunk_v(aR_b, bL_b, k);
    const double se_d = sd(d) / std::sqrt(static_cast<double>(d.size()));
    const double gap = std::abs(v_fine - v_base);
    const double allow = rel * v_base + 3.0 * se_d;
    c.gate(gap <= allow, fmt("%s: |dv| = %.4g <= %.4g (v = %.4g -> %.4g, paired SE %.3g)",
                             label, gap, allow, v_base, v_fine, se_d));
  };

  {  // time-step halving, identical initial noise
    MultimodeParams ph = sh.mm;
    ph.dt = 0.5 * sh.mm.dt;
    std::vector<double> aR_b(n_traj), bL_b(n_traj), aR_h(n_traj), bL_h(n_traj);
    EnsembleOptions opt;
    opt.n_traj = n_traj;
    opt.seed = 2007;
    for_each_trajectory(opt, [&](std::size_t i, RngStream& rng) {
      FieldPair f = sample_multimode(sh.mm, rng);
      FieldPair g = f;
      evolve_multimode(f, sh.mm, t_conv);
      free_propagate(f, sh.mm, sh.mm.separation_time);
      evolve_multimode(g, ph, t_conv);
      free_propagate(g, ph, ph.separation_time);
      const auto [l1, r1] = side_grams(f, sh.mm);
      const auto [l2, r2] = side_grams(g, ph);
      aR_b[i] = r1.pop_a();
      bL_b[i] = l1.pop_b();
      aR_h[i] = r2.pop_a();
      bL_h[i] = l2.pop_b();
    });
    paired_gate(aR_b, bL_b, aR_h, bL_h, 0.02, "dt halving");
  }

  {  // grid doubling via band-limited embedding of the same initial state
    MultimodeParams p32 = sh.mm;
    p32.grid.n = 2 * sh.mm.grid.n;
    p32.psi0.clear();  // sampling not used on the fine grid
    std::vector<double> aR_b(n_traj), bL_b(n_traj), aR_f(n_traj), bL_f(n_traj);
    EnsembleOptions opt;
    opt.n_traj = n_traj;
    opt.seed = 2008;
    for_each_trajectory(opt, [&](std::size_t i, RngStream& rng) {
      FieldPair f16 = sample_multimode(sh.mm, rng);
      FieldPair f32 = upsample_double(f16);
      evolve_multimode(f16, sh.mm, t_conv);
      free_propagate(f16, sh.mm, sh.mm.separation_time);
      evolve_multimode(f32, p32, t_conv);
      free_propagate(f32, p32, p32.separation_time);
      const auto [l16, r16] = side_grams(f16, sh.mm);
      aR_b[i] = r16.pop_a();
      bL_b[i] = l16.pop_b();
      // The embedded state carries the coarse grid's stochastic modes, so
      // the fine readout removes the coarse vacuum floor.
      const auto [l32, r32] = side_grams(f32, p32);
      aR_f[i] = r32.A - 0.5 * static_cast<double>(rs.n_right);
      bL_f[i] = l32.B - 0.5 * static_cast<double>(rs.n_left);
    });
    paired_gate(aR_b, bL_b, aR_f, bL_f, 0.05, "grid doubling");
  }
}

void c7_oat_exact(Criterion& c) {
  OatParams p;
  p.n_total = 60;
  p.chi = 0.2;
  p.asymmetry = 0.2;
  p.chi_cross = 0;
  p.input = InputStatistics::poissonian;
  const double t = 1.0 / (p.n_total * p.chi_a());  // twist strength chi * t * N = 1

  EnsembleOptions opt;
  opt.n_traj = 40000;
  opt.seed = 2009;
  const auto inputs = sample_oat_inputs(p, opt);
  const TwistedMoments tw = twisted_moments(p, t, inputs);
  const TwistedMoments ex = exact_twisted_moments(p, t);

  const double h = 2.0 * std::numbers::pi / 256.0;
  const double angles[3][2] = {{0.5, 1.0}, {2.0, 4.5}, {1.2, 0.2}};
  for (const auto& a : angles) {
    const double d_tw = oat_delta_phi_sqrt_nt(tw, a[0], a[1], h);
    const double d_ex = oat_delta_phi_sqrt_nt(ex, a[0], a[1], h);
    const double var_tw = readout_stats(tw, a[0], a[1]).var_s;
    const double var_ex = readout_stats(ex, a[0], a[1]).var_s;
    const bool fine = std::isfinite(d_ex) && std::isfinite(d_tw);
    c.gate(fine && std::abs(d_tw - d_ex) <= 0.05 * d_ex &&
               std::abs(var_tw - var_ex) <= 0.05 * var_ex,
           fmt("N=60 twist at (theta=%.2g, phi=%.2g): dphi %.5g vs exact %.5g, "
               "V(S) %.5g vs %.5g, both within 5%%",
               a[0], a[1], d_tw, d_ex, var_tw, var_ex));
  }
}

void c7_kinematics(Criterion& c) {
  MultimodeParams p;  // default grid, recoil and mass; free flight only
  const Grid1D& g = p.grid;
  const double sigma = 20e-6, x0 = -0.1e-3, T = 0.02;

  FieldPair f;
  f.a.resize(g.n);
  f.b.resize(g.n);
  std::vector<double> env(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    const double x = g.x(i);
    env[i] = std::exp(-(x - x0) * (x - x0) / (4.0 * sigma * sigma));
  }
  std::vector<double> e2(g.n);
  for (std::size_t i = 0; i < g.n; ++i) e2[i] = env[i] * env[i];
  const double scale = std::sqrt(5e4 / (pairwise_sum(e2) * g.dx()));
  for (std::size_t i = 0; i < g.n; ++i) {
    f.a[i] = scale * env[i];
    f.b[i] = scale * env[i] * std::polar(1.0, p.k0 * g.x(i));
  }

  free_propagate(f, p, T);

  const auto centroid = [&](const std::vector<cplx>& field) {
    std::vector<double> w(g.n), xw(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
      w[i] = std::norm(field[i]);
      xw[i] = g.x(i) * w[i];
    }
    return pairwise_sum(xw) / pairwise_sum(w);
  };
  const double measured = centroid(f.b) - centroid(f.a);
  const double expect = kHbar * p.k0 * T / p.mass;
  c.gate(std::abs(measured - expect) <= 1e-6 * expect,
         fmt("recoil drift %.9g m vs hbar k0 T / m = %.9g m (rel dev %.2g <= 1e-6)", measured,
             expect, std::abs(measured - expect) / expect));
}

void criterion_7(Criterion& c, const Shared& sh) {
  c7_conservation_fm(c);
  if (sh.mm_ready) {
    c7_conservation_mm(c, sh);
  } else {
    c.gate(false, "multimode conservation check skipped: " + sh.mm_error);
  }
  c7_kerr_and_pulses(c);
  c7_determinism(c, sh);
  if (sh.mm_ready) {
    c7_convergence(c, sh);
  } else {
    c.gate(false, "multimode convergence check skipped: " + sh.mm_error);
  }
  c7_oat_exact(c);
  c7_kinematics(c);
}

bool run_criterion(const char* name, const std::function<void(Criterion&)>& body) {
  Criterion c;
  const auto t0 = Clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.ok = false;
    c.notes.push_back(std::string("exception: ") + e.what());
  }
  std::printf("%s: %s  (%.1f s)\n", name, c.ok ? "PASS" : "FAIL", seconds_since(t0));
  for (const auto& n : c.notes) std::printf("    - %s\n", n.c_str());
  std::fflush(stdout);
  return c.ok;
}

}  // namespace

int main() {
  std::printf("twmix acceptance suite (desk scale: <= 16384 grid points, <= 1200 trajectories "
              "per production run)\n");
  std::fflush(stdout);
  const auto t0 = Clock::now();

  bool all_ok = true;
  all_ok &= run_criterion("C1 undepleted analytic baseline", criterion_1);
  all_ok &= run_criterion("C2 single-mode squeezing minimum", criterion_2);

  Shared sh;
  {
    const auto tc = Clock::now();
    try {
      sh.mm = make_multimode_params(ExperimentConfig{});
      sh.chi_mm = chi_from_profile(sh.mm.grid, sh.mm.psi0, sh.mm.u1d);
      sh.mm_ready = true;
    } catch (const std::exception& e) {
      sh.mm_error = e.what();
    }
    sh.calibration_seconds = seconds_since(tc);
  }

  all_ok &= run_criterion("C3 multimode squeezing floor",
                          [&](Criterion& c) { criterion_3(c, sh); });
  all_ok &= run_criterion("C4 interferometer sensitivity",
                          [&](Criterion& c) { criterion_4(c, sh); });
  all_ok &= run_criterion("C5 shot-noise control", criterion_5);
  all_ok &= run_criterion("C6 robustness ordering", criterion_6);
  all_ok &= run_criterion("C7 property suite", [&](Criterion& c) { criterion_7(c, sh); });

  std::printf("%s  (total %.1f s)\n", all_ok ? "ALL CRITERIA PASSED" : "SOME CRITERIA FAILED",
              seconds_since(t0));
  return all_ok ? 0 : 1;
}
