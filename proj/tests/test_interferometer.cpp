#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "twmix/ensemble.hpp"
#include "twmix/errors.hpp"
#include "twmix/four_mode.hpp"
#include "twmix/interferometer.hpp"
#include "twmix/observables.hpp"
#include "twmix/statistics.hpp"

using namespace twmix;

namespace {

using cplx = std::complex<double>;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Production-like single-mode setup: n_total * chi = 26800 / s.
FourModeParams seeded_params() {
  FourModeParams p;
  p.chi = 26800.0 / 2.02e5;
  return p;
}

SideGram rank_one(cplx a, cplx b) {
  return {std::norm(a), std::norm(b), a * std::conj(b), 1};
}

double trace(const SideGram& g) { return g.A + g.B; }

bool unitary(const Mat2& u, double tol) {
  // Rows of U^dagger U against the identity.
  const cplx d00 = std::conj(u.m00) * u.m00 + std::conj(u.m10) * u.m10;
  const cplx d01 = std::conj(u.m00) * u.m01 + std::conj(u.m10) * u.m11;
  const cplx d11 = std::conj(u.m01) * u.m01 + std::conj(u.m11) * u.m11;
  return std::abs(d00 - 1.0) < tol && std::abs(d01) < tol && std::abs(d11 - 1.0) < tol;
}

}  // namespace

TEST_CASE("couplers and phase pulses compose unitarily") {
  const Mat2 bs = Mat2::beam_splitter();
  CHECK(unitary(bs, 1e-15));
  CHECK(bs.m00.real() == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(bs.m01.imag() == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-15));

  CHECK(unitary(Mat2::phase_on_b(0.73), 1e-15));

  Mat2 chain;
  for (int k = 0; k < 10; ++k)
    chain = Mat2::beam_splitter() * Mat2::phase_on_b(0.37 * k - 1.1) * chain;
  CHECK(unitary(chain, 1e-12));

  // Transforming a rank-one Gram equals transforming the amplitudes.
  const cplx a{1.3, -0.4}, b{-0.2, 0.9};
  const SideGram g = rank_one(a, b);
  const SideGram gt = transform(g, chain);
  const cplx at = chain.m00 * a + chain.m01 * b;
  const cplx bt = chain.m10 * a + chain.m11 * b;
  CHECK(gt.A == doctest::Approx(std::norm(at)).epsilon(1e-12));
  CHECK(gt.B == doctest::Approx(std::norm(bt)).epsilon(1e-12));
  CHECK(gt.C.real() == doctest::Approx((at * std::conj(bt)).real()).epsilon(1e-12));
  CHECK(gt.C.imag() == doctest::Approx((at * std::conj(bt)).imag()).epsilon(1e-12));
  CHECK(trace(gt) == doctest::Approx(trace(g)).epsilon(1e-12));
  CHECK(gt.modes == g.modes);
}

TEST_CASE("imbalance after a phase pulse and coupler follows the closed form") {
  const SideGram g{2.4, 1.1, cplx{0.7, -1.3}, 5};
  for (const double phi : {0.0, 0.31, 1.57, 2.9, -2.2}) {
    const Mat2 u = Mat2::beam_splitter() * Mat2::phase_on_b(phi);
    const SideGram gt = transform(g, u);
    const double expect = -2.0 * std::imag(g.C * std::polar(1.0, -phi));
    CHECK(gt.A - gt.B == doctest::Approx(expect).epsilon(1e-12));
    CHECK(trace(gt) == doctest::Approx(trace(g)).epsilon(1e-12));
  }
}

TEST_CASE("balance phase nulls the post-coupler imbalance") {
  const SideGram g{3.0, 2.0, cplx{0.8, 0.6}, 1};
  const BalanceResult r = balance_phase(g);
  CHECK_FALSE(r.flat);
  const double target = std::arg(g.C);
  const double wrapped = std::remainder(r.phi - target, std::numbers::pi);
  CHECK(std::abs(wrapped) < 1e-5);

  const SideGram gt = transform(g, Mat2::beam_splitter() * Mat2::phase_on_b(r.phi));
  CHECK(std::abs(gt.A - gt.B) < 1e-4 * trace(g));

  // Balancing again moves nothing appreciable.
  const BalanceResult r2 = balance_phase(gt);
  const SideGram gtt = transform(gt, Mat2::beam_splitter() * Mat2::phase_on_b(r2.phi));
  CHECK(std::abs(gtt.A - gtt.B) < 1e-4 * trace(g));

  // No coherence: nothing to balance.
  const SideGram flat_gram{1.0, 1.0, cplx{0.0, 0.0}, 1};
  CHECK(balance_phase(flat_gram).flat);
}

TEST_CASE("pulse chains conserve population per trajectory") {
  FourModeParams p = seeded_params();
  EnsembleOptions opt;
  opt.n_traj = 100;
  opt.seed = 21;
  const double t_mix = 2.0 / 26800.0;  // moderate gain
  const PreparedEnsemble e = prepare_four_mode(p, t_mix, opt);

  const PulsePhases ph = balance_pulses(e);
  const StagedEnsemble st = apply_preparation_pulses(e, ph);
  Mat2 extra;
  for (int k = 0; k < 10; ++k)
    extra = Mat2::beam_splitter() * Mat2::phase_on_b(0.41 * k + 0.2) * extra;
  for (std::size_t i = 0; i < opt.n_traj; ++i) {
    const double before = trace(e.left[i]) + trace(e.right[i]);
    double after = trace(st.left[i]) + trace(st.right[i]);
    CHECK(after == doctest::Approx(before).epsilon(1e-10));
    after = trace(transform(st.left[i], extra)) + trace(transform(st.right[i], extra));
    CHECK(after == doctest::Approx(before).epsilon(1e-10));
  }
}

TEST_CASE("coherent input interrogates at the projection-noise level") {
  FourModeParams p = seeded_params();
  p.n_aL = 900;
  p.n_bR = 900;
  p.n_aR = 100;
  p.n_bL = 100;
  EnsembleOptions opt;
  opt.n_traj = 800;
  opt.seed = 4;
  opt.threads = 2;

  // No mixing: four independent coherent modes.
  const PreparedEnsemble e = prepare_four_mode(p, 0.0, opt);
  CHECK(e.mean_total == doctest::Approx(p.n_total()).epsilon(0.02));

  SweepOptions sw;
  const SweepResult res = sensitivity_sweep(e, sw);
  REQUIRE(res.points.size() == sw.n_phi);
  CHECK(res.points[1].phi2 == doctest::Approx(kTwoPi / 64.0).epsilon(1e-12));

  CHECK(res.min_delta_phi_sqrt_nt > 0.9);
  CHECK(res.min_delta_phi_sqrt_nt < 1.1);
  CHECK(res.visibility_population > 0.99);

  const double band = 5.0 * std::sqrt(2.0 / (opt.n_traj - 1.0));
  for (const SweepPoint& pt : res.points) {
    CHECK(pt.var_s_over_nt > 1.0 - band);
    CHECK(pt.var_s_over_nt < 1.0 + band);
  }

  // The reported minimum is the minimum of the curve.
  double best = std::numeric_limits<double>::infinity();
  double at = 0;
  for (const SweepPoint& pt : res.points) {
    if (pt.delta_phi_sqrt_nt < best) {
      best = pt.delta_phi_sqrt_nt;
      at = pt.phi2;
    }
  }
  CHECK(res.min_delta_phi_sqrt_nt == best);
  CHECK(res.phi2_at_min == at);
}

TEST_CASE("squeezed preparation beats the projection noise") {
  const FourModeParams p = seeded_params();
  EnsembleOptions opt;
  opt.n_traj = 800;
  opt.seed = 6;
  opt.threads = 2;
  const double t_mix = 1.2e-4;  // deep in the squeezed regime

  const PreparedEnsemble e = prepare_four_mode(p, t_mix, opt);
  // Mixing only converts atoms between modes; the total is conserved up to
  // sampling noise (SE of the mean ~ sqrt(n_total)/sqrt(n_traj)).
  const double se_total = std::sqrt(2.0 * p.n_total() / opt.n_traj);
  CHECK(std::abs(e.mean_total - p.n_total()) < 5.0 * se_total);

  const SweepResult res = sensitivity_sweep(e, {});
  CHECK(res.min_delta_phi_sqrt_nt < 0.7);
  CHECK(res.min_delta_phi_sqrt_nt > 0.1);
  CHECK(res.visibility_population > 0.99);

  double v_min = std::numeric_limits<double>::infinity();
  for (const SweepPoint& pt : res.points) v_min = std::min(v_min, pt.var_s_over_nt);
  CHECK(v_min < 0.25);
  CHECK(v_min > 0.005);

  // Frozen working point reproduces the swept optimum.
  WorkingPoint wp;
  wp.pulses = res.pulses;
  wp.phi2 = res.phi2_at_min;
  wp.differential = true;
  const double frozen = delta_phi_sqrt_nt_at(e, wp);
  CHECK(frozen == doctest::Approx(res.min_delta_phi_sqrt_nt).epsilon(0.25));

  SweepOptions tiny;
  tiny.n_phi = 3;
  CHECK_THROWS_AS(sensitivity_sweep(e, tiny), ConfigError);
}

TEST_CASE("prepared four-mode ensembles are thread-count invariant") {
  const FourModeParams p = seeded_params();
  EnsembleOptions a;
  a.n_traj = 130;
  a.seed = 9;
  EnsembleOptions b = a;
  b.threads = 4;

  const PreparedEnsemble ea = prepare_four_mode(p, 5e-5, a);
  const PreparedEnsemble eb = prepare_four_mode(p, 5e-5, b);
  CHECK(ea.mean_total == eb.mean_total);
  for (const std::size_t i : {std::size_t{0}, std::size_t{64}, std::size_t{129}}) {
    CHECK(ea.left[i].A == eb.left[i].A);
    CHECK(ea.left[i].C.imag() == eb.left[i].C.imag());
    CHECK(ea.right[i].B == eb.right[i].B);
  }
}
