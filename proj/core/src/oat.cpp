#include "twmix/oat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "twmix/errors.hpp"
#include "twmix/statistics.hpp"

namespace twmix {

namespace {

using cplx = std::complex<double>;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInvSqrt2 = 0.7071067811865475244;

inline cplx unit_phase(double ph) {
#if defined(__GNUC__) && defined(__linux__)
  double s, c;
  ::sincos(ph, &s, &c);
  return {c, s};
#else
  return {std::cos(ph), std::sin(ph)};
#endif
}

// Linear form giving the population difference after phase_on_b(theta),
// coupler, phase_on_b(phi), coupler, as S = c . (|a|^2, |b|^2, Re ab*, Im ab*).
struct SignalForm {
  std::array<double, 4> c{};

  static SignalForm at(double theta, double phi) {
    // U = BS P(phi) BS P(theta), BS = [[1, -i], [-i, 1]]/sqrt(2)
    const cplx ep = unit_phase(phi);
    const cplx et = unit_phase(theta);
    // BS P(phi) BS = [[1 - ep, -i(1 + ep)], [-i(1 + ep), -(1 - ep)]]/2
    const cplx u00 = 0.5 * (1.0 - ep);
    const cplx u01 = cplx(0, -0.5) * (1.0 + ep);
    const cplx u10 = u01;
    const cplx u11 = -u00;
    // right-multiply by P(theta): second column picks up et
    const cplx v00 = u00, v01 = u01 * et;
    const cplx v10 = u10, v11 = u11 * et;
    const cplx wa = v00 * std::conj(v01);
    const cplx wb = v10 * std::conj(v11);
    SignalForm f;
    f.c[0] = std::norm(v00) - std::norm(v10);
    f.c[1] = std::norm(v01) - std::norm(v11);
    f.c[2] = 2.0 * (wa.real() - wb.real());
    f.c[3] = -2.0 * (wa.imag() - wb.imag());
    return f;
  }

  double mean_s(const TwistedMoments& m) const {
    return c[0] * m.mean[0] + c[1] * m.mean[1] + c[2] * m.mean[2] + c[3] * m.mean[3];
  }

  double var_s(const TwistedMoments& m) const {
    double v = 0;
    for (int p = 0; p < 4; ++p)
      for (int q = 0; q < 4; ++q) v += c[p] * m.cov[p][q] * c[q];
    return v - 0.5;  // two-mode ordering floor
  }
};

double delta_phi_from_forms(const TwistedMoments& m, const SignalForm& at,
                            const SignalForm& up, const SignalForm& dn, double h) {
  const double slope = (up.mean_s(m) - dn.mean_s(m)) / (2.0 * h);
  const double var = at.var_s(m);
  const double nt = m.mean[0] + m.mean[1] - 1.0;
  if (slope == 0.0 || var < 0 || !(nt > 0)) return std::numeric_limits<double>::infinity();
  return std::sqrt(var) / std::abs(slope) * std::sqrt(nt);
}

}  // namespace

TwoMode sample_oat_input(const OatParams& p, RngStream& rng) {
  const cplx mean = std::sqrt(p.n_total);
  TwoMode s;
  s.a = p.input == InputStatistics::number_stabilized ? sample_number_stabilized(mean, rng)
                                                      : sample_coherent(mean, rng);
  s.b = sample_coherent(0.0, rng);
  return s;
}

void kerr_phase(TwoMode& s, const OatParams& p, double t) {
  const double na = std::norm(s.a), nb = std::norm(s.b);
  const double pa = -t * (p.chi_a() * (na - 1.0) + p.chi_cross * (nb - 0.5));
  const double pb = -t * (p.chi_b() * (nb - 1.0) + p.chi_cross * (na - 0.5));
  s.a *= unit_phase(pa);
  s.b *= unit_phase(pb);
}

std::vector<TwoMode> sample_oat_inputs(const OatParams& p, const EnsembleOptions& opt) {
  std::vector<TwoMode> inputs(opt.n_traj);
  for_each_trajectory(opt, [&](std::size_t i, RngStream& rng) {
    inputs[i] = sample_oat_input(p, rng);
  });
  return inputs;
}

TwistedMoments twisted_moments(const OatParams& p, double t_twist,
                               std::span<const TwoMode> inputs) {
  const std::size_t n = inputs.size();
  if (n < 2) throw ConfigError("moments need at least two trajectories");

  std::vector<double> k(n * 4);
  for (std::size_t i = 0; i < n; ++i) {
    TwoMode s = inputs[i];
    const cplx a = kInvSqrt2 * (s.a - cplx(0, 1) * s.b);
    const cplx b = kInvSqrt2 * (s.b - cplx(0, 1) * s.a);
    s = {a, b};
    kerr_phase(s, p, t_twist);
    const cplx cross = s.a * std::conj(s.b);
    k[i * 4 + 0] = std::norm(s.a);
    k[i * 4 + 1] = std::norm(s.b);
    k[i * 4 + 2] = cross.real();
    k[i * 4 + 3] = cross.imag();
  }

  TwistedMoments m;
  m.n_traj = n;
  std::vector<double> col(n), prod(n);
  std::array<std::vector<double>, 4> centered;
  for (int p_i = 0; p_i < 4; ++p_i) {
    for (std::size_t i = 0; i < n; ++i) col[i] = k[i * 4 + p_i];
    m.mean[p_i] = mean(col);
    centered[p_i].resize(n);
    for (std::size_t i = 0; i < n; ++i) centered[p_i][i] = col[i] - m.mean[p_i];
  }
  for (int p_i = 0; p_i < 4; ++p_i)
    for (int q = p_i; q < 4; ++q) {
      for (std::size_t i = 0; i < n; ++i) prod[i] = centered[p_i][i] * centered[q][i];
      const double cov = pairwise_sum(prod) / static_cast<double>(n - 1);
      m.cov[p_i][q] = cov;
      m.cov[q][p_i] = cov;
    }
  return m;
}

ReadoutStats readout_stats(const TwistedMoments& m, double theta, double phi) {
  const SignalForm f = SignalForm::at(theta, phi);
  return {f.mean_s(m), f.var_s(m), m.mean[0] + m.mean[1] - 1.0};
}

double oat_delta_phi_sqrt_nt(const TwistedMoments& m, double theta, double phi, double h) {
  return delta_phi_from_forms(m, SignalForm::at(theta, phi), SignalForm::at(theta, phi + h),
                              SignalForm::at(theta, phi - h), h);
}

OatOperatingPoint optimize_oat(const OatParams& p, const EnsembleOptions& opt) {
  if (!(p.chi_shear() > 0)) throw ConfigError("shear rate must be positive");
  if (!(p.n_total > 1)) throw ConfigError("source occupation must exceed one");

  const std::vector<TwoMode> inputs = sample_oat_inputs(p, opt);
  const double h = kTwoPi / 256.0;

  // Best (theta, phi) for a fixed twist, theta on a grid then refined by
  // golden section; phi stays on its grid (it only picks the fringe point).
  struct Inner {
    double theta = 0, phi = 0;
    double dphi = std::numeric_limits<double>::infinity();
  };
  const auto best_readout = [&](const TwistedMoments& m) {
    constexpr std::size_t n_theta = 64, n_phi = 256;
    const auto eval_theta = [&](double theta) {
      Inner in;
      in.theta = theta;
      std::array<SignalForm, n_phi> forms;
      for (std::size_t j = 0; j < n_phi; ++j)
        forms[j] = SignalForm::at(theta, kTwoPi * static_cast<double>(j) / n_phi);
      for (std::size_t j = 0; j < n_phi; ++j) {
        const double d = delta_phi_from_forms(m, forms[j], forms[(j + 1) % n_phi],
                                              forms[(j + n_phi - 1) % n_phi], h);
        if (d < in.dphi) {
          in.dphi = d;
          in.phi = kTwoPi * static_cast<double>(j) / n_phi;
        }
      }
      return in;
    };

    Inner best;
    for (std::size_t jt = 0; jt < n_theta; ++jt) {
      const Inner in = eval_theta(kTwoPi * static_cast<double>(jt) / n_theta);
      if (in.dphi < best.dphi) best = in;
    }
    const double gr = 0.6180339887498949;
    double lo = best.theta - kTwoPi / n_theta, hi = best.theta + kTwoPi / n_theta;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    Inner f1 = eval_theta(x1), f2 = eval_theta(x2);
    while (hi - lo > 1e-5) {
      if (f1.dphi < f2.dphi) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - gr * (hi - lo);
        f1 = eval_theta(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + gr * (hi - lo);
        f2 = eval_theta(x2);
      }
    }
    return f1.dphi < best.dphi || f2.dphi < best.dphi ? (f1.dphi < f2.dphi ? f1 : f2) : best;
  };

  const double q_lo = 0.5;
  const double q_hi = 4.0 * std::max(std::cbrt(p.n_total), 2.0);
  constexpr std::size_t n_q = 36;

  OatOperatingPoint best;
  best.delta_phi_sqrt_nt = std::numeric_limits<double>::infinity();
  const auto eval_twist = [&](double q) {
    const double t = q / (p.n_total * p.chi_shear());
    const Inner in = best_readout(twisted_moments(p, t, inputs));
    if (in.dphi < best.delta_phi_sqrt_nt)
      best = {t, q, in.theta, in.phi, in.dphi};
    return in.dphi;
  };

  double best_q = q_lo;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n_q; ++j) {
    const double q = q_lo * std::pow(q_hi / q_lo, static_cast<double>(j) / (n_q - 1));
    const double d = eval_twist(q);
    if (d < best_d) {
      best_d = d;
      best_q = q;
    }
  }
  const double step = std::pow(q_hi / q_lo, 1.0 / (n_q - 1));
  const double gr = 0.6180339887498949;
  double lo = std::log(best_q / step), hi = std::log(best_q * step);
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = eval_twist(std::exp(x1)), f2 = eval_twist(std::exp(x2));
  for (int it = 0; it < 24; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = eval_twist(std::exp(x1));
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = eval_twist(std::exp(x2));
    }
  }
  return best;
}

}  // namespace twmix
