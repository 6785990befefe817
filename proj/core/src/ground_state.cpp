#include "twmix/ground_state.hpp"

#include <cmath>
#include <complex>
#include <vector>

#include "twmix/constants.hpp"
#include "twmix/errors.hpp"
#include "twmix/fft.hpp"
#include "twmix/statistics.hpp"

namespace twmix {

namespace {

void normalize(const Grid1D& g, std::vector<double>& psi) {
  std::vector<double> sq(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) sq[i] = psi[i] * psi[i];
  const double norm2 = pairwise_sum(sq) * g.dx();
  if (!(norm2 > 0)) throw NumericalError("profile normalization failed");
  const double scale = 1.0 / std::sqrt(norm2);
  for (auto& v : psi) v *= scale;
}

// Per-particle energy <T> + <V> + (g/2) sum psi^4 dx of a normalized real
// profile, kinetic part spectral.
double profile_energy(const Grid1D& g, const Trap1D& trap, double g_total,
                      std::span<const double> psi, Fft1D& fft) {
  const std::size_t n = g.n;
  std::vector<std::complex<double>> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = psi[i];
  fft.forward(c.data());
  std::vector<double> kin(n), pot(n);
  const double spec_w = g.dx() / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double k = g.k(i);
    kin[i] = kHbar * kHbar * k * k / (2.0 * trap.mass) * std::norm(c[i]) * spec_w;
    const double x = g.x(i);
    const double p2 = psi[i] * psi[i];
    pot[i] = (0.5 * trap.mass * trap.omega * trap.omega * x * x +
              0.5 * g_total * p2) * p2 * g.dx();
  }
  return pairwise_sum(kin) + pairwise_sum(pot);
}

}  // namespace

std::vector<double> harmonic_ground_state(const Grid1D& g, const Trap1D& trap) {
  g.validate();
  const double a2 = kHbar / (trap.mass * trap.omega);  // oscillator length^2
  std::vector<double> psi(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    const double x = g.x(i);
    psi[i] = std::exp(-x * x / (2.0 * a2));
  }
  normalize(g, psi);
  return psi;
}

double thomas_fermi_mu(const Trap1D& trap, double g_total) {
  if (!(g_total > 0)) throw NumericalError("Thomas-Fermi limit needs positive coupling");
  const double s = std::sqrt(0.5 * trap.mass * trap.omega * trap.omega);
  return std::pow(0.75 * g_total * s, 2.0 / 3.0);
}

std::vector<double> thomas_fermi_profile(const Grid1D& g, const Trap1D& trap, double g_total) {
  const double mu = thomas_fermi_mu(trap, g_total);
  std::vector<double> psi(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    const double x = g.x(i);
    const double v = 0.5 * trap.mass * trap.omega * trap.omega * x * x;
    psi[i] = v < mu ? std::sqrt((mu - v) / g_total) : 0.0;
  }
  normalize(g, psi);
  return psi;
}

GroundStateResult solve_ground_state(const Grid1D& g, const Trap1D& trap, double g_total,
                                     double dtau, double tol, std::size_t max_iter) {
  g.validate();
  if (g_total < 0) throw ConfigError("attractive coupling not supported");

  const std::size_t n = g.n;
  Fft1D fft(n);

  std::vector<double> psi = g_total > 0 ? thomas_fermi_profile(g, trap, g_total)
                                        : harmonic_ground_state(g, trap);

  // exp(-T dtau / (2 hbar)) and trap potential, both time-independent
  std::vector<double> half_kin(n), pot(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double k = g.k(i);
    half_kin[i] = std::exp(-kHbar * k * k * dtau / (4.0 * trap.mass));
    const double x = g.x(i);
    pot[i] = 0.5 * trap.mass * trap.omega * trap.omega * x * x;
  }

  std::vector<std::complex<double>> f(n);
  double energy = profile_energy(g, trap, g_total, psi, fft);
  std::size_t iter = 0;
  const std::size_t check_every = 50;
  bool converged = false;

  while (iter < max_iter) {
    for (std::size_t step = 0; step < check_every && iter < max_iter; ++step, ++iter) {
      for (std::size_t i = 0; i < n; ++i) f[i] = psi[i];
      fft.forward(f.data());
      for (std::size_t i = 0; i < n; ++i) f[i] *= half_kin[i];
      fft.inverse(f.data());
      for (std::size_t i = 0; i < n; ++i) {
        const double re = f[i].real();
        f[i] = re * std::exp(-(pot[i] + g_total * re * re) * dtau / kHbar);
      }
      fft.forward(f.data());
      for (std::size_t i = 0; i < n; ++i) f[i] *= half_kin[i];
      fft.inverse(f.data());
      for (std::size_t i = 0; i < n; ++i) psi[i] = std::abs(f[i]);
      normalize(g, psi);
    }
    const double e_new = profile_energy(g, trap, g_total, psi, fft);
    const double per_step = std::abs(e_new - energy) / static_cast<double>(check_every);
    energy = e_new;
    if (per_step <= tol * std::abs(e_new)) {
      converged = true;
      break;
    }
  }
  if (!converged) throw NumericalError("ground state relaxation did not converge");

  GroundStateResult res;
  res.psi = std::move(psi);
  res.energy = energy;
  res.mu = energy + 0.5 * g_total * quartic_integral(g, res.psi);
  res.iterations = iter;
  return res;
}

double quartic_integral(const Grid1D& g, std::span<const double> psi) {
  std::vector<double> q(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double p2 = psi[i] * psi[i];
    q[i] = p2 * p2;
  }
  return pairwise_sum(q) * g.dx();
}

double chi_from_profile(const Grid1D& g, std::span<const double> psi, double u1d) {
  return u1d * quartic_integral(g, psi) / kHbar;
}

double u1d_from_scattering(double a_s, double r_perp, double mass) {
  const double u0 = 4.0 * kPi * kHbar * kHbar * a_s / mass;
  return u0 / (kPi * r_perp * r_perp);
}

InteractionCalibration calibrate_interaction(const Grid1D& g, const Trap1D& trap,
                                             double n_total, double nt_chi_target,
                                             bool interacting) {
  if (!(n_total > 0)) throw ConfigError("total occupation must be positive");
  if (!(nt_chi_target > 0)) throw ConfigError("calibration product must be positive");
  const double chi_target = nt_chi_target / n_total;

  InteractionCalibration cal;
  if (!interacting) {
    cal.ground = solve_ground_state(g, trap, 0.0);
    cal.u1d = chi_target * kHbar / quartic_integral(g, cal.ground.psi);
    cal.chi = chi_from_profile(g, cal.ground.psi, cal.u1d);
    return cal;
  }

  // In the dense regime chi scales as u^(2/3) (the profile flattens as the
  // coupling grows), so this power-law update converges in a few rounds.
  double u = chi_target * kHbar / quartic_integral(g, harmonic_ground_state(g, trap));
  for (int round = 0; round < 40; ++round) {
    cal.ground = solve_ground_state(g, trap, n_total * u);
    const double chi = chi_from_profile(g, cal.ground.psi, u);
    if (std::abs(chi - chi_target) <= 1e-10 * chi_target) {
      cal.u1d = u;
      cal.chi = chi;
      return cal;
    }
    u *= std::pow(chi_target / chi, 1.5);
  }
  throw NumericalError("interaction calibration did not converge");
}

}  // namespace twmix
