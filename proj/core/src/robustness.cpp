#include "twmix/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "twmix/errors.hpp"

namespace twmix {

namespace {

constexpr double kSlopeStep = 2.0 * std::numbers::pi / 256.0;

std::vector<double> with_zero(std::span<const double> epsilons) {
  std::vector<double> eps(epsilons.begin(), epsilons.end());
  eps.push_back(0.0);
  std::sort(eps.begin(), eps.end());
  eps.erase(std::unique(eps.begin(), eps.end()), eps.end());
  return eps;
}

}  // namespace

RobustnessCurve oat_robustness(const OatParams& p, const EnsembleOptions& opt,
                               std::span<const double> epsilons) {
  const OatOperatingPoint op = optimize_oat(p, opt);

  RobustnessCurve curve;
  curve.scheme = "oat";
  for (const double eps : with_zero(epsilons)) {
    OatParams q = p;
    q.n_total = p.n_total * (1.0 + eps);
    if (!(q.n_total > 1)) throw ConfigError("offset leaves no usable source occupation");
    const auto inputs = sample_oat_inputs(q, opt);
    const TwistedMoments m = twisted_moments(q, op.t_twist, inputs);
    curve.points.push_back({eps, oat_delta_phi_sqrt_nt(m, op.theta, op.phi, kSlopeStep)});
  }
  curve.critical_epsilon = sql_crossing(curve.points);
  return curve;
}

RobustnessCurve fwm_robustness(const FourModeParams& p, double t_mix,
                               const EnsembleOptions& opt,
                               std::span<const double> epsilons) {
  const PreparedEnsemble nominal = prepare_four_mode(p, t_mix, opt);
  SweepOptions sweep_opt;
  const SweepResult sweep = sensitivity_sweep(nominal, sweep_opt);
  const WorkingPoint wp{sweep.pulses, sweep.phi2_at_min, sweep_opt.differential};

  RobustnessCurve curve;
  curve.scheme = "fwm";
  for (const double eps : with_zero(epsilons)) {
    const double f = 1.0 + eps;
    if (!(f > 0)) throw ConfigError("offset leaves no usable source occupation");
    FourModeParams q = p;
    q.n_aL = p.n_aL * f;
    q.n_bL = p.n_bL * f;
    q.n_aR = p.n_aR * f;
    q.n_bR = p.n_bR * f;
    const PreparedEnsemble e = prepare_four_mode(q, t_mix, opt);
    curve.points.push_back({eps, delta_phi_sqrt_nt_at(e, wp, kSlopeStep)});
  }
  curve.critical_epsilon = sql_crossing(curve.points);
  return curve;
}

double sql_crossing(std::span<const RobustnessPoint> points) {
  // Walk outward from epsilon = 0 on each branch; first interpolated
  // crossing of delta_phi * sqrt(N) = 1 wins.
  std::vector<RobustnessPoint> pos, neg;
  for (const auto& pt : points)
    (pt.epsilon >= 0 ? pos : neg).push_back(pt);
  std::sort(pos.begin(), pos.end(),
            [](const auto& a, const auto& b) { return a.epsilon < b.epsilon; });
  std::sort(neg.begin(), neg.end(),
            [](const auto& a, const auto& b) { return a.epsilon > b.epsilon; });

  double best = std::numeric_limits<double>::infinity();
  const auto walk = [&](const std::vector<RobustnessPoint>& branch) {
    for (std::size_t i = 0; i + 1 < branch.size(); ++i) {
      const double d0 = branch[i].delta_phi_sqrt_nt;
      const double d1 = branch[i + 1].delta_phi_sqrt_nt;
      if (d0 < 1.0 && d1 >= 1.0) {
        const double w = (1.0 - d0) / (d1 - d0);
        const double eps = branch[i].epsilon + w * (branch[i + 1].epsilon - branch[i].epsilon);
        best = std::min(best, std::abs(eps));
        return;
      }
    }
  };
  walk(pos);
  walk(neg);
  return best;
}

}  // namespace twmix
