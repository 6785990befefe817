#pragma once

#include <span>
#include <string>
#include <vector>

#include "twmix/ensemble.hpp"
#include "twmix/four_mode.hpp"
#include "twmix/interferometer.hpp"
#include "twmix/oat.hpp"

namespace twmix {

// Sensitivity under source miscalibration: every working-point parameter
// (pulse phases, twist time, interrogation phase) is frozen at the nominal
// optimum found for epsilon = 0, then the inputs are scaled by (1 + epsilon)
// and the sensitivity is re-evaluated at the frozen settings.
struct RobustnessPoint {
  double epsilon = 0;
  double delta_phi_sqrt_nt = 0;
};

struct RobustnessCurve {
  std::string scheme;
  std::vector<RobustnessPoint> points;  // ascending epsilon
  // Smallest |epsilon| where the curve crosses shot noise (linear
  // interpolation between grid points); infinity if it stays below.
  double critical_epsilon = 0;
};

RobustnessCurve oat_robustness(const OatParams& p, const EnsembleOptions& opt,
                               std::span<const double> epsilons);

RobustnessCurve fwm_robustness(const FourModeParams& p, double t_mix,
                               const EnsembleOptions& opt,
                               std::span<const double> epsilons);

double sql_crossing(std::span<const RobustnessPoint> points);

}
