#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "twmix/ensemble.hpp"
#include "twmix/four_mode.hpp"
#include "twmix/grid.hpp"
#include "twmix/multimode.hpp"
#include "twmix/oat.hpp"

namespace twmix {

enum class ModelKind { four_mode, multimode };
enum class InteractionSource { calibrated, physical };

// Plain INI-style experiment description. Every physical quantity carries a
// mandatory unit token after the number; parsing is strict (unknown keys,
// missing units, and malformed values all raise ConfigError).
struct ExperimentConfig {
  // [run]
  ModelKind model = ModelKind::four_mode;
  std::size_t trajectories = 1200;
  std::uint64_t seed = 12345;
  int threads = 1;

  // [fwm]
  double nt_chi = 26800;  // 1/s, calibration product n_total * chi
  double fwm_n_aL = 1e5, fwm_n_bL = 1e3, fwm_n_aR = 1e3, fwm_n_bR = 1e5;
  double seed_phase_aR = 0, seed_phase_bL = 0;  // rad
  double t_mix = 0.12e-3;                       // s
  double fwm_dt = 1e-7;                         // s
  double omega_0 = 0, omega_k = 0;              // rad/s

  // [grid]
  Grid1D grid{16384, 2.1e-3, -0.55e-3};
  double x_split = 0.4e-3;  // m

  // [multimode]
  double mm_dt = 2e-7;                   // s
  double k0 = 16110731.55687293;         // rad/m
  double mass = 1.4431609e-25;           // kg
  double trap_omega = 31.41592653589793; // rad/s
  double r_perp = 0.55e-6;               // m
  double separation_time = 70e-3;        // s
  bool interacting_ground_state = true;
  InteractionSource interaction = InteractionSource::calibrated;
  double scattering_length = 5.3e-9;  // m

  // [interferometer]
  std::size_t phi2_points = 64;
  bool differential = true;

  // [scan]
  std::vector<double> tau_values = {0.5, 1.0, 1.5, 2.0, 2.68, 3.5, 4.0, 4.5, 5.0, 5.5};

  // [oat]
  double oat_n_total = 2e5;
  double oat_chi = 0.134;  // 1/s
  double oat_asymmetry = 0.058;
  double oat_chi_cross = 0;  // 1/s
  InputStatistics oat_input = InputStatistics::number_stabilized;

  // [robustness]
  double oat_n_large = 2e5, oat_n_small = 1e3;
  std::vector<double> epsilons = {
      -0.5,   -0.35,  -0.25,  -0.18, -0.12, -0.08, -0.05, -0.03, -0.02, -0.015,
      -0.01,  -0.0075, -0.005, -0.0025, 0.0025, 0.005, 0.0075, 0.01, 0.015, 0.02,
      0.03,   0.05,   0.08,   0.12,  0.18,  0.25,  0.35,  0.5};

  double fwm_n_total() const { return fwm_n_aL + fwm_n_bL + fwm_n_aR + fwm_n_bR; }
};

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);
// Canonical form: fixed section/key order, SI units, full precision.
// parse(serialize(c)) reproduces c exactly.
std::string serialize_config(const ExperimentConfig& c);
void validate_config(const ExperimentConfig& c);

std::uint64_t config_hash(const ExperimentConfig& c);
std::string config_hash_hex(const ExperimentConfig& c);
// Four independent 64-bit lanes over the canonical serialization; identifies
// the config in snapshot files (integrity check, not cryptographic).
std::array<std::uint8_t, 32> config_hash_wide(const ExperimentConfig& c);

FourModeParams make_four_mode_params(const ExperimentConfig& c);
EnsembleOptions make_ensemble_options(const ExperimentConfig& c);
// Solves the shared profile and interaction calibration; relatively costly.
MultimodeParams make_multimode_params(const ExperimentConfig& c);
OatParams make_oat_params(const ExperimentConfig& c);

}
