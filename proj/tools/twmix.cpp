#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>

#include "twmix/checkpoint.hpp"
#include "twmix/config.hpp"
#include "twmix/csv.hpp"
#include "twmix/errors.hpp"
#include "twmix/fft.hpp"
#include "twmix/four_mode.hpp"
#include "twmix/ground_state.hpp"
#include "twmix/interferometer.hpp"
#include "twmix/multimode.hpp"
#include "twmix/observables.hpp"
#include "twmix/robustness.hpp"
#include "twmix/statistics.hpp"
#include "twmix/version.hpp"

namespace {

using namespace twmix;

struct GlobalArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

ExperimentConfig load_effective_config(const GlobalArgs& g) {
  ExperimentConfig c = g.config_path.empty() ? ExperimentConfig{} : load_config(g.config_path);
  if (g.seed) c.seed = *g.seed;
  if (g.threads) c.threads = *g.threads;
  validate_config(c);
  return c;
}

std::vector<double> times_from_taus(const ExperimentConfig& c, double chi) {
  std::vector<double> times;
  times.reserve(c.tau_values.size());
  for (const double tau : c.tau_values) times.push_back(tau / (chi * c.fwm_n_total()));
  return times;
}

void write_scan_csv(const std::string& path, const ExperimentConfig& c,
                    const std::vector<ScanPoint>& points) {
  CsvWriter csv(path);
  csv.comment(std::string("twmix ") + kVersion);
  csv.comment("config_hash: " + config_hash_hex(c));
  csv.comment("seed: " + std::to_string(c.seed));
  std::vector<std::string> cols = {"t", "tau", "n_aL", "n_bL", "n_aR", "n_bR"};
  for (const char* name : kPairNames) cols.push_back(std::string("v_") + name);
  csv.header(cols);
  for (const auto& pt : points) {
    std::vector<double> row = {pt.t, pt.tau, pt.mean_n.aL, pt.mean_n.bL,
                               pt.mean_n.aR, pt.mean_n.bR};
    for (const double v : pt.pairs.v) row.push_back(v);
    csv.row(row);
  }
}

CheckpointHeader make_header(const ExperimentConfig& c, std::uint32_t model,
                             std::uint64_t values_per_traj) {
  CheckpointHeader h;
  h.config_hash = config_hash_wide(c);
  h.seed = c.seed;
  h.created_unix = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::seconds>(
          std::chrono::system_clock::now().time_since_epoch()).count());
  h.model = model;
  h.n_traj = c.trajectories;
  h.values_per_traj = values_per_traj;
  if (model == kModelMultimode) {
    h.grid_n = c.grid.n;
    h.grid_length = c.grid.length;
    h.grid_x_min = c.grid.x_min;
  }
  return h;
}

int cmd_prepare(const GlobalArgs& g, const std::string& out_path) {
  const ExperimentConfig c = load_effective_config(g);
  const EnsembleOptions opt = make_ensemble_options(c);

  if (c.model == ModelKind::four_mode) {
    const FourModeParams p = make_four_mode_params(c);
    CheckpointWriter writer(out_path, make_header(c, kModelFourMode, 4));
    const auto e = prepare_four_mode(p, c.t_mix, opt,
                                     [&](std::size_t i, const FourModeState& s) {
      const std::complex<double> vals[4] = {s.aL, s.bL, s.aR, s.bR};
      writer.write_trajectory(i, vals);
    });
    writer.finish();
    std::printf("prepared %zu single-mode trajectories at t_mix = %g s\n",
                opt.n_traj, c.t_mix);
    std::printf("mean total occupation: %.6g\n", e.mean_total);
  } else {
    const MultimodeParams p = make_multimode_params(c);
    CheckpointWriter writer(out_path, make_header(c, kModelMultimode, 2 * c.grid.n));
    std::vector<std::complex<double>> buf(2 * c.grid.n);
    const auto e = prepare_multimode(p, c.t_mix, opt,
                                     [&](std::size_t i, const FieldPair& f) {
      std::copy(f.a.begin(), f.a.end(), buf.begin());
      std::copy(f.b.begin(), f.b.end(), buf.begin() + static_cast<std::ptrdiff_t>(c.grid.n));
      writer.write_trajectory(i, buf);
    });
    writer.finish();
    std::printf("prepared %zu multimode trajectories at t_mix = %g s (after separation)\n",
                opt.n_traj, c.t_mix);
    std::printf("mean total occupation: %.6g\n", e.mean_total);
  }
  std::printf("snapshot: %s\n", out_path.c_str());
  return 0;
}

int cmd_scan(const GlobalArgs& g, const std::string& out_path) {
  const ExperimentConfig c = load_effective_config(g);
  const EnsembleOptions opt = make_ensemble_options(c);

  std::vector<ScanPoint> points;
  if (c.model == ModelKind::four_mode) {
    const FourModeParams p = make_four_mode_params(c);
    points = four_mode_scan(p, times_from_taus(c, p.chi), opt);
  } else {
    const MultimodeParams p = make_multimode_params(c);
    const double chi = chi_from_profile(p.grid, p.psi0, p.u1d);
    MultimodeScanOptions scan;
    scan.times = times_from_taus(c, chi);
    points = multimode_scan(p, scan, opt);
  }
  write_scan_csv(out_path, c, points);

  double v_min = std::numeric_limits<double>::infinity();
  double tau_min = 0;
  for (const auto& pt : points)
    if (pt.pairs.aR_bL() < v_min) {
      v_min = pt.pairs.aR_bL();
      tau_min = pt.tau;
    }
  std::printf("scanned %zu points; min v(aR,bL) = %.4g at tau = %.4g\n",
              points.size(), v_min, tau_min);
  std::printf("table: %s\n", out_path.c_str());
  return 0;
}

PreparedEnsemble ensemble_from_snapshot(const ExperimentConfig& c, const std::string& path) {
  const auto hash = config_hash_wide(c);
  const Checkpoint cp = read_checkpoint(path, &hash);
  if (cp.header.n_traj != c.trajectories)
    throw CheckpointError("snapshot trajectory count does not match config");

  PreparedEnsemble e;
  const std::size_t n_traj = cp.header.n_traj;
  e.left.resize(n_traj);
  e.right.resize(n_traj);

  if (cp.header.model == kModelFourMode) {
    if (cp.header.values_per_traj != 4)
      throw CheckpointError("unexpected single-mode snapshot geometry");
    for (std::size_t i = 0; i < n_traj; ++i) {
      const auto v = cp.trajectory(i);
      e.left[i] = {std::norm(v[0]), std::norm(v[1]), v[0] * std::conj(v[1]), 1};
      e.right[i] = {std::norm(v[2]), std::norm(v[3]), v[2] * std::conj(v[3]), 1};
    }
  } else if (cp.header.model == kModelMultimode) {
    if (cp.header.grid_n != c.grid.n || cp.header.grid_length != c.grid.length ||
        cp.header.grid_x_min != c.grid.x_min)
      throw CheckpointError("snapshot grid does not match config");
    if (cp.header.values_per_traj != 2 * c.grid.n)
      throw CheckpointError("unexpected multimode snapshot geometry");
    MultimodeParams p;  // only grid and split are needed for readout
    p.grid = c.grid;
    p.x_split = c.x_split;
    FieldPair f;
    f.a.resize(c.grid.n);
    f.b.resize(c.grid.n);
    for (std::size_t i = 0; i < n_traj; ++i) {
      const auto v = cp.trajectory(i);
      std::copy(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(c.grid.n), f.a.begin());
      std::copy(v.begin() + static_cast<std::ptrdiff_t>(c.grid.n), v.end(), f.b.begin());
      const auto [gl, gr] = side_grams(f, p);
      e.left[i] = gl;
      e.right[i] = gr;
      e.modes_left = gl.modes;
      e.modes_right = gr.modes;
    }
  } else {
    throw CheckpointError("unknown model tag in snapshot");
  }

  std::vector<double> totals(n_traj);
  for (std::size_t i = 0; i < n_traj; ++i)
    totals[i] = e.left[i].pop_a() + e.left[i].pop_b() + e.right[i].pop_a() + e.right[i].pop_b();
  e.mean_total = mean(totals);
  return e;
}

int cmd_interfere(const GlobalArgs& g, const std::string& out_path,
                  const std::string& snapshot_path) {
  const ExperimentConfig c = load_effective_config(g);
  const EnsembleOptions opt = make_ensemble_options(c);

  PreparedEnsemble e;
  if (!snapshot_path.empty()) {
    e = ensemble_from_snapshot(c, snapshot_path);
  } else if (c.model == ModelKind::four_mode) {
    e = prepare_four_mode(make_four_mode_params(c), c.t_mix, opt);
  } else {
    e = prepare_multimode(make_multimode_params(c), c.t_mix, opt);
  }

  SweepOptions sweep_opt;
  sweep_opt.n_phi = c.phi2_points;
  sweep_opt.differential = c.differential;
  const SweepResult res = sensitivity_sweep(e, sweep_opt);

  CsvWriter csv(out_path);
  csv.comment(std::string("twmix ") + kVersion);
  csv.comment("config_hash: " + config_hash_hex(c));
  csv.comment("seed: " + std::to_string(c.seed));
  csv.comment("mean_total: " + format_double(res.mean_total));
  csv.comment("min_delta_phi_sqrtNt: " + format_double(res.min_delta_phi_sqrt_nt) +
              " at phi2 = " + format_double(res.phi2_at_min));
  csv.comment("visibility_population: " + format_double(res.visibility_population));
  csv.comment("visibility_signal: " + format_double(res.visibility_signal));
  const std::vector<std::string> cols = {"phi2", "mean_S", "var_S_over_Nt",
                                         "delta_phi_sqrtNt", "N_aL", "N_bL", "N_aR", "N_bR"};
  csv.header(cols);
  for (const auto& pt : res.points)
    csv.row({pt.phi2, pt.mean_s, pt.var_s_over_nt, pt.delta_phi_sqrt_nt,
             pt.mean_n.aL, pt.mean_n.bL, pt.mean_n.aR, pt.mean_n.bR});

  std::printf("min delta_phi * sqrt(Nt) = %.4g at phi2 = %.4g rad\n",
              res.min_delta_phi_sqrt_nt, res.phi2_at_min);
  std::printf("visibility (population / signal): %.4f / %.4f\n",
              res.visibility_population, res.visibility_signal);
  std::printf("table: %s\n", out_path.c_str());
  return 0;
}

int cmd_robustness(const GlobalArgs& g, const std::string& out_path) {
  const ExperimentConfig c = load_effective_config(g);
  const EnsembleOptions opt = make_ensemble_options(c);

  std::vector<RobustnessCurve> curves;
  {
    OatParams p = make_oat_params(c);
    p.n_total = c.oat_n_large;
    curves.push_back(oat_robustness(p, opt, c.epsilons));
    curves.back().scheme = "oat_large";
  }
  {
    OatParams p = make_oat_params(c);
    p.n_total = c.oat_n_small;
    curves.push_back(oat_robustness(p, opt, c.epsilons));
    curves.back().scheme = "oat_small";
  }
  {
    const FourModeParams p = make_four_mode_params(c);
    curves.push_back(fwm_robustness(p, c.t_mix, opt, c.epsilons));
  }

  CsvWriter csv(out_path);
  csv.comment(std::string("twmix ") + kVersion);
  csv.comment("config_hash: " + config_hash_hex(c));
  csv.comment("seed: " + std::to_string(c.seed));
  for (const auto& curve : curves)
    csv.comment("critical_epsilon " + curve.scheme + ": " +
                format_double(curve.critical_epsilon));
  const std::vector<std::string> cols = {"scheme", "epsilon", "delta_phi_sqrtNt"};
  csv.header(cols);
  for (const auto& curve : curves)
    for (const auto& pt : curve.points)
      csv.row(curve.scheme, {pt.epsilon, pt.delta_phi_sqrt_nt});

  for (const auto& curve : curves)
    std::printf("%-10s critical |epsilon| = %.4g\n", curve.scheme.c_str(),
                curve.critical_epsilon);
  std::printf("table: %s\n", out_path.c_str());
  return 0;
}

int cmd_selftest() {
  // Quick internal consistency checks, seconds not minutes.
  {
    RngStream rng(7, 0);
    std::vector<double> pops(20000);
    for (auto& v : pops) v = std::norm(sample_coherent(0.0, rng)) - 0.5;
    const double m = mean(pops);
    if (std::abs(m) > 0.02) throw NumericalError("selftest: vacuum population off");
    std::printf("ok: vacuum sampling\n");
  }
  {
    FourModeParams p;
    RngStream rng(11, 3);
    FourModeState s = sample_four_mode(p, rng);
    const auto before = four_mode_invariants(s);
    evolve_four_mode(s, p, 5e-5);
    const auto after = four_mode_invariants(s);
    for (int i = 0; i < 3; ++i)
      if (std::abs(after[i] - before[i]) > 1e-6 * before[i])
        throw NumericalError("selftest: flow invariants drifted");
    std::printf("ok: single-mode flow invariants\n");
  }
  {
    SideGram gr{2e5, 1e3, {300.0, -200.0}, 1};
    const BalanceResult b = balance_phase(gr);
    const double expect = std::remainder(std::arg(gr.C), 2.0 * std::numbers::pi);
    const double got = std::remainder(b.phi - expect, std::numbers::pi);
    if (std::abs(got) > 1e-5) throw NumericalError("selftest: balance search off");
    std::printf("ok: balance search\n");
  }
  {
    Fft1D fft(1024);
    std::vector<std::complex<double>> v(1024);
    RngStream rng(3, 1);
    for (auto& z : v) z = rng.complex_normal(1.0);
    auto w = v;
    fft.forward(w.data());
    fft.inverse(w.data());
    for (std::size_t i = 0; i < v.size(); ++i)
      if (std::abs(w[i] - v[i]) > 1e-12)
        throw NumericalError("selftest: FFT round trip failed");
    std::printf("ok: spectral round trip\n");
  }
  {
    const auto tmp = std::filesystem::temp_directory_path() / "twmix_selftest.bin";
    CheckpointHeader h;
    h.n_traj = 2;
    h.values_per_traj = 4;
    CheckpointWriter w(tmp.string(), h);
    const std::complex<double> row0[4] = {{1, 2}, {3, 4}, {5, 6}, {7, 8}};
    const std::complex<double> row1[4] = {{-1, 0}, {0, -1}, {2, 2}, {3, -3}};
    w.write_trajectory(1, row1);
    w.write_trajectory(0, row0);
    w.finish();
    const Checkpoint cp = read_checkpoint(tmp.string());
    if (cp.trajectory(0)[2] != row0[2] || cp.trajectory(1)[3] != row1[3])
      throw NumericalError("selftest: snapshot round trip failed");
    std::filesystem::remove(tmp);
    std::printf("ok: snapshot round trip\n");
  }
  std::printf("selftest passed\n");
  return 0;
}

int cmd_emit_config(const std::string& out_path) {
  const ExperimentConfig c;
  const std::string text = serialize_config(c);
  if (out_path.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) throw ConfigError("cannot create config file: " + out_path);
    out << text;
    std::printf("default config written to %s\n", out_path.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic phase-space simulator for mixing-based interferometry"};
  app.set_version_flag("--version", std::string("twmix ") + twmix::kVersion);
  app.require_subcommand(1);

  GlobalArgs g;
  app.add_option("--config", g.config_path, "experiment config file (defaults used if omitted)");
  std::uint64_t seed_val = 0;
  int threads_val = 0;
  auto* seed_opt = app.add_option("--seed", seed_val, "override the config seed");
  auto* threads_opt = app.add_option("--threads", threads_val, "override the worker count");

  std::string out_path, snapshot_path;

  auto* prepare = app.add_subcommand("prepare", "evolve an ensemble and store a snapshot");
  prepare->add_option("--out", out_path, "snapshot file")->required();

  auto* scan = app.add_subcommand("scan-fwm", "occupation and squeezing scan over mixing time");
  scan->add_option("--out", out_path, "CSV output")->required();

  auto* interfere = app.add_subcommand("interfere", "pulse sequence and sensitivity sweep");
  interfere->add_option("--out", out_path, "CSV output")->required();
  interfere->add_option("--from", snapshot_path, "reuse a stored snapshot");

  auto* robust = app.add_subcommand("robustness", "sensitivity vs source miscalibration");
  robust->add_option("--out", out_path, "CSV output")->required();

  app.add_subcommand("selftest", "fast internal consistency checks");

  auto* emit = app.add_subcommand("emit-config", "print or write the default config");
  emit->add_option("--out", out_path, "write to file instead of stdout");

  try {
    app.parse(argc, argv);
    if (*seed_opt) g.seed = seed_val;
    if (*threads_opt) g.threads = threads_val;

    if (app.got_subcommand(prepare)) return cmd_prepare(g, out_path);
    if (app.got_subcommand(scan)) return cmd_scan(g, out_path);
    if (app.got_subcommand(interfere)) return cmd_interfere(g, out_path, snapshot_path);
    if (app.got_subcommand(robust)) return cmd_robustness(g, out_path);
    if (app.got_subcommand("selftest")) return cmd_selftest();
    if (app.got_subcommand(emit)) return cmd_emit_config(out_path);
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const twmix::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const twmix::CheckpointError& e) {
    std::fprintf(stderr, "snapshot error: %s\n", e.what());
    return 4;
  } catch (const twmix::NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
