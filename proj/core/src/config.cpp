#include "twmix/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "twmix/csv.hpp"
#include "twmix/errors.hpp"
#include "twmix/ground_state.hpp"

namespace twmix {

namespace {

struct UnitEntry {
  const char* name;
  double scale;
};

constexpr UnitEntry kTime[] = {{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9}};
constexpr UnitEntry kLength[] = {{"m", 1.0}, {"mm", 1e-3}, {"um", 1e-6}, {"nm", 1e-9}};
constexpr UnitEntry kMass[] = {{"kg", 1.0}};
constexpr UnitEntry kRate[] = {{"1/s", 1.0}, {"rad/s", 1.0}};
constexpr UnitEntry kWavenumber[] = {{"rad/m", 1.0}, {"1/m", 1.0}};
constexpr UnitEntry kAngle[] = {{"rad", 1.0}};
// Trap frequencies given in Hz are cycles and get the 2 pi.
constexpr UnitEntry kAngularFrequency[] = {{"rad/s", 1.0}, {"Hz", 2.0 * std::numbers::pi}};

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

struct Parser {
  std::string section;
  std::string key;
  int line = 0;

  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream msg;
    msg << "config line " << line << " ([" << section << "] " << key << "): " << what;
    throw ConfigError(msg.str());
  }

  double number(const std::string& tok) const {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      fail("not a number: '" + tok + "'");
    }
    if (used != tok.size()) fail("trailing characters in number: '" + tok + "'");
    if (!std::isfinite(v)) fail("number must be finite");
    return v;
  }

  double unitless(const std::string& value) const {
    const auto toks = split_ws(value);
    if (toks.size() != 1) fail("expected a single dimensionless number");
    return number(toks[0]);
  }

  double dimensioned(const std::string& value, std::span<const UnitEntry> units) const {
    const auto toks = split_ws(value);
    if (toks.size() < 2) fail("unit is required");
    if (toks.size() > 2) fail("expected 'number unit'");
    for (const auto& u : units)
      if (toks[1] == u.name) return number(toks[0]) * u.scale;
    std::string allowed;
    for (const auto& u : units) allowed += std::string(" ") + u.name;
    fail("unknown unit '" + toks[1] + "' (allowed:" + allowed + ")");
  }

  std::uint64_t integer(const std::string& value) const {
    const double v = unitless(value);
    if (v < 0 || v != std::floor(v)) fail("expected a nonnegative integer");
    return static_cast<std::uint64_t>(v);
  }

  bool boolean(const std::string& value) const {
    if (value == "true") return true;
    if (value == "false") return false;
    fail("expected true or false");
  }

  // Lists accept both "1 2 3" and "1, 2, 3".
  std::vector<double> list(const std::string& value) const {
    std::string s = value;
    std::replace(s.begin(), s.end(), ',', ' ');
    const auto toks = split_ws(s);
    if (toks.empty()) fail("expected a list of numbers");
    std::vector<double> out;
    out.reserve(toks.size());
    for (const auto& t : toks) out.push_back(number(t));
    return out;
  }
};

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig c;
  Parser ctx;
  std::set<std::string> seen;

  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++ctx.line;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string stripped = trim(raw);
    if (stripped.empty()) continue;

    if (stripped.front() == '[') {
      if (stripped.back() != ']') {
        ctx.key.clear();
        ctx.fail("malformed section header");
      }
      ctx.section = trim(stripped.substr(1, stripped.size() - 2));
      static const std::set<std::string> kSections = {
          "run", "fwm", "grid", "multimode", "interferometer", "scan", "oat", "robustness"};
      if (!kSections.count(ctx.section)) {
        ctx.key.clear();
        ctx.fail("unknown section");
      }
      continue;
    }

    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      ctx.key.clear();
      ctx.fail("expected 'key = value'");
    }
    ctx.key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (ctx.section.empty()) ctx.fail("key outside of any section");
    if (ctx.key.empty()) ctx.fail("empty key");
    if (value.empty()) ctx.fail("empty value");
    if (!seen.insert(ctx.section + "." + ctx.key).second) ctx.fail("duplicate key");

    const std::string& s = ctx.section;
    const std::string& k = ctx.key;
    if (s == "run") {
      if (k == "model") {
        if (value == "four_mode") c.model = ModelKind::four_mode;
        else if (value == "multimode") c.model = ModelKind::multimode;
        else ctx.fail("expected four_mode or multimode");
      } else if (k == "trajectories") c.trajectories = ctx.integer(value);
      else if (k == "seed") c.seed = ctx.integer(value);
      else if (k == "threads") c.threads = static_cast<int>(ctx.integer(value));
      else ctx.fail("unknown key");
    } else if (s == "fwm") {
      if (k == "nt_chi") c.nt_chi = ctx.dimensioned(value, kRate);
      else if (k == "n_aL") c.fwm_n_aL = ctx.unitless(value);
      else if (k == "n_bL") c.fwm_n_bL = ctx.unitless(value);
      else if (k == "n_aR") c.fwm_n_aR = ctx.unitless(value);
      else if (k == "n_bR") c.fwm_n_bR = ctx.unitless(value);
      else if (k == "seed_phase_aR") c.seed_phase_aR = ctx.dimensioned(value, kAngle);
      else if (k == "seed_phase_bL") c.seed_phase_bL = ctx.dimensioned(value, kAngle);
      else if (k == "t_mix") c.t_mix = ctx.dimensioned(value, kTime);
      else if (k == "dt") c.fwm_dt = ctx.dimensioned(value, kTime);
      else if (k == "omega_0") c.omega_0 = ctx.dimensioned(value, kAngularFrequency);
      else if (k == "omega_k") c.omega_k = ctx.dimensioned(value, kAngularFrequency);
      else ctx.fail("unknown key");
    } else if (s == "grid") {
      if (k == "length") c.grid.length = ctx.dimensioned(value, kLength);
      else if (k == "points") c.grid.n = ctx.integer(value);
      else if (k == "x_min") c.grid.x_min = ctx.dimensioned(value, kLength);
      else if (k == "x_split") c.x_split = ctx.dimensioned(value, kLength);
      else ctx.fail("unknown key");
    } else if (s == "multimode") {
      if (k == "dt") c.mm_dt = ctx.dimensioned(value, kTime);
      else if (k == "k0") c.k0 = ctx.dimensioned(value, kWavenumber);
      else if (k == "mass") c.mass = ctx.dimensioned(value, kMass);
      else if (k == "trap_frequency") c.trap_omega = ctx.dimensioned(value, kAngularFrequency);
      else if (k == "r_perp") c.r_perp = ctx.dimensioned(value, kLength);
      else if (k == "separation_time") c.separation_time = ctx.dimensioned(value, kTime);
      else if (k == "interacting_ground_state") c.interacting_ground_state = ctx.boolean(value);
      else if (k == "interaction") {
        if (value == "calibrated") c.interaction = InteractionSource::calibrated;
        else if (value == "physical") c.interaction = InteractionSource::physical;
        else ctx.fail("expected calibrated or physical");
      } else if (k == "scattering_length") c.scattering_length = ctx.dimensioned(value, kLength);
      else ctx.fail("unknown key");
    } else if (s == "interferometer") {
      if (k == "phi2_points") c.phi2_points = ctx.integer(value);
      else if (k == "differential") c.differential = ctx.boolean(value);
      else ctx.fail("unknown key");
    } else if (s == "scan") {
      if (k == "tau_values") c.tau_values = ctx.list(value);
      else ctx.fail("unknown key");
    } else if (s == "oat") {
      if (k == "n_total") c.oat_n_total = ctx.unitless(value);
      else if (k == "chi") c.oat_chi = ctx.dimensioned(value, kRate);
      else if (k == "asymmetry") c.oat_asymmetry = ctx.unitless(value);
      else if (k == "chi_cross") c.oat_chi_cross = ctx.dimensioned(value, kRate);
      else if (k == "input") {
        if (value == "number_stabilized") c.oat_input = InputStatistics::number_stabilized;
        else if (value == "poissonian") c.oat_input = InputStatistics::poissonian;
        else ctx.fail("expected number_stabilized or poissonian");
      } else ctx.fail("unknown key");
    } else if (s == "robustness") {
      if (k == "oat_n_large") c.oat_n_large = ctx.unitless(value);
      else if (k == "oat_n_small") c.oat_n_small = ctx.unitless(value);
      else if (k == "epsilons") c.epsilons = ctx.list(value);
      else ctx.fail("unknown key");
    }
  }

  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void validate_config(const ExperimentConfig& c) {
  if (c.trajectories < 2) throw ConfigError("trajectories must be at least 2");
  if (c.threads < 1) throw ConfigError("threads must be at least 1");
  c.grid.validate();
  if (!(c.x_split > c.grid.x_min && c.x_split < c.grid.x_min + c.grid.length))
    throw ConfigError("x_split must lie inside the grid");
  if (!(c.nt_chi > 0)) throw ConfigError("nt_chi must be positive");
  if (!(c.fwm_n_aL >= 0 && c.fwm_n_bL >= 0 && c.fwm_n_aR >= 0 && c.fwm_n_bR >= 0))
    throw ConfigError("occupations must be nonnegative");
  if (!(c.fwm_n_total() > 0)) throw ConfigError("total occupation must be positive");
  if (!(c.t_mix >= 0)) throw ConfigError("t_mix must be nonnegative");
  if (!(c.fwm_dt > 0 && c.mm_dt > 0)) throw ConfigError("time steps must be positive");
  if (!(c.k0 > 0)) throw ConfigError("k0 must be positive");
  if (!(c.mass > 0)) throw ConfigError("mass must be positive");
  if (!(c.trap_omega > 0)) throw ConfigError("trap frequency must be positive");
  if (!(c.r_perp > 0)) throw ConfigError("r_perp must be positive");
  if (!(c.separation_time >= 0)) throw ConfigError("separation_time must be nonnegative");
  if (!(c.scattering_length > 0)) throw ConfigError("scattering_length must be positive");
  if (c.phi2_points < 4) throw ConfigError("phi2_points must be at least 4");
  if (c.tau_values.empty()) throw ConfigError("tau_values must be nonempty");
  for (std::size_t i = 0; i < c.tau_values.size(); ++i) {
    if (!(c.tau_values[i] > 0)) throw ConfigError("tau_values must be positive");
    if (i > 0 && c.tau_values[i] <= c.tau_values[i - 1])
      throw ConfigError("tau_values must be strictly ascending");
  }
  if (!(c.oat_n_total > 1)) throw ConfigError("oat n_total must exceed 1");
  if (!(c.oat_chi > 0)) throw ConfigError("oat chi must be positive");
  if (!(std::abs(c.oat_asymmetry) < 1)) throw ConfigError("asymmetry must be in (-1, 1)");
  if (!(c.oat_n_large > 1 && c.oat_n_small > 1))
    throw ConfigError("robustness occupations must exceed 1");
  if (c.epsilons.empty()) throw ConfigError("epsilons must be nonempty");
  for (const double e : c.epsilons)
    if (!(e > -1.0)) throw ConfigError("epsilons must be greater than -1");
}

namespace {

void emit(std::ostringstream& out, const char* key, double v, const char* unit = nullptr) {
  out << key << " = " << format_double(v);
  if (unit) out << " " << unit;
  out << "\n";
}

void emit_list(std::ostringstream& out, const char* key, std::span<const double> values) {
  out << key << " =";
  for (const double v : values) out << " " << format_double(v);
  out << "\n";
}

}  // namespace

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "[run]\n";
  out << "model = " << (c.model == ModelKind::four_mode ? "four_mode" : "multimode") << "\n";
  out << "trajectories = " << c.trajectories << "\n";
  out << "seed = " << c.seed << "\n";
  out << "threads = " << c.threads << "\n";
  out << "\n[fwm]\n";
  emit(out, "nt_chi", c.nt_chi, "1/s");
  emit(out, "n_aL", c.fwm_n_aL);
  emit(out, "n_bL", c.fwm_n_bL);
  emit(out, "n_aR", c.fwm_n_aR);
  emit(out, "n_bR", c.fwm_n_bR);
  emit(out, "seed_phase_aR", c.seed_phase_aR, "rad");
  emit(out, "seed_phase_bL", c.seed_phase_bL, "rad");
  emit(out, "t_mix", c.t_mix, "s");
  emit(out, "dt", c.fwm_dt, "s");
  emit(out, "omega_0", c.omega_0, "rad/s");
  emit(out, "omega_k", c.omega_k, "rad/s");
  out << "\n[grid]\n";
  emit(out, "length", c.grid.length, "m");
  out << "points = " << c.grid.n << "\n";
  emit(out, "x_min", c.grid.x_min, "m");
  emit(out, "x_split", c.x_split, "m");
  out << "\n[multimode]\n";
  emit(out, "dt", c.mm_dt, "s");
  emit(out, "k0", c.k0, "rad/m");
  emit(out, "mass", c.mass, "kg");
  emit(out, "trap_frequency", c.trap_omega, "rad/s");
  emit(out, "r_perp", c.r_perp, "m");
  emit(out, "separation_time", c.separation_time, "s");
  out << "interacting_ground_state = " << (c.interacting_ground_state ? "true" : "false") << "\n";
  out << "interaction = "
      << (c.interaction == InteractionSource::calibrated ? "calibrated" : "physical") << "\n";
  emit(out, "scattering_length", c.scattering_length, "m");
  out << "\n[interferometer]\n";
  out << "phi2_points = " << c.phi2_points << "\n";
  out << "differential = " << (c.differential ? "true" : "false") << "\n";
  out << "\n[scan]\n";
  emit_list(out, "tau_values", c.tau_values);
  out << "\n[oat]\n";
  emit(out, "n_total", c.oat_n_total);
  emit(out, "chi", c.oat_chi, "1/s");
  emit(out, "asymmetry", c.oat_asymmetry);
  emit(out, "chi_cross", c.oat_chi_cross, "1/s");
  out << "input = "
      << (c.oat_input == InputStatistics::number_stabilized ? "number_stabilized" : "poissonian")
      << "\n";
  out << "\n[robustness]\n";
  emit(out, "oat_n_large", c.oat_n_large);
  emit(out, "oat_n_small", c.oat_n_small);
  emit_list(out, "epsilons", c.epsilons);
  return out.str();
}

namespace {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (const char ch : bytes) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t config_hash(const ExperimentConfig& c) {
  return fnv1a64(serialize_config(c), 0xcbf29ce484222325ULL);
}

std::string config_hash_hex(const ExperimentConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(config_hash(c)));
  return buf;
}

std::array<std::uint8_t, 32> config_hash_wide(const ExperimentConfig& c) {
  // Four FNV lanes with distinct offsets; collision-resistant enough to
  // catch config mismatches, not cryptographic.
  static constexpr std::uint64_t kBases[4] = {
      0xcbf29ce484222325ULL, 0x84222325cbf29ce4ULL,
      0x9e3779b97f4a7c15ULL, 0xc2b2ae3d27d4eb4fULL};
  const std::string text = serialize_config(c);
  std::array<std::uint8_t, 32> out{};
  for (int lane = 0; lane < 4; ++lane) {
    std::uint64_t h = fnv1a64(text, kBases[lane]);
    for (int b = 0; b < 8; ++b) out[lane * 8 + b] = static_cast<std::uint8_t>(h >> (8 * b));
  }
  return out;
}

FourModeParams make_four_mode_params(const ExperimentConfig& c) {
  FourModeParams p;
  p.chi = chi_from_calibration(c.nt_chi, c.fwm_n_total());
  p.n_aL = c.fwm_n_aL;
  p.n_bL = c.fwm_n_bL;
  p.n_aR = c.fwm_n_aR;
  p.n_bR = c.fwm_n_bR;
  p.phase_aR = c.seed_phase_aR;
  p.phase_bL = c.seed_phase_bL;
  p.omega_0 = c.omega_0;
  p.omega_k = c.omega_k;
  p.dt = c.fwm_dt;
  return p;
}

EnsembleOptions make_ensemble_options(const ExperimentConfig& c) {
  EnsembleOptions o;
  o.n_traj = c.trajectories;
  o.seed = c.seed;
  o.threads = c.threads;
  return o;
}

MultimodeParams make_multimode_params(const ExperimentConfig& c) {
  MultimodeParams p;
  p.grid = c.grid;
  p.x_split = c.x_split;
  p.k0 = c.k0;
  p.dt = c.mm_dt;
  p.mass = c.mass;
  p.n_aL = c.fwm_n_aL;
  p.n_bL = c.fwm_n_bL;
  p.n_aR = c.fwm_n_aR;
  p.n_bR = c.fwm_n_bR;
  p.phase_aR = c.seed_phase_aR;
  p.phase_bL = c.seed_phase_bL;
  p.separation_time = c.separation_time;

  require_resolution(p.grid, c.k0, 0.5);

  const Trap1D trap{c.trap_omega, c.mass};
  const double n_total = c.fwm_n_total();
  if (c.interaction == InteractionSource::calibrated) {
    const auto cal = calibrate_interaction(p.grid, trap, n_total, c.nt_chi,
                                           c.interacting_ground_state);
    p.u1d = cal.u1d;
    p.psi0 = cal.ground.psi;
  } else {
    p.u1d = u1d_from_scattering(c.scattering_length, c.r_perp, c.mass);
    const double g_total = c.interacting_ground_state ? n_total * p.u1d : 0.0;
    p.psi0 = solve_ground_state(p.grid, trap, g_total).psi;
  }
  return p;
}

OatParams make_oat_params(const ExperimentConfig& c) {
  OatParams p;
  p.n_total = c.oat_n_total;
  p.chi = c.oat_chi;
  p.asymmetry = c.oat_asymmetry;
  p.chi_cross = c.oat_chi_cross;
  p.input = c.oat_input;
  return p;
}

}  // namespace twmix
