#include "qaction/config.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qaction/errors.hpp"

namespace qaction {

RunMode parse_mode(const std::string& name) {
  if (name == "fk") return RunMode::fk;
  if (name == "finite_t") return RunMode::finite_t;
  if (name == "verify") return RunMode::verify;
  if (name == "invariance") return RunMode::invariance;
  if (name == "sweep") return RunMode::sweep;
  throw config_error("mode: unknown value '" + name +
                     "' (expected fk, finite_t, verify, invariance or sweep)");
}

std::string mode_name(RunMode mode) {
  switch (mode) {
    case RunMode::fk: return "fk";
    case RunMode::finite_t: return "finite_t";
    case RunMode::verify: return "verify";
    case RunMode::invariance: return "invariance";
    case RunMode::sweep: return "sweep";
  }
  return "?";
}

std::vector<double> RunConfig::times() const {
  std::vector<double> out = T_list;
  if (beta_mode)
    for (double& t : out) t *= system.hbar;
  return out;
}

Grid RunConfig::make_grid() const {
  int pinned = (box_min ? 1 : 0) + (box_max ? 1 : 0) + (n_points ? 1 : 0);
  if (pinned == 3) {
    Grid g{*box_min, *box_max, *n_points};
    g.validate();
    return g;
  }
  if (pinned != 0)
    throw config_error("grid: box_min, box_max and n_points must be pinned together");
  std::vector<double> ts = times();
  double t_min = *std::min_element(ts.begin(), ts.end());
  return auto_grid(system, t_min);
}

void RunConfig::validate() const {
  if (!(system.mass > 0.0)) throw config_error("system.mass: must be positive");
  if (!(system.hbar > 0.0)) throw config_error("system.hbar: must be positive");
  if (system.potential.coeffs.empty())
    throw config_error("system.potential: empty coefficient list");
  for (double c : system.potential.coeffs)
    if (!std::isfinite(c)) throw config_error("system.potential: non-finite coefficient");
  if (!system.potential.confining() && !system.box_regularized)
    throw config_error(
        "system.potential: not confining; set box_regularized to treat the pinned box as "
        "a hard-wall problem");

  if (n_states < 1) throw config_error("n_states: must be at least 1");
  if (!(window.hi > window.lo)) throw config_error("window.hi: must exceed window.lo");
  if (window.n_nodes < 2) throw config_error("window.n_nodes: must be at least 2");
  if (T_list.empty()) throw config_error("T_list: must not be empty");
  for (std::size_t k = 0; k < T_list.size(); ++k)
    if (!(T_list[k] > 0.0) || !std::isfinite(T_list[k])) {
      std::ostringstream os;
      os << "T_list[" << k << "]: must be positive and finite";
      throw config_error(os.str());
    }
  if (basis_degrees.empty()) throw config_error("basis_degrees: must not be empty");
  for (std::size_t k = 0; k < basis_degrees.size(); ++k) {
    if (basis_degrees[k] < 1) {
      std::ostringstream os;
      os << "basis_degrees[" << k << "]: must be at least 1 (constants are not observable)";
      throw config_error(os.str());
    }
    if (k > 0 && basis_degrees[k] <= basis_degrees[k - 1])
      throw config_error("basis_degrees: must be strictly increasing");
  }
  if (!(m_tilde_gauge > 0.0)) throw config_error("m_tilde_gauge: must be positive");
  if (!(G0 > 0.0)) throw config_error("G0: must be positive");
  if (mode == RunMode::invariance) {
    if (alphas.empty()) throw config_error("alphas: must not be empty in invariance mode");
    for (std::size_t k = 0; k < alphas.size(); ++k)
      if (!(alphas[k] > 0.0)) {
        std::ostringstream os;
        os << "alphas[" << k << "]: must be positive";
        throw config_error(os.str());
      }
  }
  if (output_dir.empty()) throw config_error("output_dir: must not be empty");
  if (n_t < 5) throw config_error("n_t: must be at least 5");
  if (box_min && box_max && !(*box_max > *box_min))
    throw config_error("box_max: must exceed box_min");
  if (n_points && *n_points < 16) throw config_error("n_points: must be at least 16");

  // Multiple wells put near-degenerate pairs at the bottom of the spectrum,
  // outside the non-degeneracy assumptions the reconstruction relies on.
  if (!allow_double_well) {
    double r = 3.0 * std::max(std::fabs(window.lo), std::fabs(window.hi)) + 1.0;
    int minima = 0;
    constexpr int kScan = 2048;
    double prev2 = system.potential(-r), prev1 = system.potential(-r + 2.0 * r / kScan);
    for (int i = 2; i <= kScan; ++i) {
      double v = system.potential(-r + 2.0 * r * i / kScan);
      if (prev1 < prev2 && prev1 < v) ++minima;
      prev2 = prev1;
      prev1 = v;
    }
    if (minima >= 2)
      throw config_error(
          "system.potential: multiple wells detected; pass allow_double_well to proceed "
          "(near-degenerate ground pairs violate the reconstruction's assumptions)");
  }
}

RunConfig preset_config(const std::string& name) {
  RunConfig cfg;
  cfg.preset = name;
  if (name == "ho") {
    cfg.system.mass = 1.0;
    cfg.system.hbar = 1.0;
    cfg.system.potential.coeffs = {0.0, 0.0, 0.5};
    cfg.box_min = -12.8;
    cfg.box_max = 12.8;
    cfg.n_points = 512001;
    cfg.n_states = 85;
    cfg.window = {-2.0, 2.0, 81};
  } else if (name == "quartic") {
    cfg.system.mass = 1.0;
    cfg.system.hbar = 1.0;
    cfg.system.potential.coeffs = {0.0, 0.0, 0.0, 0.0, 1.0};
    cfg.box_min = -4.0;
    cfg.box_max = 4.0;
    cfg.n_points = 8001;
    cfg.n_states = 48;
    cfg.window = {-1.0, 1.0, 81};
  } else if (name == "anharmonic") {
    cfg.system.mass = 1.0;
    cfg.system.hbar = 1.0;
    cfg.system.potential.coeffs = {0.0, 0.0, 0.5, 0.0, 0.1};
    cfg.n_states = 48;
    cfg.window = {-2.0, 2.0, 81};
  } else if (name == "double_well") {
    cfg.system.mass = 1.0;
    cfg.system.hbar = 1.0;
    // (x^2 - 2.25)^2 / 2, minima at +-1.5
    cfg.system.potential.coeffs = {2.53125, 0.0, -2.25, 0.0, 0.5};
    cfg.n_states = 48;
    cfg.window = {-2.2, 2.2, 89};
  } else {
    throw config_error("preset: unknown name '" + name +
                       "' (available: ho, quartic, anharmonic, double_well)");
  }
  return cfg;
}

namespace {

[[noreturn]] void bad_key(const std::string& where, const std::string& key) {
  throw config_error("config: unknown key '" + (where.empty() ? key : where + "." + key) + "'");
}

double as_number(const nlohmann::json& v, const std::string& path) {
  if (!v.is_number()) throw config_error("config: " + path + " must be a number");
  return v.get<double>();
}

int as_int(const nlohmann::json& v, const std::string& path) {
  if (!v.is_number_integer()) throw config_error("config: " + path + " must be an integer");
  return v.get<int>();
}

bool as_bool(const nlohmann::json& v, const std::string& path) {
  if (!v.is_boolean()) throw config_error("config: " + path + " must be a boolean");
  return v.get<bool>();
}

std::string as_string(const nlohmann::json& v, const std::string& path) {
  if (!v.is_string()) throw config_error("config: " + path + " must be a string");
  return v.get<std::string>();
}

std::vector<double> as_number_list(const nlohmann::json& v, const std::string& path) {
  if (!v.is_array()) throw config_error("config: " + path + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) out.push_back(as_number(e, path + "[]"));
  return out;
}

}  // namespace

RunConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw config_error("config: top level must be an object");
  RunConfig cfg;
  if (j.contains("preset")) cfg = preset_config(as_string(j.at("preset"), "preset"));

  for (const auto& [key, val] : j.items()) {
    if (key == "preset") {
    } else if (key == "mode") {
      cfg.mode = parse_mode(as_string(val, key));
    } else if (key == "system") {
      if (!val.is_object()) throw config_error("config: system must be an object");
      for (const auto& [skey, sval] : val.items()) {
        if (skey == "mass")
          cfg.system.mass = as_number(sval, "system.mass");
        else if (skey == "hbar")
          cfg.system.hbar = as_number(sval, "system.hbar");
        else if (skey == "potential")
          cfg.system.potential.coeffs = as_number_list(sval, "system.potential");
        else if (skey == "box_regularized")
          cfg.system.box_regularized = as_bool(sval, "system.box_regularized");
        else
          bad_key("system", skey);
      }
    } else if (key == "box_min") {
      cfg.box_min = as_number(val, key);
    } else if (key == "box_max") {
      cfg.box_max = as_number(val, key);
    } else if (key == "n_points") {
      cfg.n_points = as_int(val, key);
    } else if (key == "n_states") {
      cfg.n_states = as_int(val, key);
    } else if (key == "window") {
      if (!val.is_object()) throw config_error("config: window must be an object");
      for (const auto& [wkey, wval] : val.items()) {
        if (wkey == "lo")
          cfg.window.lo = as_number(wval, "window.lo");
        else if (wkey == "hi")
          cfg.window.hi = as_number(wval, "window.hi");
        else if (wkey == "n_nodes")
          cfg.window.n_nodes = as_int(wval, "window.n_nodes");
        else
          bad_key("window", wkey);
      }
    } else if (key == "T_list") {
      cfg.T_list = as_number_list(val, key);
    } else if (key == "beta_mode") {
      cfg.beta_mode = as_bool(val, key);
    } else if (key == "basis_degrees") {
      cfg.basis_degrees.clear();
      if (!val.is_array()) throw config_error("config: basis_degrees must be an array");
      for (const auto& e : val) cfg.basis_degrees.push_back(as_int(e, "basis_degrees[]"));
    } else if (key == "m_tilde_gauge") {
      cfg.m_tilde_gauge = as_number(val, key);
    } else if (key == "G0") {
      cfg.G0 = as_number(val, key);
    } else if (key == "alphas") {
      cfg.alphas = as_number_list(val, key);
    } else if (key == "output_dir") {
      cfg.output_dir = as_string(val, key);
    } else if (key == "seed") {
      if (!val.is_number_unsigned() && !val.is_number_integer())
        throw config_error("config: seed must be a non-negative integer");
      cfg.seed = val.get<std::uint64_t>();
    } else if (key == "serial") {
      cfg.serial = as_bool(val, key);
    } else if (key == "n_t") {
      cfg.n_t = as_int(val, key);
    } else if (key == "allow_double_well") {
      cfg.allow_double_well = as_bool(val, key);
    } else {
      bad_key("", key);
    }
  }
  return cfg;
}

nlohmann::json config_to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["mode"] = mode_name(cfg.mode);
  if (!cfg.preset.empty()) j["preset"] = cfg.preset;
  j["system"] = {{"mass", cfg.system.mass},
                 {"hbar", cfg.system.hbar},
                 {"potential", cfg.system.potential.coeffs},
                 {"box_regularized", cfg.system.box_regularized}};
  if (cfg.box_min) j["box_min"] = *cfg.box_min;
  if (cfg.box_max) j["box_max"] = *cfg.box_max;
  if (cfg.n_points) j["n_points"] = *cfg.n_points;
  j["n_states"] = cfg.n_states;
  j["window"] = {{"lo", cfg.window.lo}, {"hi", cfg.window.hi}, {"n_nodes", cfg.window.n_nodes}};
  j["T_list"] = cfg.T_list;
  j["beta_mode"] = cfg.beta_mode;
  j["basis_degrees"] = cfg.basis_degrees;
  j["m_tilde_gauge"] = cfg.m_tilde_gauge;
  j["G0"] = cfg.G0;
  j["alphas"] = cfg.alphas;
  j["output_dir"] = cfg.output_dir;
  j["seed"] = cfg.seed;
  j["serial"] = cfg.serial;
  j["n_t"] = cfg.n_t;
  j["allow_double_well"] = cfg.allow_double_well;
  return j;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("config: cannot read '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw config_error("config: invalid JSON in '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

RunConfig parse_cli(int argc, const char* const* argv) {
  CLI::App app{
      "Reconstructs the quantum action of a 1-D system from its Euclidean propagator "
      "and verifies the amplitude along the action's own classical trajectories."};
  app.get_formatter()->column_width(30);

  std::string config_path, preset, mode;
  double mass = 0, hbar = 0, m_gauge = 0, g0 = 0, box_min = 0, box_max = 0;
  std::vector<double> potential, t_list, beta_list, alphas, window_spec;
  std::vector<int> degrees;
  int n_points = 0, n_states = 0, n_t = 0;
  std::uint64_t seed = 0;
  bool serial = false, box_reg = false, allow_dw = false;

  auto* opt_config = app.add_option("-c,--config", config_path, "JSON config file");
  auto* opt_preset =
      app.add_option("-p,--preset", preset, "preset: ho, quartic, anharmonic, double_well");
  opt_config->excludes(opt_preset);
  auto* opt_mode =
      app.add_option("-m,--mode", mode, "fk, finite_t, verify, invariance or sweep");
  auto* opt_mass = app.add_option("--mass", mass, "particle mass");
  auto* opt_hbar = app.add_option("--hbar", hbar, "Planck constant");
  auto* opt_pot = app.add_option("--potential", potential,
                                 "potential coefficients c0,c1,... (V = sum c_k x^k)")
                      ->delimiter(',');
  auto* opt_boxreg =
      app.add_flag("--box-regularized", box_reg, "accept a non-confining potential in a box");
  auto* opt_bmin = app.add_option("--box-min", box_min, "left wall");
  auto* opt_bmax = app.add_option("--box-max", box_max, "right wall");
  auto* opt_np = app.add_option("--n-points", n_points, "grid points (walls included)");
  auto* opt_ns = app.add_option("--n-states", n_states, "spectral states to resolve");
  auto* opt_win =
      app.add_option("--window", window_spec, "window lo,hi,n_nodes")->delimiter(',')
          ->expected(3);
  auto* opt_t = app.add_option("-T,--times", t_list, "propagation times")->delimiter(',');
  auto* opt_beta =
      app.add_option("--beta", beta_list, "inverse temperatures (T = hbar beta)")
          ->delimiter(',');
  opt_t->excludes(opt_beta);
  auto* opt_deg =
      app.add_option("--degrees", degrees, "potential basis degrees")->delimiter(',');
  auto* opt_gauge = app.add_option("--m-gauge", m_gauge, "mass gauge for the fit");
  auto* opt_g0 = app.add_option("--G0", g0, "reference normalization of eta");
  auto* opt_alpha =
      app.add_option("--alphas", alphas, "scale factors for invariance mode")->delimiter(',');
  std::string out_dir;
  auto* opt_out = app.add_option("-o,--out", out_dir, "output directory");
  auto* opt_seed = app.add_option("--seed", seed, "subsampling seed");
  auto* opt_serial = app.add_flag("--serial", serial, "force the serial kernels");
  auto* opt_nt = app.add_option("--n-t", n_t, "trajectory output nodes");
  auto* opt_dw = app.add_flag("--allow-double-well", allow_dw,
                              "opt in to multi-well potentials");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help() << std::endl;
    std::exit(0);
  } catch (const CLI::ParseError& e) {
    throw config_error(std::string("usage: ") + e.what());
  }

  RunConfig cfg;
  if (opt_config->count()) cfg = load_config_file(config_path);
  else if (opt_preset->count()) cfg = preset_config(preset);

  if (opt_mode->count()) cfg.mode = parse_mode(mode);
  if (opt_mass->count()) cfg.system.mass = mass;
  if (opt_hbar->count()) cfg.system.hbar = hbar;
  if (opt_pot->count()) cfg.system.potential.coeffs = potential;
  if (opt_boxreg->count()) cfg.system.box_regularized = true;
  if (opt_bmin->count()) cfg.box_min = box_min;
  if (opt_bmax->count()) cfg.box_max = box_max;
  if (opt_np->count()) cfg.n_points = n_points;
  if (opt_ns->count()) cfg.n_states = n_states;
  if (opt_win->count()) {
    cfg.window.lo = window_spec[0];
    cfg.window.hi = window_spec[1];
    cfg.window.n_nodes = static_cast<int>(std::lround(window_spec[2]));
  }
  if (opt_t->count()) {
    cfg.T_list = t_list;
    cfg.beta_mode = false;
  }
  if (opt_beta->count()) {
    cfg.T_list = beta_list;
    cfg.beta_mode = true;
  }
  if (opt_deg->count()) cfg.basis_degrees = degrees;
  if (opt_gauge->count()) cfg.m_tilde_gauge = m_gauge;
  if (opt_g0->count()) cfg.G0 = g0;
  if (opt_alpha->count()) cfg.alphas = alphas;
  if (opt_out->count()) cfg.output_dir = out_dir;
  if (opt_seed->count()) cfg.seed = seed;
  if (opt_serial->count()) cfg.serial = true;
  if (opt_nt->count()) cfg.n_t = n_t;
  if (opt_dw->count()) cfg.allow_double_well = true;

  cfg.validate();
  return cfg;
}

}  // namespace qaction
