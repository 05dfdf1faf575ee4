#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qaction/exec.hpp"
#include "qaction/grid.hpp"

namespace qaction {

enum class RunMode { fk, finite_t, verify, invariance, sweep };

RunMode parse_mode(const std::string& name);
std::string mode_name(RunMode mode);

// Resolved run description. Internal units keep hbar explicit but default to
// hbar = 1; beta_mode reinterprets the T entries as inverse temperatures via
// T = hbar * beta.
struct RunConfig {
  RunMode mode = RunMode::finite_t;
  std::string preset;  // empty for fully explicit configs

  ClassicalSystem system;
  std::optional<double> box_min, box_max;  // grid overrides
  std::optional<int> n_points;
  int n_states = 48;

  Window window{-2.0, 2.0, 81};
  std::vector<double> T_list{1.0};
  bool beta_mode = false;

  std::vector<int> basis_degrees{2, 4, 6, 8};
  double m_tilde_gauge = 1.0;
  double G0 = 1.0;
  std::vector<double> alphas{0.5, 2.0, 3.0};  // invariance mode

  std::string output_dir = "out";
  std::uint64_t seed = 12345;
  bool serial = false;
  int n_t = 2001;
  bool allow_double_well = false;

  Exec exec() const { return serial ? Exec::serial : Exec::parallel; }
  std::vector<double> times() const;  // beta applied
  Grid make_grid() const;             // preset/override pins or auto rule
  void validate() const;              // config_error with the offending field path
};

// Presets pin grids that were sized for their acceptance tolerances:
//   ho         m = omega = hbar = 1, box +-12.8, 512001 points, window [-2,2]
//   quartic    V = x^4, box +-4, 8001 points, window [-1,1]
//   anharmonic V = x^2/2 + lambda x^4 (lambda = 0.1), auto grid
//   double_well V = (x^2 - 2.25)^2 / 2, opt-in only: the near-degenerate
//               ground pair sits outside the non-degeneracy assumptions.
RunConfig preset_config(const std::string& name);

RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& cfg);
RunConfig load_config_file(const std::string& path);

// CLI front end: --config file first, then flag overrides.
RunConfig parse_cli(int argc, const char* const* argv);

}  // namespace qaction
