#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "qaction/invariance.hpp"
#include "qaction/propagator.hpp"
#include "qaction/quantum_action.hpp"
#include "qaction/trajectory.hpp"

namespace qaction {

// All numeric output is 17-significant-digit decimal, which round-trips
// doubles exactly; re-running an identical config reproduces artifacts
// byte for byte. Every file embeds the resolved config (CSV as '# ' header
// comments, JSON as a "config" object).

std::string format_g17(double v);

nlohmann::json action_to_json(const QuantumAction& a);
QuantumAction action_from_json(const nlohmann::json& j);
nlohmann::json fit_report_to_json(const FitReport& r);
nlohmann::json invariance_to_json(const InvarianceReport& r);

void write_text_file(const std::string& path, const std::string& body);
void write_json_file(const std::string& path, const nlohmann::json& j);

// CSV + JSON sidecar exports. `meta` is embedded verbatim (config echo).
void export_plotdata(const PropagatorTable& table, const std::string& path,
                     const nlohmann::json& meta);
void export_plotdata(const EtaField& eta, const std::string& path, const nlohmann::json& meta);
void export_plotdata(const QuantumAction& action, const std::string& path,
                     const nlohmann::json& meta);
void export_plotdata(const Trajectory& traj, const std::string& path,
                     const nlohmann::json& meta);

// Reads back a '#'-commented CSV of doubles (round-trip checks, plotting).
std::vector<std::vector<double>> read_csv(const std::string& path);

}  // namespace qaction
