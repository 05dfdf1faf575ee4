#include "qaction/export_data.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "qaction/errors.hpp"

namespace qaction {

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json action_to_json(const QuantumAction& a) {
  nlohmann::json j;
  j["m_tilde"] = a.m_tilde;
  j["potential"] = a.potential_tilde.coeffs;
  j["V0"] = a.V0;
  j["Z_tilde"] = a.Z_tilde;
  j["T"] = std::isfinite(a.T) ? nlohmann::json(a.T) : nlohmann::json("inf");
  j["hbar"] = a.hbar;
  j["gauge_tag"] = a.gauge_tag;
  return j;
}

QuantumAction action_from_json(const nlohmann::json& j) {
  QuantumAction a;
  try {
    a.m_tilde = j.at("m_tilde").get<double>();
    a.potential_tilde.coeffs = j.at("potential").get<std::vector<double>>();
    a.V0 = j.at("V0").get<double>();
    a.Z_tilde = j.at("Z_tilde").get<double>();
    const auto& t = j.at("T");
    a.T = t.is_string() ? std::numeric_limits<double>::infinity() : t.get<double>();
    a.hbar = j.at("hbar").get<double>();
    a.gauge_tag = j.value("gauge_tag", std::string());
  } catch (const nlohmann::json::exception& e) {
    throw io_error(std::string("io: malformed action record: ") + e.what());
  }
  return a;
}

nlohmann::json fit_report_to_json(const FitReport& r) {
  return {{"residual_rms", r.residual_rms},
          {"residual_max", r.residual_max},
          {"window_lo", r.window_lo},
          {"window_hi", r.window_hi},
          {"basis_degrees", r.basis_degrees},
          {"condition_number", r.condition_number}};
}

nlohmann::json invariance_to_json(const InvarianceReport& r) {
  return {{"alpha", r.alpha},
          {"T", r.T},
          {"dG_rel_max", r.dG_rel_max},
          {"dSigma_max", r.dSigma_max},
          {"sigma_scale", r.sigma_scale},
          {"dProduct_rel", r.dProduct_rel},
          {"n_pairs", r.n_pairs}};
}

void write_text_file(const std::string& path, const std::string& body) {
  std::error_code ec;
  std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::filesystem::create_directories(p.parent_path(), ec);
    if (ec) throw io_error("io: cannot create directory '" + p.parent_path().string() + "'");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("io: cannot open '" + path + "' for writing");
  out << body;
  out.flush();
  if (!out.good()) throw io_error("io: short write to '" + path + "'");
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

namespace {

std::string meta_comment(const nlohmann::json& meta) {
  return "# config " + meta.dump() + "\n";
}

}  // namespace

void export_plotdata(const PropagatorTable& table, const std::string& path,
                     const nlohmann::json& meta) {
  std::ostringstream os;
  os << "# propagator table, T=" << format_g17(table.T) << ", states used "
     << table.n_states_used << ", truncation tail " << format_g17(table.truncation_tail)
     << "\n";
  os << meta_comment(meta);
  os << "y,x,G\n";
  int w = table.size();
  for (int i = 0; i < w; ++i)
    for (int j = 0; j < w; ++j)
      os << format_g17(table.positions[i]) << ',' << format_g17(table.positions[j]) << ','
         << format_g17(table.at(i, j)) << "\n";
  write_text_file(path, os.str());
}

void export_plotdata(const EtaField& eta, const std::string& path, const nlohmann::json& meta) {
  std::ostringstream os;
  os << "# eta = -log(G/G0) with spectral derivatives, T=" << format_g17(eta.T)
     << ", G0=" << format_g17(eta.G0) << "\n";
  os << meta_comment(meta);
  os << "y,x,eta,deta_dy,deta_dx\n";
  int w = eta.size();
  for (int i = 0; i < w; ++i)
    for (int j = 0; j < w; ++j)
      os << format_g17(eta.positions[i]) << ',' << format_g17(eta.positions[j]) << ','
         << format_g17(eta.eta_at(i, j)) << ',' << format_g17(eta.dy_at(i, j)) << ','
         << format_g17(eta.dx_at(i, j)) << "\n";
  write_text_file(path, os.str());
}

void export_plotdata(const QuantumAction& action, const std::string& path,
                     const nlohmann::json& meta) {
  std::ostringstream os;
  os << "# quantum action: m_tilde=" << format_g17(action.m_tilde)
     << ", V0=" << format_g17(action.V0) << ", Z_tilde=" << format_g17(action.Z_tilde)
     << ", T=" << (std::isfinite(action.T) ? format_g17(action.T) : std::string("inf"))
     << ", hbar=" << format_g17(action.hbar) << "\n";
  os << "# " << action.gauge_tag << "\n";
  os << meta_comment(meta);
  os << "degree,coefficient\n";
  for (std::size_t d = 0; d < action.potential_tilde.coeffs.size(); ++d)
    os << d << ',' << format_g17(action.potential_tilde.coeffs[d]) << "\n";
  write_text_file(path, os.str());
}

void export_plotdata(const Trajectory& traj, const std::string& path,
                     const nlohmann::json& meta) {
  std::ostringstream os;
  os << "# trajectory a=" << format_g17(traj.a) << ", b=" << format_g17(traj.b)
     << ", T=" << format_g17(traj.T) << ", sigma=" << format_g17(traj.sigma)
     << ", eps=" << format_g17(traj.eps) << ", energy drift "
     << format_g17(traj.energy_drift) << ", segments " << traj.k_segments << "\n";
  os << meta_comment(meta);
  os << "t,x,v\n";
  for (int i = 0; i < traj.size(); ++i)
    os << format_g17(traj.t[i]) << ',' << format_g17(traj.x[i]) << ','
       << format_g17(traj.v[i]) << "\n";
  write_text_file(path, os.str());
}

std::vector<std::vector<double>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("io: cannot read '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  bool header_allowed = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        double v = std::stod(cell, &used);
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used])))
          ++used;
        if (used != cell.size()) throw std::invalid_argument(cell);
        row.push_back(v);
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (header_allowed) {
        header_allowed = false;
        continue;
      }
      std::ostringstream os;
      os << "io: malformed CSV '" << path << "' at line " << lineno;
      throw io_error(os.str());
    }
    header_allowed = false;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace qaction
